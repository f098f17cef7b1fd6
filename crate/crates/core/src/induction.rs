//! The guided induction loop and precision evaluation.
//!
//! Starting from the bottom clause, each iteration runs one search step,
//! asks the teacher which true constraints should hold, conjoins the chosen
//! ones and keeps the result only if it scores strictly better. The loop
//! ends when an iteration leaves the theory unchanged or after `L`
//! iterations.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::advice::{apply_advice, AdviceSession, ConstraintLibrary, Exchange, Teacher, DEFAULT_K};
use crate::distance::DistanceContext;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::logic::builtin::BuiltinRegistry;
use crate::logic::cover::covers_clause;
use crate::logic::parse::GroundExample;
use crate::logic::term::{Clause, Literal, Theory};
use crate::search::{
    bottom_clause, neg_log_likelihood, search_step, ClauseScorer, ExampleScorer, RefineContext, Score, SearchConfig,
};

/// Which ingredients of the method are switched on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arm {
    /// Distance-aware score and teacher advice.
    Goci,
    /// Coverage and length only, no advice.
    Ilp,
    /// Distance-aware score, no advice.
    IlpScore,
    /// Advice, coverage-only score.
    IlpGuidance,
}

impl Arm {
    pub const ALL: [Arm; 4] = [Arm::Goci, Arm::Ilp, Arm::IlpScore, Arm::IlpGuidance];

    pub fn uses_distance(self) -> bool {
        matches!(self, Arm::Goci | Arm::IlpScore)
    }

    pub fn uses_advice(self) -> bool {
        matches!(self, Arm::Goci | Arm::IlpGuidance)
    }

    pub fn name(self) -> &'static str {
        match self {
            Arm::Goci => "GOCI",
            Arm::Ilp => "ILP",
            Arm::IlpScore => "ILP+Score",
            Arm::IlpGuidance => "ILP+Guidance",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace(['+', '-', '_'], "");
        match norm.as_str() {
            "goci" => Ok(Arm::Goci),
            "ilp" => Ok(Arm::Ilp),
            "ilpscore" => Ok(Arm::IlpScore),
            "ilpguidance" => Ok(Arm::IlpGuidance),
            _ => Err(Error::InvalidParameter(format!("unknown arm '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopConfig {
    /// Iteration bound `L`.
    pub max_iterations: usize,
    pub search: SearchConfig,
    /// Candidates shown per query.
    pub k: usize,
    pub use_distance: bool,
    pub use_advice: bool,
    /// Cap on the total number of queries; search continues after it is hit.
    pub query_budget: Option<usize>,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            max_iterations: 10,
            search: SearchConfig::default(),
            k: DEFAULT_K,
            use_distance: true,
            use_advice: true,
            query_budget: None,
        }
    }
}

impl LoopConfig {
    pub fn for_arm(arm: Arm) -> Self {
        LoopConfig { use_distance: arm.uses_distance(), use_advice: arm.uses_advice(), ..LoopConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("the iteration bound must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        self.search.validate()
    }
}

/// What happened in one iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    /// Index of the positive example whose clause this iteration refines.
    pub example: usize,
    pub iteration: usize,
    /// Theory held after the iteration, rendered.
    pub theory: String,
    pub score: f64,
    pub nll: f64,
    pub distance: Option<f64>,
    /// Score of the theory held before the iteration.
    pub previous_score: f64,
    pub queries: usize,
    pub accepted: bool,
    #[serde(default)]
    pub budget_exhausted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InductionResult {
    pub theory: Theory,
    pub traces: Vec<IterationTrace>,
    pub exchanges: Vec<Exchange>,
    /// Score of the final theory: summed −LL over the training set plus the
    /// mean conceptual distance to the positives (when enabled).
    pub score: Score,
    /// Score of the bottom clause(s).
    pub initial_score: f64,
}

impl InductionResult {
    pub fn queries(&self) -> usize {
        self.exchanges.len()
    }

    pub fn iterations(&self) -> usize {
        self.traces.len()
    }
}

/// Teacher used by arms without advice; it is never asked anything.
struct Silent;

impl Teacher for Silent {
    fn answer(&mut self, q: &crate::advice::AdviceQuery) -> Result<crate::advice::TeacherResponse> {
        Err(Error::Teacher(format!("no teacher configured for query {}", q.id)))
    }
}

struct ClauseRun {
    clause: Clause,
    traces: Vec<IterationTrace>,
    exchanges: Vec<Exchange>,
    initial: f64,
    next_id: u64,
}

#[allow(clippy::too_many_arguments)]
fn induce_clause(
    example: usize,
    x: &GroundExample,
    neg: &[GroundExample],
    domain: &Domain,
    registry: &BuiltinRegistry,
    lib: &ConstraintLibrary,
    cfg: &LoopConfig,
    teacher: &mut dyn Teacher,
    first_id: u64,
) -> Result<ClauseRun> {
    let bottom = bottom_clause(x, domain, registry)?;
    let dist = if cfg.use_distance { Some(DistanceContext::new(x, domain, registry)?) } else { None };
    let pos = std::slice::from_ref(x);
    let scorer = ExampleScorer::new(pos, neg, registry, &cfg.search, dist.as_ref());
    let bounds = cfg.search.bounds.unwrap_or(domain.bounds);
    let mut ctx = RefineContext { domain, registry, bounds, protected: BTreeSet::new() };
    let mut session = AdviceSession::new(lib.clone(), cfg.k);
    session.set_first_id(first_id);
    session.query_budget = cfg.query_budget;

    let mut prev = bottom.clone().canonical();
    let mut s_prev = scorer.score(&prev);
    let initial = s_prev.total;
    let mut preferred: Vec<Literal> = Vec::new();
    let mut traces = Vec::new();

    for iteration in 1..=cfg.max_iterations {
        let step = search_step(&prev, &bottom, &preferred, &ctx, &cfg.search, &scorer);
        let candidate = step.clause.clone();
        let before = session.queries();
        let mut chosen = Vec::new();
        let mut advised = candidate.clone();
        if cfg.use_advice && session.budget_left() {
            if let Ok(Some(theta)) = covers_clause(&candidate, x, registry, cfg.search.cover_budget) {
                let pref = session.pose(&candidate, &theta, iteration, domain, teacher)?;
                chosen = pref.chosen;
                advised = apply_advice(&candidate, &chosen, bounds.max_body).0;
            }
        }
        let queries = session.queries() - before;
        let s_adv = scorer.score(&advised);
        let previous_score = s_prev.total;
        let before_theory = prev.clone();
        if s_adv.total < s_prev.total {
            prev = advised;
            s_prev = s_adv;
            for l in chosen {
                if prev.body.contains(&l) && !preferred.contains(&l) {
                    ctx.protected.insert(l.clone());
                    preferred.push(l);
                }
            }
        } else if step.score.total < s_prev.total {
            prev = candidate;
            s_prev = step.score;
        }
        let accepted = prev != before_theory;
        let trace = IterationTrace {
            example,
            iteration,
            theory: Theory::single(prev.clone()).render(),
            score: s_prev.total,
            nll: s_prev.nll,
            distance: s_prev.distance,
            previous_score,
            queries,
            accepted,
            budget_exhausted: step.budget_exhausted,
        };
        teacher.on_trace(&trace);
        traces.push(trace);
        if !accepted {
            break;
        }
    }
    let next_id = session.next_id();
    Ok(ClauseRun { clause: prev, traces, exchanges: session.log, initial, next_id })
}

/// Runs the loop on a single positive example.
pub fn run_goci(
    x: &GroundExample,
    domain: &Domain,
    lib: &ConstraintLibrary,
    cfg: &LoopConfig,
    teacher: &mut dyn Teacher,
) -> Result<InductionResult> {
    induce(std::slice::from_ref(x), &[], domain, lib, cfg, teacher)
}

/// Induces one clause per positive example (each against its own positive
/// and the shared negatives) and merges them into a disjunctive theory.
/// Clauses equal up to variable renaming are merged.
pub fn induce(
    pos: &[GroundExample],
    neg: &[GroundExample],
    domain: &Domain,
    lib: &ConstraintLibrary,
    cfg: &LoopConfig,
    teacher: &mut dyn Teacher,
) -> Result<InductionResult> {
    cfg.validate()?;
    if pos.is_empty() {
        return Err(Error::InvalidParameter("at least one positive example is required".into()));
    }
    let registry = lib.registry();
    let mut silent = Silent;
    let teacher: &mut dyn Teacher = if cfg.use_advice { teacher } else { &mut silent };
    let mut clauses: Vec<Clause> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut traces = Vec::new();
    let mut exchanges = Vec::new();
    let mut initial = 0.0;
    let mut next_id = 1;
    for (i, x) in pos.iter().enumerate() {
        let run = induce_clause(i, x, neg, domain, &registry, lib, cfg, teacher, next_id)?;
        next_id = run.next_id;
        initial += run.initial;
        if seen.insert(run.clause.normalize_vars()) {
            clauses.push(run.clause);
        }
        traces.extend(run.traces);
        exchanges.extend(run.exchanges);
    }
    let theory = Theory::new(clauses)?;
    let score = theory_score(&theory, pos, neg, domain, &registry, cfg);
    teacher.on_done(&theory);
    Ok(InductionResult { theory, traces, exchanges, score, initial_score: initial })
}

/// Summed −LL over the training set plus, when the distance is enabled,
/// the mean conceptual distance to the positives.
pub fn theory_score(
    t: &Theory,
    pos: &[GroundExample],
    neg: &[GroundExample],
    domain: &Domain,
    registry: &BuiltinRegistry,
    cfg: &LoopConfig,
) -> Score {
    let nll = neg_log_likelihood(t, pos, neg, &cfg.search, registry);
    let distance = cfg.use_distance.then(|| {
        let sum: f64 = pos.iter().map(|x| crate::distance::conceptual_distance(t, x, domain, registry).ncd).sum();
        sum / pos.len() as f64
    });
    Score { total: nll + distance.unwrap_or(0.0), nll, distance }
}

/// `covered positives / (covered positives + covered negatives)`; a theory
/// that covers nothing has precision 1 by convention.
pub fn evaluate_precision(t: &Theory, pos: &[GroundExample], neg: &[GroundExample], registry: &BuiltinRegistry) -> f64 {
    let covered = |x: &GroundExample| {
        t.clauses
            .iter()
            .any(|c| matches!(covers_clause(c, x, registry, crate::logic::DEFAULT_NODE_BUDGET), Ok(Some(_))))
    };
    let tp = pos.iter().filter(|x| covered(x)).count();
    let fp = neg.iter().filter(|x| covered(x)).count();
    if tp + fp == 0 {
        log::debug!("theory covers no evaluation example; precision defined as 1");
        return 1.0;
    }
    tp as f64 / (tp + fp) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::advice::ScriptedOracle;
    use crate::distance::conceptual_distance;
    use crate::domain::parse_domain;
    use crate::logic::parse::{parse_example, parse_theory};

    fn setup() -> (Domain, GroundExample, Theory) {
        (
            parse_domain(include_str!("../data/blocks.dom")).unwrap(),
            parse_example(include_str!("../data/lshape.facts")).unwrap(),
            parse_theory(include_str!("../data/lshape_truth.thy")).unwrap(),
        )
    }

    #[test]
    fn recovers_the_lshape() {
        let (d, x, truth) = setup();
        let lib = ConstraintLibrary::default();
        let mut oracle = ScriptedOracle::new(truth);
        let r = run_goci(&x, &d, &lib, &LoopConfig::default(), &mut oracle).unwrap();
        let reg = lib.registry();
        assert!(crate::logic::covers(&r.theory, &x, &reg).unwrap().covered);
        let dist = conceptual_distance(&r.theory, &x, &d, &reg);
        assert!(dist.ncd <= 0.15, "{dist:?}\n{}", r.theory);
        for t in r.traces.iter().filter(|t| t.accepted) {
            assert!(t.score < t.previous_score);
        }
        assert!(r.queries() >= 1 && r.queries() <= 10);
    }

    #[test]
    fn one_iteration_bound() {
        let (d, x, _) = setup();
        let cfg = LoopConfig { max_iterations: 1, ..LoopConfig::for_arm(Arm::IlpScore) };
        let r = run_goci(&x, &d, &ConstraintLibrary::default(), &cfg, &mut Silent).unwrap();
        assert_eq!(r.traces.len(), 1);
    }

    #[test]
    fn precision_conventions() {
        let (_, x, truth) = setup();
        let reg = BuiltinRegistry::default();
        let nothing = parse_theory("L(S) :- Cube(S).").unwrap();
        assert_eq!(evaluate_precision(&nothing, std::slice::from_ref(&x), std::slice::from_ref(&x), &reg), 1.0);
        let all = parse_theory("L(S).").unwrap();
        let pos = vec![x.clone(); 10];
        let neg = vec![x.clone(); 10];
        assert_eq!(evaluate_precision(&all, &pos, &neg, &reg), 0.5);
        assert_eq!(evaluate_precision(&truth, &pos, &[], &reg), 1.0);
    }

    #[test]
    fn arm_names_round_trip() {
        for a in Arm::ALL {
            assert_eq!(a.name().parse::<Arm>().unwrap(), a);
        }
    }
}
