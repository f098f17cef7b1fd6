//! Clause scoring and one beam-search step over refinements.

pub mod refine;

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::DistanceContext;
use crate::domain::Bounds;
use crate::logic::builtin::BuiltinRegistry;
use crate::logic::cover::{covers_clause, DEFAULT_NODE_BUDGET};
use crate::logic::parse::GroundExample;
use crate::logic::term::{Clause, Literal, Theory};

pub use refine::{
    bottom_clause, refinements, refinements_tagged, variable_depths, variable_types, within_bounds, Operator,
    RefineContext,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub beam_width: usize,
    /// Depth, arity and body-length bounds; `None` uses the domain's.
    pub bounds: Option<Bounds>,
    /// Maximum number of candidate clauses scored in one search step.
    pub node_budget: usize,
    /// Binding budget of each coverage test.
    pub cover_budget: usize,
    pub kappa_miss: f64,
    pub kappa_len: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            beam_width: 8,
            bounds: None,
            node_budget: 200_000,
            cover_budget: DEFAULT_NODE_BUDGET,
            kappa_miss: 10.0,
            kappa_len: 0.01,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.beam_width == 0 {
            return Err(crate::Error::InvalidParameter("beam width must be at least 1".into()));
        }
        if !(self.kappa_miss >= 0.0 && self.kappa_len >= 0.0) {
            return Err(crate::Error::InvalidParameter("weights must be non-negative".into()));
        }
        Ok(())
    }
}

fn covered(c: &Clause, x: &GroundExample, registry: &BuiltinRegistry, budget: usize) -> bool {
    // exceeding the budget counts as not covered
    matches!(covers_clause(c, x, registry, budget), Ok(Some(_)))
}

/// `κ_miss·(uncovered-positive fraction + covered-negative fraction) + κ_len·|body|`.
/// A theory covers an example when any of its clauses does.
pub fn neg_log_likelihood(
    t: &Theory,
    pos: &[GroundExample],
    neg: &[GroundExample],
    cfg: &SearchConfig,
    registry: &BuiltinRegistry,
) -> f64 {
    let covers = |x: &GroundExample| t.clauses.iter().any(|c| covered(c, x, registry, cfg.cover_budget));
    let miss = if pos.is_empty() { 0.0 } else { pos.iter().filter(|x| !covers(x)).count() as f64 / pos.len() as f64 };
    let false_pos =
        if neg.is_empty() { 0.0 } else { neg.iter().filter(|x| covers(x)).count() as f64 / neg.len() as f64 };
    cfg.kappa_miss * (miss + false_pos) + cfg.kappa_len * t.body_len() as f64
}

/// Score of a candidate: `−LL` plus, when enabled, the conceptual distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub total: f64,
    pub nll: f64,
    pub distance: Option<f64>,
}

pub trait ClauseScorer: Sync {
    fn score(&self, c: &Clause) -> Score;
}

/// Scores clauses against one positive example (plus shared negatives),
/// optionally adding the conceptual distance to that positive.
pub struct ExampleScorer<'a> {
    pub pos: &'a [GroundExample],
    pub neg: &'a [GroundExample],
    pub registry: &'a BuiltinRegistry,
    pub cfg: &'a SearchConfig,
    pub distance: Option<&'a DistanceContext<'a>>,
    memo: Mutex<HashMap<Clause, Score>>,
}

impl<'a> ExampleScorer<'a> {
    pub fn new(
        pos: &'a [GroundExample],
        neg: &'a [GroundExample],
        registry: &'a BuiltinRegistry,
        cfg: &'a SearchConfig,
        distance: Option<&'a DistanceContext<'a>>,
    ) -> Self {
        ExampleScorer { pos, neg, registry, cfg, distance, memo: Mutex::new(HashMap::new()) }
    }
}

impl ClauseScorer for ExampleScorer<'_> {
    fn score(&self, c: &Clause) -> Score {
        if let Some(s) = self.memo.lock().expect("memo lock").get(c) {
            return *s;
        }
        let t = Theory::single(c.clone());
        let nll = neg_log_likelihood(&t, self.pos, self.neg, self.cfg, self.registry);
        let distance = self.distance.map(|d| d.clause_distance(c).ncd);
        let s = Score { total: nll + distance.unwrap_or(0.0), nll, distance };
        self.memo.lock().expect("memo lock").insert(c.clone(), s);
        s
    }
}

/// Result of one search step.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchOutcome {
    pub clause: Clause,
    pub score: Score,
    /// The node budget ran out before the search settled.
    pub budget_exhausted: bool,
    pub evaluated: usize,
    pub improved: bool,
}

fn rank(a: &(Clause, Score), b: &(Clause, Score)) -> std::cmp::Ordering {
    a.1.total
        .total_cmp(&b.1.total)
        .then(a.0.body.len().cmp(&b.0.body.len()))
        .then_with(|| a.0.to_string().cmp(&b.0.to_string()))
}

/// One beam-search step from `prev`. Each level expands the beam with
/// [`refinements`], scores all new children and keeps the best `W`; the
/// search stops at the first level whose best child does not strictly
/// improve on the best clause so far. Never returns a clause scoring worse
/// than `prev`. Ties break on fewer literals, then rendered text.
pub fn search_step(
    prev: &Clause,
    bottom: &Clause,
    preferred: &[Literal],
    ctx: &RefineContext<'_>,
    cfg: &SearchConfig,
    scorer: &dyn ClauseScorer,
) -> SearchOutcome {
    let start = scorer.score(prev);
    let mut best = (prev.clone(), start);
    let mut beam = vec![prev.clone()];
    let mut seen: BTreeSet<Clause> = BTreeSet::new();
    seen.insert(prev.clone().canonical());
    let mut evaluated = 0usize;
    let mut exhausted = false;
    loop {
        let mut children = Vec::new();
        for b in &beam {
            for c in refinements(b, bottom, preferred, ctx) {
                if seen.insert(c.clone()) {
                    children.push(c);
                }
            }
        }
        if children.is_empty() {
            break;
        }
        let room = cfg.node_budget.saturating_sub(evaluated);
        if children.len() > room {
            children.truncate(room);
            exhausted = true;
        }
        evaluated += children.len();
        let mut scored: Vec<(Clause, Score)> = children
            .into_par_iter()
            .map(|c| {
                let s = scorer.score(&c);
                (c, s)
            })
            .collect();
        scored.sort_by(rank);
        scored.truncate(cfg.beam_width);
        let Some(top) = scored.first() else { break };
        if top.1.total < best.1.total {
            best = top.clone();
            beam = scored.into_iter().map(|(c, _)| c).collect();
        } else {
            break;
        }
        if exhausted {
            break;
        }
    }
    let improved = best.1.total < start.total;
    SearchOutcome { clause: best.0, score: best.1, budget_exhausted: exhausted, evaluated, improved }
}
