//! Synthetic blocks-world concepts: positives sampled from a reference
//! theory, negatives made by perturbing positives.

pub mod harness;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::logic::builtin::BuiltinRegistry;
use crate::logic::covers;
use crate::logic::parse::{parse_theory, GroundExample};
use crate::logic::term::{Clause, Literal, Substitution, Term, Theory};
use crate::plan::{is_param_literal, propagate};

pub use harness::{run_benchmark, summarize, BenchmarkReport, BenchmarkSpec, RunOutcome, RunRecord, SummaryRow};

/// A concept family: its reference theory and the ranges its parameters are
/// drawn from (inclusive).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub name: &'static str,
    pub truth: &'static str,
    pub ranges: &'static [(&'static str, i64, i64)],
}

impl Family {
    pub fn theory(&self) -> Theory {
        parse_theory(self.truth).expect("bundled family theory parses")
    }
}

const HB: (&str, i64, i64) = ("base", 3, 7);
const HH: (&str, i64, i64) = ("height", 3, 7);
const HS: (&str, i64, i64) = ("span", 3, 7);

/// The ten bundled concept families.
pub const FAMILIES: [Family; 10] = [
    Family {
        name: "L",
        truth: "L(S) :- Height(S, Hs), Base(S, Ws), Contains(S, A), Contains(S, B), Row(A), Tower(B), Width(A, Wa), \
                Height(B, Hb), Equal(Ws, Wa), Sub(Hb, Hs, 1), SpRel(B, A, \"NWTop\").",
        ranges: &[HB, HH],
    },
    Family {
        name: "J",
        truth: "J(S) :- Height(S, Hs), Base(S, Ws), Contains(S, A), Contains(S, B), Row(A), Tower(B), Width(A, Wa), \
                Height(B, Hb), Equal(Ws, Wa), Sub(Hb, Hs, 1), SpRel(B, A, \"NETop\").",
        ranges: &[HB, HH],
    },
    Family {
        name: "Tee",
        truth: "Tee(S) :- Height(S, Hs), Base(S, Ws), Contains(S, A), Contains(S, B), Row(A), Tower(B), \
                Width(A, Wa), Height(B, Hb), Equal(Ws, Wa), Sub(Hb, Hs, 1), SpRel(B, A, \"MidTop\").",
        ranges: &[HB, HH],
    },
    Family {
        name: "Pillar",
        truth: "Pillar(S) :- Height(S, Hs), Base(S, Ws), Contains(S, A), Contains(S, B), Row(A), Tower(B), \
                Width(A, Wa), Height(B, Hb), Equal(Ws, Wa), Equal(Hs, Hb), SpRel(A, B, \"Below\").",
        ranges: &[HB, HH],
    },
    Family {
        name: "Arch",
        truth: "Arch(S) :- Height(S, Hs), Span(S, Sp), Contains(S, B), Contains(S, C), Contains(S, D), Tower(B), \
                Tower(C), Beam(D), Height(B, Hb), Height(C, Hc), Length(D, Ld), Sub(Hb, Hs, 1), Equal(Hb, Hc), \
                Equal(Sp, Ld), SpRel(B, C, \"W\"), SpRel(D, B, \"On\").",
        ranges: &[HH, HS],
    },
    Family {
        name: "Bridge",
        truth: "Bridge(S) :- Base(S, Ws), Span(S, Sp), Contains(S, A), Contains(S, B), Contains(S, D), Row(A), \
                Row(B), Beam(D), Width(A, Wa), Width(B, Wb), Length(D, Ld), Equal(Ws, Wa), Sub(Wb, Ws, 1), \
                Equal(Sp, Ld), SpRel(A, B, \"W\"), SpRel(D, A, \"On\").",
        ranges: &[HB, HS],
    },
    Family {
        name: "Stair",
        truth: "Stair(S) :- Height(S, Hs), Contains(S, B), Contains(S, C), Contains(S, D), Tower(B), Tower(C), \
                Tower(D), Height(B, Hb), Height(C, Hc), Height(D, Hd), Equal(Hs, Hb), Sub(Hc, Hb, 1), \
                Sub(Hd, Hc, 1), SpRel(B, C, \"W\"), SpRel(C, D, \"W\").",
        ranges: &[("height", 4, 8)],
    },
    Family {
        name: "U",
        truth: "U(S) :- Height(S, Hs), Base(S, Ws), Contains(S, A), Contains(S, B), Contains(S, C), Row(A), \
                Tower(B), Tower(C), Width(A, Wa), Height(B, Hb), Height(C, Hc), Equal(Ws, Wa), Sub(Hb, Hs, 1), \
                Sub(Hc, Hs, 1), SpRel(B, A, \"NWTop\"), SpRel(C, A, \"NETop\").",
        ranges: &[HB, HH],
    },
    Family {
        name: "Wall",
        truth: "Wall(S) :- Base(S, Ws), Contains(S, A), Contains(S, B), Row(A), Row(B), Width(A, Wa), \
                Width(B, Wb), Equal(Ws, Wa), Equal(Ws, Wb), SpRel(B, A, \"On\").",
        ranges: &[HB],
    },
    Family {
        name: "Pedestal",
        truth: "Pedestal(S) :- Base(S, Ws), Height(S, Hs), Contains(S, A), Contains(S, B), Contains(S, C), Row(A), \
                Tower(B), Beam(C), Width(A, Wa), Height(B, Hb), Length(C, Lc), Equal(Ws, Wa), Sub(Hb, Hs, 2), \
                Equal(Ws, Lc), SpRel(B, A, \"MidTop\"), SpRel(C, B, \"On\").",
        ranges: &[HB, ("height", 4, 8)],
    },
];

pub fn family(name: &str) -> Result<&'static Family> {
    FAMILIES
        .iter()
        .find(|f| f.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::InvalidParameter(format!("unknown concept family '{name}'")))
}

/// Spatial-relation constants a flipped relation may take.
pub const DIRECTIONS: [&str; 12] =
    ["NWTop", "NETop", "MidTop", "WTop", "ETop", "W", "E", "On", "Below", "Mid", "Left", "Right"];

/// How a negative is derived from a positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Perturbation {
    /// Replace the constant of one spatial relation.
    FlipRelation,
    /// Change one size by ±1.
    OffByOne,
    /// Remove one containment fact.
    DropContainment,
}

impl Perturbation {
    pub const ALL: [Perturbation; 3] =
        [Perturbation::FlipRelation, Perturbation::OffByOne, Perturbation::DropContainment];
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Perturbation::FlipRelation => "flip",
            Perturbation::OffByOne => "off-by-one",
            Perturbation::DropContainment => "drop",
        })
    }
}

impl FromStr for Perturbation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flip" => Ok(Perturbation::FlipRelation),
            "off-by-one" | "offbyone" => Ok(Perturbation::OffByOne),
            "drop" => Ok(Perturbation::DropContainment),
            _ => Err(Error::InvalidParameter(format!("unknown perturbation '{s}'"))),
        }
    }
}

/// Grounds `c` for the given parameter values: the head on `id`, object
/// variables on their lowercased names, integers by propagating the
/// built-ins from the parameters. Every integer must be determined.
pub fn instantiate(
    c: &Clause,
    id: &str,
    params: &BTreeMap<String, i64>,
    domain: &Domain,
    registry: &BuiltinRegistry,
) -> Result<GroundExample> {
    let head_var =
        c.head.args.first().and_then(Term::as_var).ok_or_else(|| {
            Error::InvalidParameter(format!("reference clause head {} must take one variable", c.head))
        })?;
    let mut s = Substitution::new();
    s.bind(head_var.to_string(), Term::str(id));
    let head_vars = c.head_vars();
    let (builtins, ordinary): (Vec<&Literal>, Vec<&Literal>) = c.body.iter().partition(|l| registry.is_builtin(l));
    let mut used = BTreeMap::new();
    for l in &ordinary {
        if is_param_literal(l, &head_vars, domain) {
            let name = domain.param_name(&l.pred).expect("param literal");
            let value =
                *params.get(name).ok_or_else(|| Error::InvalidParameter(format!("no value for parameter {name}")))?;
            if let Term::Var(v) = &l.args[1] {
                s.bind(v.clone(), Term::Int(value));
            }
            used.insert(name.to_string(), value);
            continue;
        }
        for (i, a) in l.args.iter().enumerate() {
            if let Term::Var(v) = a {
                if domain.arg_type(&l.pred, i) == Some("obj") && s.get(v).is_none() {
                    s.bind(v.clone(), Term::str(v.to_lowercase()));
                }
            }
        }
    }
    propagate(&builtins, &mut s, registry)?;
    if let Some(v) = c.vars().into_iter().find(|v| s.get(v).is_none()) {
        return Err(Error::Grounding(format!("variable {v} is not determined by the parameters")));
    }
    let mut x = GroundExample::new(s.apply_literal(&c.head));
    x.params = used;
    x.facts = ordinary.iter().map(|l| s.apply_literal(l)).collect();
    Ok(x)
}

/// Draws parameter values uniformly from the family's ranges.
pub fn sample_params(f: &Family, rng: &mut impl Rng) -> BTreeMap<String, i64> {
    f.ranges.iter().map(|(n, lo, hi)| (n.to_string(), rng.gen_range(*lo..=*hi))).collect()
}

/// A positive example of `f` with freshly drawn parameters.
pub fn sample_positive(
    f: &Family,
    domain: &Domain,
    registry: &BuiltinRegistry,
    rng: &mut impl Rng,
) -> Result<GroundExample> {
    let t = f.theory();
    let params = sample_params(f, rng);
    instantiate(&t.clauses[0], "s1", &params, domain, registry)
}

/// Applies one perturbation of the given kind, choosing the fact at random.
/// Returns `None` when the example has nothing to perturb.
pub fn perturb(x: &GroundExample, kind: Perturbation, rng: &mut impl Rng) -> Option<GroundExample> {
    let pick = |pred: Option<&str>, rng: &mut dyn rand::RngCore| -> Option<Literal> {
        let cands: Vec<&Literal> = x
            .facts
            .iter()
            .filter(|l| match pred {
                Some(p) => l.pred == p,
                None => l.args.iter().any(|a| a.as_int().is_some()),
            })
            .collect();
        cands.choose(rng).map(|l| (*l).clone())
    };
    let mut y = x.clone();
    match kind {
        Perturbation::FlipRelation => {
            let l = pick(Some("SpRel"), rng)?;
            let pos = l.args.iter().position(|a| matches!(a, Term::Str(s) if DIRECTIONS.contains(&s.as_str())))?;
            let others: Vec<&&str> = DIRECTIONS.iter().filter(|d| Term::str(**d) != l.args[pos]).collect();
            let mut flipped = l.clone();
            flipped.args[pos] = Term::str(**others.choose(rng)?);
            y.facts.remove(&l);
            y.facts.insert(flipped);
        }
        Perturbation::OffByOne => {
            let l = pick(None, rng)?;
            let pos = l.args.iter().position(|a| a.as_int().is_some())?;
            let n = l.args[pos].as_int()?;
            let m = if n <= 1 || rng.gen_bool(0.5) { n + 1 } else { n - 1 };
            let mut changed = l.clone();
            changed.args[pos] = Term::Int(m);
            // keep the parameter table in step with its fact
            for (name, v) in y.params.iter_mut() {
                if *v == n && Some(&l.args[0]) == x.id() && param_pred_matches(&l.pred, name) {
                    *v = m;
                }
            }
            y.facts.remove(&l);
            y.facts.insert(changed);
        }
        Perturbation::DropContainment => {
            let l = pick(Some("Contains"), rng)?;
            y.facts.remove(&l);
        }
    }
    Some(y)
}

fn param_pred_matches(pred: &str, name: &str) -> bool {
    pred.eq_ignore_ascii_case(name)
}

/// A perturbation of `x` of kind `kind` (falling back to the other kinds)
/// that `truth` does not cover.
pub fn make_negative(
    x: &GroundExample,
    kind: Perturbation,
    truth: &Theory,
    registry: &BuiltinRegistry,
    rng: &mut impl Rng,
) -> Option<GroundExample> {
    let start = Perturbation::ALL.iter().position(|k| *k == kind).unwrap_or(0);
    for step in 0..Perturbation::ALL.len() {
        let k = Perturbation::ALL[(start + step) % Perturbation::ALL.len()];
        for _ in 0..8 {
            let Some(y) = perturb(x, k, rng) else { break };
            if y != *x && !covers(truth, &y, registry).map(|c| c.covered).unwrap_or(true) {
                return Some(y);
            }
        }
    }
    None
}

/// Training and evaluation data for one family and seed.
#[derive(Clone, Debug, PartialEq)]
pub struct ConceptData {
    pub family: &'static Family,
    pub truth: Theory,
    /// Training positives; a run at sample size `n` uses the first `n`.
    pub train_pos: Vec<GroundExample>,
    /// Training negatives; a run at sample size `n` uses the first `n − 1`.
    pub train_neg: Vec<GroundExample>,
    pub eval_pos: Vec<GroundExample>,
    pub eval_neg: Vec<GroundExample>,
}

impl ConceptData {
    /// The training set at sample size `n`.
    pub fn training(&self, n: usize) -> (&[GroundExample], &[GroundExample]) {
        let n = n.clamp(1, self.train_pos.len());
        (&self.train_pos[..n], &self.train_neg[..(n - 1).min(self.train_neg.len())])
    }
}

/// Generates the data for `f`: `max_n` training positives, `max_n − 1`
/// training negatives of random kinds, and held-out positives and negatives
/// (negative kinds taken round-robin from `kinds`).
#[allow(clippy::too_many_arguments)]
pub fn generate(
    f: &'static Family,
    max_n: usize,
    eval_pos: usize,
    eval_neg: usize,
    kinds: &[Perturbation],
    domain: &Domain,
    registry: &BuiltinRegistry,
    rng: &mut impl Rng,
) -> Result<ConceptData> {
    if kinds.is_empty() {
        return Err(Error::InvalidParameter("at least one perturbation kind is required".into()));
    }
    let truth = f.theory();
    let positives = |count: usize, rng: &mut _| -> Result<Vec<GroundExample>> {
        (0..count).map(|_| sample_positive(f, domain, registry, rng)).collect()
    };
    let train_pos = positives(max_n.max(1), rng)?;
    let eval_pos_v = positives(eval_pos, rng)?;
    let negatives = |count: usize, random_kind: bool, rng: &mut _| -> Result<Vec<GroundExample>> {
        let mut out = Vec::with_capacity(count);
        let mut tries = 0;
        while out.len() < count {
            tries += 1;
            if tries > 50 * (count + 1) {
                return Err(Error::InvalidParameter(format!("cannot perturb {} into negatives", f.name)));
            }
            let base = sample_positive(f, domain, registry, rng)?;
            let kind =
                if random_kind { *kinds.choose(rng).expect("non-empty") } else { kinds[out.len() % kinds.len()] };
            if let Some(y) = make_negative(&base, kind, &truth, registry, rng) {
                out.push(y);
            }
        }
        Ok(out)
    };
    let train_neg = negatives(max_n.saturating_sub(1), true, rng)?;
    let eval_neg_v = negatives(eval_neg, false, rng)?;
    Ok(ConceptData { family: f, truth, train_pos, train_neg, eval_pos: eval_pos_v, eval_neg: eval_neg_v })
}
