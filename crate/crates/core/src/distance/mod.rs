//! Normalized compression distance between plans, and the conceptual
//! distance between a theory and the example it was induced from.

pub mod lzss;

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::logic::builtin::BuiltinRegistry;
use crate::logic::parse::GroundExample;
use crate::logic::term::{Clause, Theory};
use crate::plan::{clause_plan, example_plan, PlanString};

/// Tolerance for compressor imperfection: distances live in `[0, 1 + EPSILON_C]`.
pub const EPSILON_C: f64 = 0.15;

/// Distance reported for theories that cannot be grounded or planned.
pub const SENTINEL: f64 = 1.0 + EPSILON_C;

/// Anything that reports a compressed size.
pub trait Compressor {
    fn compressed_size(&self, data: &[u8]) -> usize;
}

/// The bundled LZSS codec.
#[derive(Clone, Copy, Debug, Default)]
pub struct Lzss;

impl Compressor for Lzss {
    fn compressed_size(&self, data: &[u8]) -> usize {
        lzss::compress(data).len()
    }
}

/// Compressed size of `data` under the bundled codec.
pub fn compress(data: &[u8]) -> usize {
    Lzss.compressed_size(data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub ncd: f64,
    /// Compressed sizes of the theory plan, the example plan and their concatenation.
    pub c_t: usize,
    pub c_x: usize,
    pub c_tx: usize,
    pub plan_len_t: usize,
    pub plan_len_x: usize,
    /// Why the sentinel was used, if it was.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl DistanceReport {
    pub fn sentinel(reason: impl Into<String>) -> Self {
        DistanceReport {
            ncd: SENTINEL,
            c_t: 0,
            c_x: 0,
            c_tx: 0,
            plan_len_t: 0,
            plan_len_x: 0,
            failure: Some(reason.into()),
        }
    }

    fn zero() -> Self {
        DistanceReport { ncd: 0.0, c_t: 0, c_x: 0, c_tx: 0, plan_len_t: 0, plan_len_x: 0, failure: None }
    }

    /// One-line rendering used by the CLI.
    pub fn summary(&self) -> String {
        match &self.failure {
            Some(f) => format!("ncd={:.6} (sentinel: {f})", self.ncd),
            None => format!(
                "ncd={:.6} c_t={} c_x={} c_tx={} len_t={} len_x={}",
                self.ncd, self.c_t, self.c_x, self.c_tx, self.plan_len_t, self.plan_len_x
            ),
        }
    }
}

fn concat(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut ab = Vec::with_capacity(a.len() + b.len() + 1);
    ab.extend_from_slice(a);
    ab.push(b'\n');
    ab.extend_from_slice(b);
    ab
}

/// `(C(a∥b) − min(C(a), C(b))) / max(C(a), C(b))` with the given compressor,
/// where the joint size is the smaller of the two concatenation orders so
/// that the distance is symmetric.
pub fn ncd_with(c: &impl Compressor, a: &[u8], b: &[u8]) -> Result<DistanceReport> {
    if a.is_empty() && b.is_empty() {
        return Err(Error::EmptyPlans);
    }
    let (ca, cb) = (c.compressed_size(a), c.compressed_size(b));
    let cab = c.compressed_size(&concat(a, b)).min(c.compressed_size(&concat(b, a)));
    Ok(report(ca, cb, cab, a.len(), b.len()))
}

fn report(ca: usize, cb: usize, cab: usize, la: usize, lb: usize) -> DistanceReport {
    let (lo, hi) = (ca.min(cb) as f64, ca.max(cb) as f64);
    let ncd = if hi == 0.0 { 0.0 } else { (cab as f64 - lo) / hi };
    DistanceReport { ncd, c_t: ca, c_x: cb, c_tx: cab, plan_len_t: la, plan_len_x: lb, failure: None }
}

/// NCD between two plans under the bundled compressor.
pub fn ncd(a: &PlanString, b: &PlanString) -> Result<DistanceReport> {
    ncd_with(&Lzss, a.as_bytes(), b.as_bytes())
}

/// Conceptual distance of theory `t` from example `x`: the smallest NCD
/// between a clause's grounded plan and the example's plan. Clauses that
/// fail to ground score the sentinel; two empty plans are identical.
pub fn conceptual_distance(
    t: &Theory,
    x: &GroundExample,
    domain: &Domain,
    registry: &BuiltinRegistry,
) -> DistanceReport {
    match DistanceContext::new(x, domain, registry) {
        Ok(ctx) => ctx.theory_distance(t),
        Err(e) => DistanceReport::sentinel(e.to_string()),
    }
}

/// Per-example distance evaluator with the example plan precomputed and a
/// memo of clause distances. Safe to share across threads.
pub struct DistanceContext<'a> {
    pub x: &'a GroundExample,
    pub domain: &'a Domain,
    pub registry: &'a BuiltinRegistry,
    x_plan: PlanString,
    c_x: usize,
    memo: Mutex<HashMap<Clause, DistanceReport>>,
}

impl<'a> DistanceContext<'a> {
    pub fn new(x: &'a GroundExample, domain: &'a Domain, registry: &'a BuiltinRegistry) -> Result<Self> {
        let x_plan = example_plan(x, domain, registry)?;
        let c_x = compress(x_plan.as_bytes());
        Ok(DistanceContext { x, domain, registry, x_plan, c_x, memo: Mutex::new(HashMap::new()) })
    }

    pub fn example_plan(&self) -> &PlanString {
        &self.x_plan
    }

    pub fn clause_distance(&self, c: &Clause) -> DistanceReport {
        let key = c.normalize_vars();
        if let Some(r) = self.memo.lock().expect("memo lock").get(&key) {
            return r.clone();
        }
        let r = match clause_plan(c, self.x, self.domain, self.registry) {
            Err(e) => DistanceReport::sentinel(e.to_string()),
            Ok(p) if p.is_empty() && self.x_plan.is_empty() => DistanceReport::zero(),
            Ok(p) => {
                let ct = compress(p.as_bytes());
                let ctx = compress(&concat(p.as_bytes(), self.x_plan.as_bytes()));
                report(ct, self.c_x, ctx, p.len(), self.x_plan.len())
            }
        };
        self.memo.lock().expect("memo lock").insert(key, r.clone());
        r
    }

    pub fn theory_distance(&self, t: &Theory) -> DistanceReport {
        t.clauses
            .iter()
            .map(|c| self.clause_distance(c))
            .min_by(|a, b| a.ncd.total_cmp(&b.ncd))
            .unwrap_or_else(|| DistanceReport::sentinel("empty theory"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::parse_domain;
    use crate::logic::parse::{parse_example, parse_theory};

    struct Stub;

    impl Compressor for Stub {
        fn compressed_size(&self, data: &[u8]) -> usize {
            match data {
                b"t" => 10,
                b"x" => 12,
                _ => 15,
            }
        }
    }

    #[test]
    fn formula_with_stub_sizes() {
        let r = ncd_with(&Stub, b"t", b"x").unwrap();
        assert!((r.ncd - 5.0 / 12.0).abs() < 1e-12);
        assert_eq!((r.c_t, r.c_x, r.c_tx), (10, 12, 15));
    }

    #[test]
    fn both_empty_is_an_error() {
        assert!(matches!(ncd_with(&Lzss, b"", b""), Err(Error::EmptyPlans)));
    }

    #[test]
    fn truth_is_near_zero_and_failures_are_sentinels() {
        let d = parse_domain(include_str!("../../data/blocks.dom")).unwrap();
        let x = parse_example(include_str!("../../data/lshape.facts")).unwrap();
        let r = BuiltinRegistry::default();
        let t = parse_theory(include_str!("../../data/lshape_truth.thy")).unwrap();
        let rep = conceptual_distance(&t, &x, &d, &r);
        assert!(rep.ncd <= EPSILON_C, "{rep:?}");
        let bad = parse_theory("L(S) :- Tower(B).").unwrap();
        assert_eq!(conceptual_distance(&bad, &x, &d, &r).ncd, SENTINEL);
        let empty = parse_theory("L(S).").unwrap();
        let rep = conceptual_distance(&empty, &x, &d, &r);
        assert!(rep.ncd > 0.9 && rep.ncd <= SENTINEL, "{rep:?}");
    }
}
