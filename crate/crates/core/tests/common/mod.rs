//! Shared generators and reference implementations for the integration
//! tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use goci::logic::{eval_builtin, Clause, GroundExample, Literal, Substitution, Term};
use rand::seq::SliceRandom;
use rand::Rng;

/// A random coverage problem: a range-restricted clause over at most four
/// variables and an example over at most six constants.
pub fn random_instance(rng: &mut impl Rng) -> (Clause, GroundExample) {
    let strs = ["a", "b", "c", "d"];
    let n_str = rng.gen_range(1..=3);
    let n_int = rng.gen_range(1..=3);
    let mut consts: Vec<Term> = strs[..n_str].iter().map(|s| Term::str(*s)).collect();
    let ints: Vec<i64> = (1..=5).collect::<Vec<_>>().choose_multiple(rng, n_int).copied().collect();
    consts.extend(ints.iter().map(|&n| Term::Int(n)));
    debug_assert!(consts.len() <= 6);

    let id = consts[0].clone();
    let preds: [(&str, usize); 3] = [("P", 1), ("Q", 2), ("R", 2)];
    let mut facts = BTreeSet::new();
    for _ in 0..rng.gen_range(2..=9) {
        let (p, ar) = *preds.choose(rng).unwrap();
        let args = (0..ar).map(|_| consts.choose(rng).unwrap().clone()).collect();
        facts.insert(Literal::new(p, args));
    }
    let x = GroundExample::new(Literal::new("C", vec![id])).with_facts(facts);

    let vars: Vec<Term> = (0..rng.gen_range(1..=4)).map(|i| Term::var(format!("X{i}"))).collect();
    let head = Literal::new("C", vec![vars[0].clone()]);
    let mut body = Vec::new();
    let arg = |rng: &mut dyn rand::RngCore| -> Term {
        if rng.gen_bool(0.15) {
            consts.choose(rng).unwrap().clone()
        } else {
            vars.choose(rng).unwrap().clone()
        }
    };
    for _ in 0..rng.gen_range(1..=4) {
        let (p, ar) = *preds.choose(rng).unwrap();
        body.push(Literal::new(p, (0..ar).map(|_| arg(rng)).collect()));
    }
    // built-ins only over variables already bound by ordinary literals
    let mut bound: BTreeSet<String> = body.iter().flat_map(|l| l.vars().map(str::to_string)).collect();
    bound.insert("X0".into());
    let bound: Vec<String> = bound.into_iter().collect();
    if rng.gen_bool(0.4) {
        let a = Term::var(bound.choose(rng).unwrap());
        let b = Term::var(bound.choose(rng).unwrap());
        let lit = match rng.gen_range(0..3) {
            0 => Literal::new("Equal", vec![a, b]),
            1 => Literal::new("Greater", vec![a, b]),
            _ => Literal::new("Sub", vec![a, b, Term::Int(rng.gen_range(0..=3))]),
        };
        body.push(lit);
    }
    (Clause::new(head, body), x)
}

/// Coverage by brute force: try every assignment of the clause's variables
/// to terms of the example.
pub fn covers_exhaustive(c: &Clause, x: &GroundExample) -> bool {
    let mut universe: BTreeSet<Term> = x.head.args.iter().cloned().collect();
    for f in &x.facts {
        universe.extend(f.args.iter().cloned());
    }
    let universe: Vec<Term> = universe.into_iter().collect();
    let vars = c.vars();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let s = Substitution::from_map(vars.iter().cloned().zip(idx.iter().map(|&i| universe[i].clone())).collect());
        let head_ok = s.apply_literal(&c.head) == x.head;
        let body_ok = head_ok
            && c.body.iter().all(|l| {
                let g = s.apply_literal(l);
                match g.pred.as_str() {
                    "Equal" | "Greater" | "Sub" | "Geq" => eval_builtin(&g).unwrap_or(false),
                    _ => x.facts.contains(&g),
                }
            });
        if body_ok {
            return true;
        }
        // next assignment
        let mut k = 0;
        loop {
            if k == idx.len() {
                return false;
            }
            idx[k] += 1;
            if idx[k] < universe.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// `count` plans of at least `min_len` bytes derived from sampled
/// benchmark positives, cycling through the families.
pub fn generator_plans(count: usize, min_len: usize, seed: u64) -> Vec<goci::plan::PlanString> {
    use goci::bench::{sample_positive, FAMILIES};
    let domain = goci::assets::blocks_domain();
    let registry = goci::logic::BuiltinRegistry::default();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut i = 0;
    while out.len() < count {
        let f = &FAMILIES[i % FAMILIES.len()];
        i += 1;
        let x = sample_positive(f, &domain, &registry, &mut rng).unwrap();
        let p = goci::plan::example_plan(&x, &domain, &registry).unwrap();
        if p.len() >= min_len {
            out.push(p);
        }
        assert!(i < 100 * count, "generator rarely yields plans of {min_len} bytes");
    }
    out
}

/// Plans of a single tower and a single row, both of size `n`.
pub fn tower_and_row(n: i64) -> (goci::plan::PlanString, goci::plan::PlanString) {
    let domain = goci::assets::blocks_domain();
    let registry = goci::logic::BuiltinRegistry::default();
    let tower = goci::logic::parse_example(&format!("@concept T(t1).\nTower(b).\nHeight(b, {n}).\n")).unwrap();
    let row = goci::logic::parse_example(&format!("@concept R(r1).\nRow(a).\nWidth(a, {n}).\n")).unwrap();
    (
        goci::plan::example_plan(&tower, &domain, &registry).unwrap(),
        goci::plan::example_plan(&row, &domain, &registry).unwrap(),
    )
}

/// Compressor reporting fixed sizes: `a` for the first input seen, `b`
/// for the second, `ab` for anything longer than both.
pub struct StubCompressor {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub ab: usize,
}

impl goci::distance::Compressor for StubCompressor {
    fn compressed_size(&self, data: &[u8]) -> usize {
        match data.len() {
            n if n == self.a.0 => self.a.1,
            n if n == self.b.0 => self.b.1,
            _ => self.ab,
        }
    }
}
