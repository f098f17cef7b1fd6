use std::collections::BTreeSet;

use goci::advice::{AdviceSession, ConstraintLibrary};
use goci::assets::blocks_domain;
use goci::bench::{sample_positive, FAMILIES};
use goci::logic::{covers, parse_example, parse_theory, BuiltinRegistry, GroundExample, Theory};
use goci::pac::{hypothesis_space_size, sample_complexity, sample_complexity_ln, PacParams};
use goci::search::{bottom_clause, refinements, within_bounds, RefineContext};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn positive(family: usize, seed: u64) -> GroundExample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_positive(&FAMILIES[family], &blocks_domain(), &BuiltinRegistry::default(), &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn example_render_round_trips(family in 0..FAMILIES.len(), seed in any::<u64>()) {
        let x = positive(family, seed);
        let back = parse_example(&x.render()).unwrap();
        prop_assert_eq!(&back, &x);
        prop_assert_eq!(back.render(), x.render());
    }

    #[test]
    fn bottom_clause_covers_its_example(family in 0..FAMILIES.len(), seed in any::<u64>()) {
        let x = positive(family, seed);
        let domain = blocks_domain();
        let r = BuiltinRegistry::default();
        let bottom = bottom_clause(&x, &domain, &r).unwrap();
        prop_assert!(within_bounds(&bottom, &domain.bounds, &r));
        prop_assert!(covers(&Theory::single(bottom), &x, &r).unwrap().covered);
    }

    #[test]
    fn refinements_stay_within_bounds(family in 0..FAMILIES.len(), seed in any::<u64>(), depth in 1usize..4, max_body in 4usize..12) {
        let x = positive(family, seed);
        let mut domain = blocks_domain();
        let r = BuiltinRegistry::default();
        let bottom = bottom_clause(&x, &domain, &r).unwrap();
        domain.bounds.depth = depth;
        domain.bounds.max_body = max_body;
        let ctx = RefineContext { domain: &domain, registry: &r, bounds: domain.bounds, protected: BTreeSet::new() };
        let mut frontier = vec![bottom.clone()];
        for _ in 0..2 {
            let mut next = Vec::new();
            for c in frontier.iter().take(4) {
                for child in refinements(c, &bottom, &[], &ctx) {
                    prop_assert!(within_bounds(&child, &domain.bounds, &r), "{}", child);
                    prop_assert!(child.body.len() <= max_body);
                    next.push(child);
                }
            }
            frontier = next;
        }
    }

    #[test]
    fn advice_candidates_hold_on_the_example(family in 0..FAMILIES.len(), seed in any::<u64>(), k in 1usize..8) {
        let x = positive(family, seed);
        let domain = blocks_domain();
        let r = BuiltinRegistry::default();
        let bottom = bottom_clause(&x, &domain, &r).unwrap();
        let theta = covers(&Theory::single(bottom.clone()), &x, &r).unwrap().witness.unwrap();
        let lib = ConstraintLibrary::default();
        let session = AdviceSession::new(lib.clone(), k);
        let cands = session.candidates(&bottom, &theta, &domain);
        prop_assert!(cands.len() <= k);
        let lib_registry = lib.registry();
        for c in &cands {
            prop_assert!(!bottom.body.contains(c));
            let ground = theta.apply_literal(c);
            prop_assert!(lib_registry.eval(&ground).unwrap(), "{} is false under the witness", ground);
        }
    }

    #[test]
    fn truth_theories_round_trip(family in 0..FAMILIES.len()) {
        let t = FAMILIES[family].theory();
        prop_assert_eq!(parse_theory(&t.render()).unwrap(), t);
    }
}

fn params(eps: f64, delta: f64, d: f64, l: u32, m: u64) -> PacParams {
    PacParams { epsilon: eps, delta, d, iterations: l, m, ..PacParams::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sample_complexity_is_monotone(
        eps in 0.01f64..0.99, delta in 0.01f64..0.99, d in 1.0f64..4.0, l in 1u32..8,
        m in 1u64..50, h0 in 1.0f64..1e6, bump in 0.01f64..2.0,
    ) {
        let base = sample_complexity(&params(eps, delta, d, l, m), h0).unwrap();
        let up = |p: PacParams, h: f64| sample_complexity(&p, h).unwrap();
        prop_assert!(up(params(eps, delta, d + bump, l, m), h0) >= base);
        prop_assert!(up(params(eps, delta, d, l + 1, m), h0) >= base);
        prop_assert!(up(params(eps, delta, d, l, m + 1), h0) >= base);
        prop_assert!(up(params(eps, delta, d, l, m), h0 * (1.0 + bump)) >= base);
        prop_assert!(up(params(eps / (1.0 + bump), delta, d, l, m), h0) >= base);
        prop_assert!(up(params(eps, delta / (1.0 + bump), d, l, m), h0) >= base);
    }

    #[test]
    fn log_and_direct_forms_agree(t in 1u64..6, p in 1u64..6, m in 1u64..6, i in 1u32..3, j in 1u32..4) {
        let s = hypothesis_space_size(t, p, m, i, j).unwrap();
        let direct = ((t * p * m) as f64).powi((j as i32).pow(i));
        prop_assert!((s.value - direct).abs() <= 1e-9 * direct);
        let pp = PacParams { t, p, m, i, j, ..PacParams::default() };
        let a = sample_complexity(&pp, s.value).unwrap();
        let b = sample_complexity_ln(&pp, s.ln).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }
}
