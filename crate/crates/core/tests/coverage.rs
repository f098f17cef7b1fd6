mod common;

use goci::logic::{covers, BuiltinRegistry, Theory};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn matcher_agrees_with_brute_force() {
    let registry = BuiltinRegistry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut covered = 0;
    for i in 0..500 {
        let (c, x) = common::random_instance(&mut rng);
        let expected = common::covers_exhaustive(&c, &x);
        let got = covers(&Theory::single(c.clone()), &x, &registry).unwrap();
        assert_eq!(got.covered, expected, "instance {i}: {c}\n{}", x.render());
        if let Some(w) = got.witness {
            // the witness really grounds the clause into the example
            for l in &c.body {
                let g = w.apply_literal(l);
                assert!(registry.is_builtin(&g) || x.facts.contains(&g), "{g}");
            }
        }
        covered += usize::from(expected);
    }
    // the generator exercises both outcomes
    assert!(covered > 50 && covered < 450, "{covered} of 500 covered");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matcher_agrees_on_arbitrary_seeds(seed in any::<u64>()) {
        let (c, x) = common::random_instance(&mut ChaCha8Rng::seed_from_u64(seed));
        let got = covers(&Theory::single(c.clone()), &x, &BuiltinRegistry::default()).unwrap().covered;
        prop_assert_eq!(got, common::covers_exhaustive(&c, &x));
    }

    #[test]
    fn adding_a_literal_never_widens_coverage(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, x) = common::random_instance(&mut rng);
        let (d, _) = common::random_instance(&mut rng);
        let mut body = c.body.clone();
        body.extend(d.body.iter().filter(|l| l.pred != "Equal" && l.pred != "Greater" && l.pred != "Sub").cloned());
        let narrower = goci::logic::Clause::new(c.head.clone(), body);
        let r = BuiltinRegistry::default();
        let wide = covers(&Theory::single(c), &x, &r).unwrap().covered;
        let narrow = covers(&Theory::single(narrower), &x, &r).unwrap().covered;
        prop_assert!(!narrow || wide);
    }
}
