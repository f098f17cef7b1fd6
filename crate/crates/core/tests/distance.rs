mod common;

use goci::distance::{ncd, ncd_with, Compressor, SENTINEL};
use goci::plan::PlanString;
use proptest::prelude::*;

#[test]
fn self_distance_is_small_for_generator_plans() {
    for p in common::generator_plans(100, 128, 11) {
        let d = ncd(&p, &p).unwrap().ncd;
        assert!(d <= 0.15, "NCD(x, x) = {d} for\n{p}");
    }
}

#[test]
fn distance_is_nearly_symmetric_and_bounded() {
    let plans = common::generator_plans(100, 128, 12);
    for (a, b) in plans.iter().zip(plans.iter().skip(1)) {
        let ab = ncd(a, b).unwrap().ncd;
        let ba = ncd(b, a).unwrap().ncd;
        assert!((0.0..=SENTINEL).contains(&ab));
        assert!((ab - ba).abs() <= 0.05, "{ab} vs {ba}");
    }
}

#[test]
fn towers_and_rows_are_far_apart() {
    let (tower, row) = common::tower_and_row(8);
    let d = ncd(&tower, &row).unwrap().ncd;
    assert!(d >= 0.3, "tower vs row: {d}");
}

#[test]
fn ncd_formula_with_fixed_sizes() {
    // sizes chosen by hand: (15 - min(10, 12)) / max(10, 12) = 5/12
    let stub = common::StubCompressor { a: (3, 10), b: (4, 12), ab: 15 };
    let r = ncd_with(&stub, b"aaa", b"bbbb").unwrap();
    assert!((r.ncd - 5.0 / 12.0).abs() < 1e-12);
    assert_eq!((r.c_t, r.c_x, r.c_tx), (10, 12, 15));
    assert_eq!(stub.compressed_size(b"aaa\nbbbb"), 15);
}

#[test]
fn both_plans_empty_is_an_error() {
    let e = PlanString::from(String::new());
    assert!(ncd(&e, &e).is_err());
}

proptest! {
    #[test]
    fn ncd_stays_in_range(a in proptest::collection::vec(any::<u8>(), 1..600),
                          b in proptest::collection::vec(any::<u8>(), 0..600)) {
        let d = ncd_with(&goci::distance::Lzss, &a, &b).unwrap().ncd;
        prop_assert!((0.0..=SENTINEL).contains(&d), "{}", d);
    }

    #[test]
    fn plan_like_text_is_close_to_itself(lines in proptest::collection::btree_set("[a-z]{3,7}\\([a-z][0-9],[0-9]{1,2}\\)", 16..40)) {
        let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
        let p = PlanString::from(text);
        let d = ncd(&p, &p).unwrap().ncd;
        prop_assert!(d <= 0.15, "{}", d);
    }
}
