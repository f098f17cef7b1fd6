//! Explores the sample-complexity bound: how the hypothesis space and the
//! required number of examples grow with the depth and arity bounds, and
//! how many advice examples each iteration has to supply.
//!
//! cargo run --example pac_bounds

use goci::pac::{advice_examples, hypothesis_space_size, refinement_distance_bounds, report, PacParams, PrefProbs};

fn main() -> goci::Result<()> {
    println!("  i  j   ln|H0|      n*");
    for (i, j) in [(1, 2), (2, 2), (2, 3), (3, 3), (3, 4)] {
        let p = PacParams { i, j, ..PacParams::default() };
        let r = report(&p)?;
        println!("{i:>3}{j:>3} {:>9.2} {:>9.1}", r.h0.ln, r.n_star);
    }

    let small = hypothesis_space_size(2, 2, 2, 1, 2)?;
    println!("\n(2·2·2)^(2^1) = {}", small.value);

    let (lo, hi) = refinement_distance_bounds(0.42, 0.30, 2, 3, 2, &PrefProbs::Uniform(0.5))?;
    println!("refinement distance between {lo:.2} and {hi:.1}");

    for l in [5, 10, 20] {
        println!("L = {l:>2}: {:.1} advice examples per iteration", advice_examples(101.0, 1.0, l)?);
    }
    Ok(())
}
