//! Parses the bundled L-shape example and its reference theory, then asks
//! which clause covers it and with which substitution.
//!
//! cargo run --example parse_and_cover

use goci::assets::{lshape_example, lshape_truth};
use goci::logic::{covers, parse_theory, BuiltinRegistry};

fn main() -> goci::Result<()> {
    let x = lshape_example();
    let truth = lshape_truth();
    let registry = BuiltinRegistry::default();

    println!("example ({} facts):\n{}", x.facts.len(), x.render());
    println!("theory:\n{}", truth.render());

    let cov = covers(&truth, &x, &registry)?;
    println!("covered: {}", cov.covered);
    if let (Some(i), Some(theta)) = (cov.clause, &cov.witness) {
        println!("by clause {i} with");
        for (v, t) in theta.iter() {
            println!("  {v} = {t}");
        }
    }

    // A wrong size relation no longer covers the example.
    let wrong = parse_theory("L(S) :- Height(S, Hs), Contains(S, B), Tower(B), Height(B, Hb), Equal(Hs, Hb).")?;
    println!("tower as tall as the structure covers it: {}", covers(&wrong, &x, &registry)?.covered);
    Ok(())
}
