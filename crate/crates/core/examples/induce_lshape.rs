//! Induces the L-shape concept from its single example under each of the
//! four arms, with a scripted oracle standing in for the teacher.
//!
//! cargo run --release --example induce_lshape

use goci::advice::{ConstraintLibrary, ScriptedOracle};
use goci::assets::{blocks_domain, lshape_example, lshape_truth};
use goci::distance::conceptual_distance;
use goci::induction::{run_goci, Arm, LoopConfig};

fn main() -> goci::Result<()> {
    let domain = blocks_domain();
    let lib = ConstraintLibrary::default();
    let registry = lib.registry();
    let x = lshape_example();

    for arm in Arm::ALL {
        let mut oracle = ScriptedOracle::new(lshape_truth());
        let r = run_goci(&x, &domain, &lib, &LoopConfig::for_arm(arm), &mut oracle)?;
        println!("== {arm}");
        for t in &r.traces {
            println!(
                "  iteration {}: score {:.4} -> {:.4} {} ({} queries)",
                t.iteration,
                t.previous_score,
                t.score,
                if t.accepted { "accepted" } else { "kept" },
                t.queries
            );
        }
        let d = conceptual_distance(&r.theory, &x, &domain, &registry);
        print!("{}", r.theory.render());
        println!("  distance to the example: {:.4}\n", d.ncd);
    }
    Ok(())
}
