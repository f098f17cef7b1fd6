//! Shows what the teacher sees: each query's ranked candidates with their
//! values on the example, and the answer a scripted oracle gives.
//!
//! cargo run --example advice_session

use goci::advice::{ConstraintLibrary, FnTeacher, ScriptedOracle, TeacherResponse};
use goci::assets::{blocks_domain, lshape_example, lshape_truth};
use goci::induction::{run_goci, LoopConfig};

fn main() -> goci::Result<()> {
    let oracle = ScriptedOracle::new(lshape_truth());
    let mut teacher = FnTeacher(|q: &goci::advice::AdviceQuery| {
        println!("query {} (iteration {}), clause:\n  {}", q.id, q.iteration, q.context);
        let picks = oracle.choose(q);
        for (i, r) in q.rendered.iter().enumerate() {
            let mark = if picks.contains(&i) { "*" } else { " " };
            println!("  {mark} {}. {r}", i + 1);
        }
        Ok(TeacherResponse::Chosen(picks))
    });
    let r = run_goci(
        &lshape_example(),
        &blocks_domain(),
        &ConstraintLibrary::default(),
        &LoopConfig::default(),
        &mut teacher,
    )?;
    println!("\n{} queries; final theory:\n{}", r.queries(), r.theory.render());
    Ok(())
}
