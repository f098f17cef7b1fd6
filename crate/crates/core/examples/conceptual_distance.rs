//! Derives plans for an example and for candidate theories, and compares
//! them by normalized compression distance.
//!
//! cargo run --example conceptual_distance

use goci::assets::{blocks_domain, lshape_example, lshape_truth};
use goci::distance::{conceptual_distance, ncd};
use goci::logic::{parse_theory, BuiltinRegistry};
use goci::plan::{example_plan, PlanString};

fn main() -> goci::Result<()> {
    let domain = blocks_domain();
    let registry = BuiltinRegistry::default();
    let x = lshape_example();

    let plan = example_plan(&x, &domain, &registry)?;
    println!("example plan ({} actions, {} bytes):\n{plan}", plan.actions(), plan.len());

    let candidates = [
        ("reference theory", lshape_truth()),
        (
            "sizes unconstrained",
            parse_theory(
                "L(S) :- Height(S, Hs), Base(S, Ws), Contains(S, A), Contains(S, B), Row(A), Tower(B), \
                 Width(A, Wa), Height(B, Hb), SpRel(B, A, \"NWTop\").",
            )?,
        ),
        (
            "tower one too tall",
            parse_theory(
                "L(S) :- Height(S, Hs), Base(S, Ws), Contains(S, A), Contains(S, B), Row(A), Tower(B), \
                 Width(A, Wa), Height(B, Hb), Equal(Ws, Wa), Equal(Hs, Hb), SpRel(B, A, \"NWTop\").",
            )?,
        ),
        ("row without width", parse_theory("L(S) :- Contains(S, A), Row(A).")?),
    ];
    for (name, t) in &candidates {
        let d = conceptual_distance(t, &x, &domain, &registry);
        println!("{name:<22} {}", d.summary());
    }

    // Plain NCD on two hand-written plans.
    let row: PlanString = (0..8).map(|k| format!("place(a,{k},0)\n")).collect::<String>().into();
    let tower: PlanString = (0..8).map(|k| format!("place(b,0,{k})\n")).collect::<String>().into();
    println!("row vs row:   {:.3}", ncd(&row, &row)?.ncd);
    println!("row vs tower: {:.3}", ncd(&row, &tower)?.ncd);
    Ok(())
}
