//! Runs all four arms over the ten synthetic concepts and prints the
//! per-arm summary.
//!
//! cargo run --release --example benchmark_small -- [seeds] [max_n]

use goci::advice::ConstraintLibrary;
use goci::assets::blocks_domain;
use goci::bench::harness::summary_table;
use goci::bench::{run_benchmark, summarize, BenchmarkSpec};

fn main() -> goci::Result<()> {
    let mut args = std::env::args().skip(1);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2);
    let max_n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let spec = BenchmarkSpec { seeds: (0..seeds).collect(), sizes: (1..=max_n).collect(), ..BenchmarkSpec::default() };
    let start = std::time::Instant::now();
    let report = run_benchmark(&spec, &blocks_domain(), &ConstraintLibrary::default())?;
    print!("{}", summary_table(&summarize(&report)));
    for (arm, concept, n, seed, err) in &report.failures {
        eprintln!("failed: {arm} {concept} n={n} seed={seed}: {err}");
    }
    println!("{} runs in {:.1}s", report.runs.len(), start.elapsed().as_secs_f64());
    Ok(())
}
