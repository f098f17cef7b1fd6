//! Runs every arm over concept families, seeds and sample sizes and
//! aggregates precision and query counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{family, generate, ConceptData, Perturbation, FAMILIES};
use crate::advice::{ConstraintLibrary, ScriptedOracle};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::induction::{evaluate_precision, induce, Arm, IterationTrace, LoopConfig};
use crate::logic::builtin::BuiltinRegistry;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    /// Concept family names; empty means all ten.
    pub concepts: Vec<String>,
    pub seeds: Vec<u64>,
    /// Training sample sizes.
    pub sizes: Vec<usize>,
    pub arms: Vec<Arm>,
    pub eval_pos: usize,
    pub eval_neg: usize,
    pub kinds: Vec<Perturbation>,
    pub config: LoopConfig,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        BenchmarkSpec {
            concepts: Vec::new(),
            seeds: (0..5).collect(),
            sizes: vec![1],
            arms: Arm::ALL.to_vec(),
            eval_pos: 12,
            eval_neg: 12,
            kinds: Perturbation::ALL.to_vec(),
            config: LoopConfig::default(),
        }
    }
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.sizes.is_empty() || self.arms.is_empty() {
            return Err(Error::InvalidParameter("seeds, sizes and arms must be non-empty".into()));
        }
        if self.sizes.contains(&0) {
            return Err(Error::InvalidParameter("sample sizes must be at least 1".into()));
        }
        for c in &self.concepts {
            family(c)?;
        }
        self.config.validate()
    }

    /// The data every arm sees for `family` under `seed`.
    pub fn data(
        &self,
        family: &'static super::Family,
        seed: u64,
        domain: &Domain,
        registry: &BuiltinRegistry,
    ) -> Result<ConceptData> {
        let idx = FAMILIES.iter().position(|g| g.name == family.name).unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(data_seed(seed, idx));
        let max_n = self.sizes.iter().copied().max().unwrap_or(1);
        generate(family, max_n, self.eval_pos, self.eval_neg, &self.kinds, domain, registry, &mut rng)
    }

    fn families(&self) -> Vec<&'static super::Family> {
        if self.concepts.is_empty() {
            FAMILIES.iter().collect()
        } else {
            self.concepts.iter().map(|c| family(c).expect("validated")).collect()
        }
    }
}

/// One row of the report; the column set is fixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub arm: Arm,
    pub concept: String,
    pub n: usize,
    pub seed: u64,
    pub precision: f64,
    pub queries: usize,
    pub iterations: usize,
    pub seconds: f64,
}

/// Everything one run produced, beyond its report row.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub theory: String,
    pub traces: Vec<IterationTrace>,
    pub initial_score: f64,
    pub final_score: f64,
    /// Whether the final theory covers every training positive.
    pub covers_training: bool,
    /// Rendered query/response transcript, for replay checks.
    pub exchanges: Vec<crate::advice::Exchange>,
}

#[derive(Clone, Debug, Default)]
pub struct BenchmarkReport {
    pub runs: Vec<RunOutcome>,
    /// Runs that failed: (arm, concept, n, seed, message).
    pub failures: Vec<(Arm, String, usize, u64, String)>,
}

/// Aggregate over seeds and concepts for one arm and sample size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub arm: Arm,
    pub n: usize,
    pub runs: usize,
    pub precision: f64,
    pub precision_sd: f64,
    pub queries: f64,
    pub queries_sd: f64,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64;
    (m, var.sqrt())
}

impl BenchmarkReport {
    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().map(|r| &r.record)
    }

    /// Mean precision of `arm` at size `n` over valid runs.
    pub fn mean_precision(&self, arm: Arm, n: usize) -> f64 {
        let v: Vec<f64> = self.records().filter(|r| r.arm == arm && r.n == n).map(|r| r.precision).collect();
        mean_sd(&v).0
    }

    pub fn mean_queries(&self, arm: Arm, n: usize) -> f64 {
        let v: Vec<f64> = self.records().filter(|r| r.arm == arm && r.n == n).map(|r| r.queries as f64).collect();
        mean_sd(&v).0
    }

    /// Records as JSON lines.
    pub fn to_jsonl(&self) -> String {
        self.records().map(|r| serde_json::to_string(r).expect("record serializes") + "\n").collect()
    }

    /// Per-run table with the fixed column set.
    pub fn table(&self) -> String {
        let mut s = String::from("arm           concept   n  seed  precision  queries  iterations  seconds\n");
        for r in self.records() {
            let _ = writeln!(
                s,
                "{:<13} {:<9} {:<2} {:<5} {:<10.3} {:<8} {:<11} {:.3}",
                r.arm.name(),
                r.concept,
                r.n,
                r.seed,
                r.precision,
                r.queries,
                r.iterations,
                r.seconds
            );
        }
        s
    }
}

/// Mean and standard deviation of precision and queries per arm and size.
pub fn summarize(report: &BenchmarkReport) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, Arm), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in report.records() {
        let g = groups.entry((r.n, r.arm)).or_default();
        g.0.push(r.precision);
        g.1.push(r.queries as f64);
    }
    groups
        .into_iter()
        .map(|((n, arm), (p, q))| {
            let (precision, precision_sd) = mean_sd(&p);
            let (queries, queries_sd) = mean_sd(&q);
            SummaryRow { arm, n, runs: p.len(), precision, precision_sd, queries, queries_sd }
        })
        .collect()
}

pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut s = String::from("arm           n  runs  precision        queries\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<13} {:<2} {:<5} {:.3} ± {:.3}    {:.2} ± {:.2}",
            r.arm.name(),
            r.n,
            r.runs,
            r.precision,
            r.precision_sd,
            r.queries,
            r.queries_sd
        );
    }
    s
}

/// Seed for a family's data, independent of the arm and sample size so
/// every arm sees the same examples.
fn data_seed(seed: u64, family_index: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (family_index as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Runs one arm on one training set.
pub fn run_one(
    arm: Arm,
    data: &ConceptData,
    n: usize,
    seed: u64,
    domain: &Domain,
    lib: &ConstraintLibrary,
    base: &LoopConfig,
) -> Result<RunOutcome> {
    let cfg = LoopConfig { use_distance: arm.uses_distance(), use_advice: arm.uses_advice(), ..base.clone() };
    let (pos, neg) = data.training(n);
    let registry = lib.registry();
    let mut oracle = ScriptedOracle::with_registry(data.truth.clone(), registry.clone());
    let start = Instant::now();
    let result = induce(pos, neg, domain, lib, &cfg, &mut oracle)?;
    let seconds = start.elapsed().as_secs_f64();
    let precision = evaluate_precision(&result.theory, &data.eval_pos, &data.eval_neg, &registry);
    let covers_training =
        pos.iter().all(|x| crate::logic::covers(&result.theory, x, &registry).is_ok_and(|c| c.covered));
    Ok(RunOutcome {
        record: RunRecord {
            arm,
            concept: data.family.name.to_string(),
            n,
            seed,
            precision,
            queries: result.queries(),
            iterations: result.iterations(),
            seconds,
        },
        theory: result.theory.render(),
        initial_score: result.initial_score,
        final_score: result.score.total,
        traces: result.traces,
        covers_training,
        exchanges: result.exchanges,
    })
}

/// Runs every (concept, seed, size, arm) combination in parallel. Results
/// are ordered by arm, concept, size and seed regardless of scheduling.
pub fn run_benchmark(spec: &BenchmarkSpec, domain: &Domain, lib: &ConstraintLibrary) -> Result<BenchmarkReport> {
    spec.validate()?;
    let registry = lib.registry();
    let families = spec.families();
    let datasets: Vec<(usize, u64, Result<ConceptData>)> = families
        .iter()
        .enumerate()
        .flat_map(|(fi, f)| spec.seeds.iter().map(move |&s| (fi, *f, s)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(fi, f, seed)| (fi, seed, spec.data(f, seed, domain, &registry)))
        .collect();

    let mut report = BenchmarkReport::default();
    let mut jobs = Vec::new();
    for (fi, seed, data) in &datasets {
        match data {
            Ok(d) => {
                for &n in &spec.sizes {
                    for &arm in &spec.arms {
                        jobs.push((arm, d, n, *seed));
                    }
                }
            }
            Err(e) => {
                for &arm in &spec.arms {
                    for &n in &spec.sizes {
                        report.failures.push((arm, families[*fi].name.to_string(), n, *seed, e.to_string()));
                    }
                }
            }
        }
    }
    let results: Vec<(Arm, &str, usize, u64, Result<RunOutcome>)> = jobs
        .into_par_iter()
        .map(|(arm, d, n, seed)| (arm, d.family.name, n, seed, run_one(arm, d, n, seed, domain, lib, &spec.config)))
        .collect();
    for (arm, concept, n, seed, r) in results {
        match r {
            Ok(o) => report.runs.push(o),
            Err(e) => {
                log::warn!("{arm} on {concept} (n={n}, seed={seed}) failed: {e}");
                report.failures.push((arm, concept.to_string(), n, seed, e.to_string()));
            }
        }
    }
    let order: BTreeMap<&str, usize> = families.iter().enumerate().map(|(i, f)| (f.name, i)).collect();
    report.runs.sort_by(|a, b| {
        let ka = (a.record.arm, order[a.record.concept.as_str()], a.record.n, a.record.seed);
        let kb = (b.record.arm, order[b.record.concept.as_str()], b.record.n, b.record.seed);
        ka.cmp(&kb)
    });
    Ok(report)
}
