use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use goci::advice::{ConstraintLibrary, ReplayTeacher, ScriptedOracle, Teacher, TerminalTeacher};
use goci::assets::{BLOCKS_DOM, STD_CONSTRAINTS};
use goci::bench::harness::summary_table;
use goci::bench::{run_benchmark, summarize, BenchmarkSpec};
use goci::distance::{conceptual_distance, ncd};
use goci::induction::{evaluate_precision, Arm, InductionResult, LoopConfig};
use goci::logic::parse::{parse_example, parse_theory, GroundExample};
use goci::logic::term::Theory;
use goci::pac::{self, PacParams, PrefProbs};
use goci::plan::{derive_plan, example_plan, ground_theory, PlanString};
use goci::session::server::{ServeOptions, Server};
use goci::session::{read_log, replay, run_logged, SessionInputs, SessionRecord};
use goci::{Error, Result};

#[derive(Parser)]
#[command(name = "goci", version, about = "One-shot concept induction with plan-distance scoring and teacher advice")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Induce a theory from example files.
    Induce(InduceArgs),
    /// Run the synthetic benchmark over all arms.
    Benchmark(BenchArgs),
    /// Conceptual distance between a theory and an example, or NCD of two plans.
    Distance(DistanceArgs),
    /// Print the plan of an example, or of a theory grounded on it.
    Plan(PlanArgs),
    /// Sample-complexity calculator.
    Pac(PacArgs),
    /// Precision of a theory on labelled examples.
    Eval(EvalArgs),
    /// Serve one session to a remote teacher over TCP.
    Serve(ServeArgs),
}

#[derive(Args)]
struct Inputs {
    /// Positive example (.facts); repeat for several.
    #[arg(long = "example", short = 'e', required = true)]
    examples: Vec<PathBuf>,
    /// Training negative (.facts); repeatable.
    #[arg(long = "negative")]
    negatives: Vec<PathBuf>,
    /// Domain file (.dom); defaults to the bundled blocks world.
    #[arg(long)]
    domain: Option<PathBuf>,
    /// Constraint library (.constraints); defaults to the bundled one.
    #[arg(long)]
    lib: Option<PathBuf>,
    /// Ablation arm: goci, ilp, ilp+score, ilp+guidance.
    #[arg(long, default_value = "goci")]
    arm: Arm,
    /// Iteration bound.
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    /// Candidates per query.
    #[arg(short, default_value_t = 5)]
    k: usize,
    #[arg(long)]
    query_budget: Option<usize>,
    #[arg(long, default_value_t = 8)]
    beam: usize,
}

#[derive(Args)]
struct InduceArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Teacher: `scripted:<truth.thy>`, `terminal`, `ui` or `none`.
    #[arg(long, alias = "oracle", default_value = "none")]
    teacher: String,
    /// Address for `--teacher ui`.
    #[arg(long, default_value = "127.0.0.1:7070")]
    listen: String,
    /// Re-run a recorded session with its logged answers.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Where to write the induced theory.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Where to write the session log.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Held-out positives for a precision figure.
    #[arg(long)]
    eval_pos: Vec<PathBuf>,
    /// Held-out negatives for a precision figure.
    #[arg(long)]
    eval_neg: Vec<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    sizes: Vec<usize>,
    /// Comma-separated concept families; all ten by default.
    #[arg(long, value_delimiter = ',')]
    concepts: Vec<String>,
    /// Comma-separated arms; all four by default.
    #[arg(long, value_delimiter = ',')]
    arms: Vec<Arm>,
    /// Write one JSON record per run here.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    /// Also print every run.
    #[arg(long)]
    runs: bool,
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long)]
    theory: Option<PathBuf>,
    #[arg(long)]
    example: Option<PathBuf>,
    #[arg(long)]
    domain: Option<PathBuf>,
    #[arg(long)]
    lib: Option<PathBuf>,
    /// Two plan files to compare directly.
    #[arg(long, num_args = 2)]
    plans: Vec<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    example: PathBuf,
    #[arg(long)]
    domain: Option<PathBuf>,
    #[arg(long)]
    lib: Option<PathBuf>,
    /// Ground this theory on the example instead of using its facts.
    #[arg(long)]
    theory: Option<PathBuf>,
}

#[derive(Args)]
struct PacArgs {
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    #[arg(long = "L", default_value_t = 10)]
    iterations: u32,
    #[arg(long, default_value_t = 10)]
    m: u64,
    #[arg(long, default_value_t = 10)]
    t: u64,
    #[arg(long, default_value_t = 2)]
    p: u64,
    #[arg(long, default_value_t = 3)]
    i: u32,
    #[arg(long, default_value_t = 3)]
    j: u32,
    #[arg(long, default_value_t = 1)]
    inputs: u64,
    #[arg(long, default_value_t = 4)]
    lib_size: u32,
    #[arg(long, default_value_t = 2)]
    q: u64,
    /// Distance of the current and previous theory, for the refinement bounds.
    #[arg(long, num_args = 2)]
    distances: Vec<f64>,
    /// Uniform preference probability, for the refinement bounds.
    #[arg(long, default_value_t = 0.5)]
    pref_prob: f64,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    theory: PathBuf,
    #[arg(long = "pos", required = true)]
    pos: Vec<PathBuf>,
    #[arg(long = "neg")]
    neg: Vec<PathBuf>,
    #[arg(long)]
    lib: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value = "127.0.0.1:7070")]
    listen: String,
    /// Seconds before an unanswered query is skipped.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", p.display())))
}

fn example(p: &Path) -> Result<GroundExample> {
    parse_example(&read(p)?).map_err(|e| Error::InvalidParameter(format!("{}: {e}", p.display())))
}

fn theory(p: &Path) -> Result<Theory> {
    parse_theory(&read(p)?).map_err(|e| Error::InvalidParameter(format!("{}: {e}", p.display())))
}

fn text_or(p: &Option<PathBuf>, default: &str) -> Result<String> {
    p.as_deref().map(read).unwrap_or_else(|| Ok(default.to_string()))
}

fn library(p: &Option<PathBuf>) -> Result<ConstraintLibrary> {
    ConstraintLibrary::parse(&text_or(p, STD_CONSTRAINTS)?)
}

impl Inputs {
    fn session(&self) -> Result<SessionInputs> {
        let cfg = LoopConfig {
            max_iterations: self.iterations,
            k: self.k,
            query_budget: self.query_budget,
            search: goci::search::SearchConfig { beam_width: self.beam, ..Default::default() },
            ..LoopConfig::for_arm(self.arm)
        };
        let pos = self.examples.iter().map(|p| example(p)).collect::<Result<Vec<_>>>()?;
        let neg = self.negatives.iter().map(|p| example(p)).collect::<Result<Vec<_>>>()?;
        SessionInputs::new(pos, neg, &text_or(&self.domain, BLOCKS_DOM)?, &text_or(&self.lib, STD_CONSTRAINTS)?, cfg)
    }
}

fn open_log(p: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match p {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::sink()),
    })
}

fn summary(r: &InductionResult, precision: Option<f64>) -> String {
    let mut s = format!(
        "queries={} iterations={} score={:.6} nll={:.6}",
        r.queries(),
        r.iterations(),
        r.score.total,
        r.score.nll
    );
    if let Some(d) = r.score.distance {
        s += &format!(" distance={d:.6}");
    }
    if let Some(p) = precision {
        s += &format!(" precision={p:.4}");
    }
    s
}

fn finish(
    r: &InductionResult,
    out: &Option<PathBuf>,
    eval_pos: &[PathBuf],
    eval_neg: &[PathBuf],
    lib: &ConstraintLibrary,
) -> Result<()> {
    let rendered = r.theory.render();
    match out {
        Some(p) => fs::write(p, &rendered)?,
        None => print!("{rendered}"),
    }
    let precision = if eval_pos.is_empty() && eval_neg.is_empty() {
        None
    } else {
        let pos = eval_pos.iter().map(|p| example(p)).collect::<Result<Vec<_>>>()?;
        let neg = eval_neg.iter().map(|p| example(p)).collect::<Result<Vec<_>>>()?;
        Some(evaluate_precision(&r.theory, &pos, &neg, &lib.registry()))
    };
    eprintln!("{}", summary(r, precision));
    Ok(())
}

fn induce(a: InduceArgs) -> Result<()> {
    let inputs = a.inputs.session()?;
    let mut log = open_log(&a.log)?;
    let (result, _record): (InductionResult, SessionRecord) = if let Some(path) = &a.replay {
        let records = read_log(BufReader::new(fs::File::open(path)?))?;
        let (r, rec) = replay(&records, &inputs)?;
        for line in records.iter().map(|r| r.to_line()) {
            log.write_all(line.as_bytes())?;
        }
        (r, rec)
    } else {
        let spec = a.teacher.as_str();
        if spec == "ui" {
            let server = Server::bind(&a.listen)?;
            eprintln!("waiting for a teacher on {}", server.local_addr()?);
            server.run(&inputs, &ServeOptions::default(), Some(&mut *log))?
        } else {
            let mut teacher: Box<dyn Teacher> = if let Some(path) = spec.strip_prefix("scripted:") {
                Box::new(ScriptedOracle::with_registry(theory(Path::new(path))?, inputs.library.registry()))
            } else if spec == "terminal" {
                Box::new(TerminalTeacher::new(io::stdin().lock(), io::stderr()))
            } else if spec == "none" {
                Box::new(ReplayTeacher::new([]))
            } else {
                return Err(Error::InvalidParameter(format!(
                    "unknown teacher '{spec}' (use scripted:<file>, terminal, ui or none)"
                )));
            };
            let mut inputs = inputs.clone();
            if spec == "none" {
                inputs.config.use_advice = false;
            }
            run_logged(&inputs, teacher.as_mut(), &mut log)?
        }
    };
    log.flush()?;
    finish(&result, &a.out, &a.eval_pos, &a.eval_neg, &inputs.library)
}

fn benchmark(a: BenchArgs) -> Result<()> {
    let spec = BenchmarkSpec {
        concepts: a.concepts,
        seeds: (0..a.seeds).collect(),
        sizes: a.sizes,
        arms: if a.arms.is_empty() { Arm::ALL.to_vec() } else { a.arms },
        ..BenchmarkSpec::default()
    };
    let start = std::time::Instant::now();
    let report = run_benchmark(&spec, &goci::assets::blocks_domain(), &ConstraintLibrary::default())?;
    if a.runs {
        print!("{}", report.table());
    }
    print!("{}", summary_table(&summarize(&report)));
    for (arm, concept, n, seed, err) in &report.failures {
        eprintln!("invalid run: {arm} {concept} n={n} seed={seed}: {err}");
    }
    if let Some(p) = a.jsonl {
        fs::write(p, report.to_jsonl())?;
    }
    eprintln!("{} runs in {:.1}s", report.runs.len(), start.elapsed().as_secs_f64());
    Ok(())
}

fn distance(a: DistanceArgs) -> Result<()> {
    let report = if a.plans.len() == 2 {
        let pa = PlanString::from(read(&a.plans[0])?);
        let pb = PlanString::from(read(&a.plans[1])?);
        ncd(&pa, &pb)?
    } else {
        let (Some(t), Some(x)) = (&a.theory, &a.example) else {
            return Err(Error::InvalidParameter("give --theory and --example, or --plans A B".into()));
        };
        let domain = goci::domain::parse_domain(&text_or(&a.domain, BLOCKS_DOM)?)?;
        conceptual_distance(&theory(t)?, &example(x)?, &domain, &library(&a.lib)?.registry())
    };
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn plan(a: PlanArgs) -> Result<()> {
    let domain = goci::domain::parse_domain(&text_or(&a.domain, BLOCKS_DOM)?)?;
    let registry = library(&a.lib)?.registry();
    let x = example(&a.example)?;
    let p = match &a.theory {
        None => example_plan(&x, &domain, &registry)?,
        Some(t) => {
            let facts = ground_theory(&theory(t)?, &x, &domain, &registry)?;
            derive_plan(&facts, &domain, &registry, None)?
        }
    };
    print!("{p}");
    Ok(())
}

fn pac_cmd(a: PacArgs) -> Result<()> {
    let params = PacParams {
        epsilon: a.epsilon,
        delta: a.delta,
        d: a.d,
        iterations: a.iterations,
        m: a.m,
        t: a.t,
        p: a.p,
        i: a.i,
        j: a.j,
        inputs: a.inputs,
        lib_size: a.lib_size,
        q: a.q,
    };
    let report = pac::report(&params)?;
    let mut v = serde_json::to_value(&report)?;
    if let [dl, dp] = a.distances[..] {
        let (lo, hi) = pac::refinement_distance_bounds(dl, dp, a.lib_size, a.t, a.q, &PrefProbs::Uniform(a.pref_prob))?;
        v["refinement_distance"] = serde_json::json!({ "lower": lo, "upper": hi });
    }
    println!("{v}");
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let t = theory(&a.theory)?;
    let pos = a.pos.iter().map(|p| example(p)).collect::<Result<Vec<_>>>()?;
    let neg = a.neg.iter().map(|p| example(p)).collect::<Result<Vec<_>>>()?;
    let p = evaluate_precision(&t, &pos, &neg, &library(&a.lib)?.registry());
    println!("precision={p:.4}");
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let inputs = a.inputs.session()?;
    let server = Server::bind(&a.listen)?;
    eprintln!("session service listening on {}", server.local_addr()?);
    let opts = ServeOptions { query_timeout: a.timeout.map(Duration::from_secs_f64), ..ServeOptions::default() };
    let mut log = open_log(&a.log)?;
    let (result, _) = server.run(&inputs, &opts, Some(&mut *log))?;
    finish(&result, &a.out, &[], &[], &inputs.library)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Induce(a) => induce(a),
        Cmd::Benchmark(a) => benchmark(a),
        Cmd::Distance(a) => distance(a),
        Cmd::Plan(a) => plan(a),
        Cmd::Pac(a) => pac_cmd(a),
        Cmd::Eval(a) => eval(a),
        Cmd::Serve(a) => serve(a),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
