use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use submat::instance::{generate, GenConfig, Instance, ObjectiveKind};
use submat::optimizer::{estimate_opt, streams, DtVariant, PipelineCounters};
use submat::reference::brute_force_opt;
use submat::{run_pipeline, ElementId, MatroidKind, PipelineConfig, ValueOracle};

const RESULT_VERSION: u64 = 1;
/// Largest instance the exhaustive baseline accepts.
const BRUTE_LIMIT: usize = 24;

#[derive(Parser)]
#[command(name = "submat", version, about = "Submodular maximization under matroid constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance as JSON.
    Gen(GenArgs),
    /// Solve an instance and write a result record.
    Run(RunArgs),
    /// Check a result record against its instance.
    Verify(VerifyArgs),
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_kind)]
    matroid: MatroidKind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "coverage", value_parser = parse_objective)]
    function: ObjectiveKind,
    /// Laminar: maximum depth of the constraint tree.
    #[arg(long)]
    tree_depth: Option<usize>,
    /// Laminar: maximum children per constraint.
    #[arg(long)]
    branching: Option<usize>,
    /// Graphic: average number of edges per vertex.
    #[arg(long)]
    density: Option<f64>,
    /// Transversal: right neighbours per element.
    #[arg(long)]
    degree: Option<usize>,
    /// Transversal: number of right vertices.
    #[arg(long)]
    num_right: Option<usize>,
    /// Coverage: universe size.
    #[arg(long)]
    universe: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Full,
    Greedy,
    Brute,
}

impl Algorithm {
    fn name(self) -> &'static str {
        match self {
            Algorithm::Full => "full",
            Algorithm::Greedy => "greedy",
            Algorithm::Brute => "brute",
        }
    }
}

#[derive(clap::Args)]
struct RunArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "full")]
    algorithm: Algorithm,
    /// Worker threads for the multilinear sampling.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Scales the first-phase loop threshold.
    #[arg(long)]
    threshold_factor: Option<f64>,
    /// Leave the wall time out so that reruns are byte-identical.
    #[arg(long)]
    no_wall_time: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    instance: PathBuf,
    result: PathBuf,
    /// Relative tolerance when comparing the recorded value.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

fn parse_kind(s: &str) -> Result<MatroidKind, String> {
    s.parse()
}

fn parse_objective(s: &str) -> Result<ObjectiveKind, String> {
    s.parse()
}

/// Failure of a command: `Usage` for bad input, `Violation` for a failed check.
enum Failure {
    Usage(anyhow::Error),
    Violation(Vec<String>),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(args) => gen(&args),
        Command::Run(args) => run(&args),
        Command::Verify(args) => verify(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(problems)) => {
            for p in problems {
                eprintln!("violation: {p}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(text: &str, output: Option<&Path>) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Instance::from_json(&text).with_context(|| format!("parsing instance {}", path.display()))
}

fn gen(args: &GenArgs) -> Result<(), Failure> {
    let mut config = GenConfig::new(args.matroid, args.function, args.n, args.seed);
    let laminar_only = args.tree_depth.is_some() || args.branching.is_some();
    let graphic_only = args.density.is_some();
    let transversal_only = args.degree.is_some() || args.num_right.is_some();
    let misplaced = match args.matroid {
        MatroidKind::Laminar => graphic_only || transversal_only,
        MatroidKind::Graphic => laminar_only || transversal_only,
        MatroidKind::Transversal => laminar_only || graphic_only,
    };
    if misplaced {
        return Err(anyhow::anyhow!("shape flags do not match --matroid {}", args.matroid).into());
    }
    if args.universe.is_some() && args.function != ObjectiveKind::Coverage {
        return Err(anyhow::anyhow!("--universe only applies to coverage objectives").into());
    }
    config.tree_depth = args.tree_depth.unwrap_or(config.tree_depth);
    config.branching = args.branching.unwrap_or(config.branching);
    config.density = args.density.unwrap_or(config.density);
    config.degree = args.degree.unwrap_or(config.degree);
    config.num_right = args.num_right.or(config.num_right);
    config.universe = args.universe.or(config.universe);
    let inst = generate(&config).context("generating instance")?;
    emit(&inst.to_json(), args.output.as_deref())?;
    Ok(())
}

fn ids(set: &[ElementId]) -> Vec<usize> {
    set.iter().map(|e| e.index()).collect()
}

fn variant_name(variant: Option<DtVariant>) -> &'static str {
    match variant {
        None => "none",
        Some(DtVariant::Incremental) => "incremental",
        Some(DtVariant::ApproxIndepSet) => "approx_indep_set",
    }
}

/// Flat counter record. Every key is always present so the schema is stable.
fn counter_map(total_queries: u64, c: &PipelineCounters, frozen: usize) -> Value {
    let p1 = &c.phase1;
    let p2 = &c.phase2;
    let dt = &p2.dt;
    json!({
        "queries.total": total_queries,
        "queries.estimate": c.estimate_queries,
        "queries.phase1": c.phase1_queries,
        "queries.phase2": c.phase2_queries,
        "phase1.iterations": p1.iterations,
        "phase1.sampled": p1.sampled,
        "phase1.decrements": p1.decrements,
        "phase1.freezes": p1.freezes,
        "phase1.gate_failures": p1.gate_failures,
        "phase1.oracle_calls": p1.oracle_calls,
        "phase1.oracle_structural_ops": p1.oracle_structural_ops,
        "phase1.exhausted": p1.exhausted,
        "phase1.frozen": frozen,
        "phase2.rounds": p2.rounds,
        "phase2.samples_per_estimate": p2.samples_per_estimate,
        "phase2.variant": variant_name(p2.variant),
        "phase2.dt.invocations": dt.invocations,
        "phase2.dt.levels": dt.levels,
        "phase2.dt.tests": dt.tests,
        "phase2.dt.inserts": dt.inserts,
        "phase2.dt.batch_inserts": dt.batch_inserts,
        "phase2.dt.deletes": dt.deletes,
        "phase2.dt.validations": dt.validations,
        "rounding.merges": c.rounding_merges,
    })
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let inst = read_instance(&args.instance)?;
    let mut config = PipelineConfig::new(args.epsilon);
    config.threads = args.threads;
    if let Some(t) = args.threshold_factor {
        config.threshold_factor = t;
    }
    let f = ValueOracle::new(inst.objective.clone()).context("building the objective")?;
    let matroid = &inst.matroid;
    let start = Instant::now();
    let (solution, value, counters, frozen) = match args.algorithm {
        Algorithm::Full => {
            let out = run_pipeline(&f, matroid, &config, args.seed).context("running the pipeline")?;
            let frozen = out.frozen.len();
            (out.solution, out.value, out.counters, frozen)
        }
        Algorithm::Greedy => {
            let est = estimate_opt(&f, matroid).context("running greedy")?;
            let mut set = est.set;
            set.sort_unstable();
            (set, est.value, PipelineCounters::default(), 0)
        }
        Algorithm::Brute => {
            if inst.n() > BRUTE_LIMIT {
                return Err(anyhow::anyhow!("brute force is limited to {BRUTE_LIMIT} elements, instance has {}", inst.n()).into());
            }
            let (set, value) = brute_force_opt(&f, matroid).context("running brute force")?;
            (set, value, PipelineCounters::default(), 0)
        }
    };
    let wall = start.elapsed().as_secs_f64() * 1000.0;
    let mut record = Map::new();
    record.insert("version".into(), json!(RESULT_VERSION));
    record.insert("algorithm".into(), json!(args.algorithm.name()));
    record.insert("matroid".into(), json!(matroid.kind().name()));
    record.insert("n".into(), json!(inst.n()));
    record.insert("rank".into(), json!(matroid.rank()));
    record.insert("seed".into(), json!(args.seed));
    record.insert(
        "streams".into(),
        json!({
            "phase1": [args.seed, streams::PHASE1],
            "multilinear": [args.seed, streams::MULTILINEAR],
            "rounding": [args.seed, streams::ROUNDING],
        }),
    );
    record.insert("config".into(), serde_json::to_value(&config).context("serializing the config")?);
    record.insert("solution".into(), json!(ids(&solution)));
    record.insert("value".into(), json!(value));
    record.insert("counters".into(), counter_map(f.query_count(), &counters, frozen));
    if !args.no_wall_time {
        record.insert("wall_time_ms".into(), json!(wall));
    }
    let text = serde_json::to_string_pretty(&Value::Object(record)).context("serializing the result")?;
    emit(&text, args.output.as_deref())?;
    Ok(())
}

fn field<'a>(record: &'a Value, key: &str) -> anyhow::Result<&'a Value> {
    record.get(key).with_context(|| format!("result record has no '{key}' field"))
}

fn counter(counters: &Value, key: &str) -> anyhow::Result<u64> {
    counters.get(key).and_then(Value::as_u64).with_context(|| format!("counter '{key}' is missing or not an integer"))
}

/// Budget checks for a run of the full pipeline.
fn budget_problems(record: &Value, n: usize, rank: usize) -> anyhow::Result<Vec<String>> {
    let eps = field(record, "config")?.get("epsilon").and_then(Value::as_f64).context("config has no epsilon")?;
    let counters = field(record, "counters")?;
    let (nf, r) = (n as f64, rank.max(1) as f64);
    let mut problems = Vec::new();
    let mut check = |key: &str, used: u64, bound: f64| {
        if used as f64 > bound {
            problems.push(format!("{key} = {used} exceeds its budget {bound:.0}"));
        }
    };
    check("queries.phase1", counter(counters, "queries.phase1")?, 8.0 * nf / eps * (r / eps).ln());
    check("queries.phase2", counter(counters, "queries.phase2")?, 8.0 * nf * eps.powi(-5) * (nf / eps).ln().powi(2));
    let tests = counter(counters, "phase2.dt.tests")? + counter(counters, "phase2.dt.inserts")?;
    check("phase2.dt.tests + phase2.dt.inserts", tests, 8.0 * nf / eps);
    check("phase2.dt.batch_inserts", counter(counters, "phase2.dt.batch_inserts")?, 8.0 / eps * r.ln().max(1.0));
    Ok(problems)
}

fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let inst = read_instance(&args.instance)?;
    let text = fs::read_to_string(&args.result).with_context(|| format!("reading {}", args.result.display()))?;
    let record: Value = serde_json::from_str(&text).with_context(|| format!("parsing result {}", args.result.display()))?;
    let version = field(&record, "version")?.as_u64();
    if version != Some(RESULT_VERSION) {
        return Err(anyhow::anyhow!("unsupported result version {version:?}").into());
    }
    let mut problems = Vec::new();
    let n = field(&record, "n")?.as_u64().context("'n' is not an integer")? as usize;
    let kind = field(&record, "matroid")?.as_str().context("'matroid' is not a string")?;
    if n != inst.n() || kind != inst.matroid.kind().name() {
        problems.push(format!("result is for a {kind} instance with {n} elements, instance is {} with {}", inst.matroid.kind(), inst.n()));
        return Err(Failure::Violation(problems));
    }
    let raw: Vec<u64> = field(&record, "solution")?
        .as_array()
        .context("'solution' is not an array")?
        .iter()
        .map(|v| v.as_u64().context("solution entries must be element ids"))
        .collect::<anyhow::Result<_>>()?;
    let mut solution: Vec<ElementId> = Vec::new();
    for id in raw {
        if id as usize >= n {
            problems.push(format!("element {id} is out of range"));
        } else {
            solution.push(ElementId::new(id as usize));
        }
    }
    solution.sort_unstable();
    if solution.windows(2).any(|w| w[0] == w[1]) {
        problems.push("solution repeats an element".into());
        solution.dedup();
    }
    if !inst.matroid.is_independent(&solution) {
        problems.push("solution is not independent".into());
    }
    let f = ValueOracle::new(inst.objective.clone()).context("building the objective")?;
    let value = f.value(&solution).context("evaluating the solution")?;
    let recorded = field(&record, "value")?.as_f64().context("'value' is not a number")?;
    if (value - recorded).abs() > args.tolerance * (1.0 + value.abs()) {
        problems.push(format!("recorded value {recorded} but the solution is worth {value}"));
    }
    if field(&record, "algorithm")?.as_str() == Some("full") {
        problems.extend(budget_problems(&record, n, inst.matroid.rank())?);
    }
    if !problems.is_empty() {
        return Err(Failure::Violation(problems));
    }
    println!("ok: {} elements, value {value}, independent, within budget", solution.len());
    Ok(())
}
