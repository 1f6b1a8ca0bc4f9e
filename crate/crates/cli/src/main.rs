use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gmis_core::harness::{bench, corpus, write_csv, BenchSpec};
use gmis_core::lp::{build_independent_set_lp, LpMode};
use gmis_core::{
    build_geometric, generate, run, verify, Algorithm, Error, GenSpec, Geom, Instance, Point, RunParams,
    SelectionResult, ShapeKind, Tau,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "gmis", version, about = "Approximate maximum (weight) independent set of planar objects")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a seeded random instance as JSON.
    Generate(GenerateArgs),
    /// Run one algorithm on an instance.
    Run(RunArgs),
    /// Run a corpus of instances and write a CSV report.
    Bench(BenchArgs),
    /// Re-check a result against an instance.
    Verify(VerifyArgs),
    /// Export the conflict graph or the packing LP as text.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Disks,
    Rects,
    Squares,
}

impl From<Kind> for ShapeKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Disks => ShapeKind::Disks,
            Kind::Rects => ShapeKind::Rects,
            Kind::Squares => ShapeKind::Squares,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3.0)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// All weights 1 instead of uniform in [1, 10].
    #[arg(long)]
    unit_weights: bool,
    /// Attach this many uniform random points in the unit square.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Local-search exchange radius.
    #[arg(long)]
    b: Option<usize>,
    /// Rounding threshold: a positive number or "auto".
    #[arg(long, default_value = "auto", value_parser = parse_tau)]
    tau: Tau,
    #[arg(long, default_value_t = gmis_core::rounding::DEFAULT_C_TAU)]
    c_tau: f64,
    #[arg(long, default_value_t = gmis_core::lp::DEFAULT_LP_EPS)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    derandomize: bool,
    /// Also compute the exact optimum (n <= 30).
    #[arg(long)]
    oracle: bool,
}

impl ParamArgs {
    fn params(&self) -> RunParams {
        RunParams {
            b: self.b,
            tau: self.tau,
            c_tau: self.c_tau,
            eps: self.eps,
            seed: self.seed,
            derandomize: self.derandomize,
            oracle: self.oracle,
            ..Default::default()
        }
    }
}

fn parse_tau(s: &str) -> Result<Tau, String> {
    if s == "auto" {
        return Ok(Tau::Auto);
    }
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(Tau::Explicit(t)),
        _ => Err(format!("expected a positive number or \"auto\", got {s:?}")),
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args)]
struct RunArgs {
    /// Instance JSON file.
    instance: PathBuf,
    #[arg(long, value_parser = parse_algorithm)]
    algorithm: Algorithm,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON bench spec with `corpus`, `algorithms` and `seeds`.
    #[arg(long, conflicts_with_all = ["kind", "instances"])]
    spec: Option<PathBuf>,
    /// Instance JSON files to bench instead of a generated corpus.
    #[arg(long, num_args = 1..)]
    instances: Vec<PathBuf>,
    #[arg(long, value_enum, requires = "n")]
    kind: Option<Kind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 3.0)]
    density: f64,
    /// Number of generated instances (seeds `first-seed..`).
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    #[arg(long)]
    unit_weights: bool,
    /// Comma-separated algorithm names.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Vec<Algorithm>,
    /// Comma-separated rounding seeds.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[command(flatten)]
    params: ParamArgs,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    /// Output of `gmis run`, or a bare selection result.
    result: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    /// `p edge n m` followed by `e i j` lines.
    Dimacs,
    /// Packing LP: objective line and one `≤ 1` line per row.
    Lp,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    format: ExportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_instance(path: &Path) -> anyhow::Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = Instance::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    let violations = inst.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidInstance(format!("{violations:?}"))).context(path.display().to_string());
    }
    Ok(inst)
}

fn cmd_generate(a: &GenerateArgs) -> anyhow::Result<()> {
    let mut inst = generate(&GenSpec {
        kind: a.kind.into(),
        n: a.n,
        density: a.density,
        seed: a.seed,
        unit_weights: a.unit_weights,
    })?;
    if let Some(k) = a.points {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed ^ 0x9e37_79b9_7f4a_7c15);
        inst = inst.with_points((0..k).map(|_| Point::new(rng.random(), rng.random())).collect());
    }
    emit(a.out.as_deref(), &(inst.to_json() + "\n"))
}

fn cmd_run(a: &RunArgs) -> anyhow::Result<()> {
    let inst = load_instance(&a.instance)?;
    let (result, report) = run(&inst, a.algorithm, &a.params.params())?;
    log::info!("{} chose {} objects, weight {}", report.algorithm, result.chosen.len(), report.weight);
    let text = serde_json::to_string_pretty(&json!({ "result": result, "report": report }))?;
    emit(a.out.as_deref(), &(text + "\n"))
}

fn cmd_bench(a: &BenchArgs) -> anyhow::Result<()> {
    let (instances, algorithms, seeds, params) = if let Some(path) = &a.spec {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let spec: BenchSpec = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let params = spec.params.unwrap_or_else(|| a.params.params());
        (corpus(&spec)?, spec.algorithms, spec.seeds, params)
    } else {
        let instances = if let Some(kind) = a.kind {
            let spec = BenchSpec {
                corpus: (a.first_seed..a.first_seed + a.count)
                    .map(|seed| GenSpec {
                        kind: kind.into(),
                        n: a.n.unwrap_or_default(),
                        density: a.density,
                        seed,
                        unit_weights: a.unit_weights,
                    })
                    .collect(),
                algorithms: vec![],
                seeds: vec![],
                params: None,
            };
            corpus(&spec)?
        } else if !a.instances.is_empty() {
            a.instances
                .iter()
                .map(|p| Ok((p.display().to_string(), load_instance(p)?)))
                .collect::<anyhow::Result<Vec<_>>>()?
        } else {
            bail!("bench needs --spec, --kind/--n, or --instances");
        };
        (instances, a.algorithms.clone(), a.seeds.clone(), a.params.params())
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = a.threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build()?;
    let rows = pool.install(|| bench(&instances, &algorithms, &seeds, &params));
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    if failed > 0 {
        log::warn!("{failed} of {} runs failed; see the status column", rows.len());
    }
    let mut buf = Vec::new();
    write_csv(&rows, &algorithms, &mut buf)?;
    emit(a.out.as_deref(), &String::from_utf8(buf)?)
}

fn cmd_verify(a: &VerifyArgs) -> anyhow::Result<bool> {
    let inst = load_instance(&a.instance)?;
    let text = fs::read_to_string(&a.result).with_context(|| format!("reading {}", a.result.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let result: SelectionResult = match value.get("result") {
        Some(r) => serde_json::from_value(r.clone())?,
        None => serde_json::from_value(value)?,
    };
    let problems = verify(&inst, &result, &Geom::default())?;
    if problems.is_empty() {
        println!("ok: {} objects, weight {}", result.chosen.len(), result.total_weight);
    }
    for p in &problems {
        println!("problem: {p}");
    }
    Ok(problems.is_empty())
}

fn cmd_export(a: &ExportArgs) -> anyhow::Result<()> {
    let inst = load_instance(&a.instance)?;
    let geom = Geom::default();
    let text = match a.format {
        ExportFormat::Dimacs => build_geometric(&inst, &geom).to_dimacs(),
        ExportFormat::Lp => build_independent_set_lp(&inst, LpMode::Geometric, &geom)?.to_text(),
    };
    emit(a.out.as_deref(), &text)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidInstance(_)
            | Error::Parse(_)
            | Error::NotIndependent(..)
            | Error::Degenerate(_)
            | Error::OverlappingBoundaries,
        ) => 2,
        Some(Error::IncompatibleAlgorithm { .. } | Error::NoUnionBound | Error::MissingPoints | Error::WeightedInstance(_)) => 3,
        Some(Error::TooLarge(_)) => 4,
        _ if err.downcast_ref::<serde_json::Error>().is_some() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Generate(a) => cmd_generate(a),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Bench(a) => cmd_bench(a),
        Cmd::Export(a) => cmd_export(a),
        Cmd::Verify(a) => match cmd_verify(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(2),
            Err(e) => Err(e),
        },
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
