//! `drcc`: generate, solve, compare, check and export risk-adjustable DRCC instances.
//!
//! Exit codes: 0 success (time and node limits included), 1 internal error,
//! 2 configuration error, 3 infeasible, 4 size cap exceeded.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use drcc_core::harness::{self, CutOptions, ExportFormat, RunOptions};
use drcc_core::instances::{
    load_instance, save_instance, BuildingConfig, BuildingLoadInstance, Instance, TransportationConfig,
    TransportationInstance,
};
use drcc_core::reformulate::ModelKind;
use drcc_core::solve::{Limits, SolveStatus};
use drcc_core::DrccError;
use serde_json::json;

#[derive(Parser)]
#[command(name = "drcc", version, about = "Risk-adjustable Wasserstein DRCC solver and experiment harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Solve one instance and write report.csv, alphas.csv, timings.csv and solution.json.
    Solve(SolveArgs),
    /// Solve instances with several models and write compare.csv.
    Compare(CompareArgs),
    /// Ground truth by enumeration (small instances only).
    Oracle(OracleArgs),
    /// Write the model as LP or MPS text.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Transportation,
    Building,
    /// The five-sample single-customer instance used across the tests.
    Toy,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    family: Family,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 40)]
    suppliers: usize,
    #[arg(long, default_value_t = 100)]
    customers: usize,
    #[arg(long, default_value_t = 6)]
    buildings: usize,
    #[arg(long, default_value_t = 53)]
    periods: usize,
    /// Samples per chance constraint (default 50 for transportation, 10 for building load).
    #[arg(long)]
    samples: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Comma list of: ordering, star, no-big-m, polymatroid, polymatroid-int, oa, oa-int, all, none.
    #[arg(long, default_value = "all")]
    cuts: String,
    /// Relative optimality gap.
    #[arg(long, default_value_t = 1e-4)]
    gap: f64,
    /// Seconds per solve; ignored with --deterministic.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Node limit per solve.
    #[arg(long)]
    nodes: Option<usize>,
    /// Seed recorded in the manifest and used by generators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Zero all timings and ignore the time limit so reruns are byte-identical.
    #[arg(long)]
    deterministic: bool,
    /// Worker threads; the search itself is serial, the value is recorded.
    #[arg(long, env = "DRCC_THREADS", default_value_t = 1)]
    threads: usize,
    /// Write manifest.json with the resolved configuration.
    #[arg(long)]
    manifest: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Finite,
    Continuous,
    Stochastic,
    MilpBinary,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Finite => ModelKind::Finite,
            ModelArg::Continuous => ModelKind::Continuous,
            ModelArg::Stochastic => ModelKind::Stochastic,
            ModelArg::MilpBinary => ModelKind::MilpBinary,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Instance files; when none are given, transportation instances are generated from --seeds and --sample-sizes.
    instances: Vec<PathBuf>,
    /// At least two models, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    model: Vec<ModelArg>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    seeds: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "50")]
    sample_sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    suppliers: usize,
    #[arg(long, default_value_t = 5)]
    customers: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Lp,
    Mps,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "lp")]
    format: FormatArg,
    /// Solve first and replace the cones by the collected cuts.
    #[arg(long)]
    linearize_oa: bool,
    /// Building-load period to export.
    #[arg(long, default_value_t = 0)]
    period: usize,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

impl From<DrccError> for Failure {
    fn from(e: DrccError) -> Self {
        let code = match &e {
            DrccError::Infeasible(_) | DrccError::EmptyCurve(_) => 3,
            DrccError::CapExceeded(_) => 4,
            DrccError::Io(_) => 1,
            _ => 2,
        };
        Failure { code, msg: e.to_string() }
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

impl SolverArgs {
    fn options(&self, model: ModelKind) -> Result<RunOptions, Failure> {
        if !(self.gap >= 0.0) {
            return Err(config_error(format!("--gap must be >= 0, got {}", self.gap)));
        }
        let time_limit = match self.time_limit {
            Some(t) if t > 0.0 && t.is_finite() => Some(Duration::from_secs_f64(t)),
            Some(t) => return Err(config_error(format!("--time-limit must be > 0, got {t}"))),
            None => None,
        };
        Ok(RunOptions {
            model,
            cuts: CutOptions::parse(&self.cuts)?,
            limits: Limits { gap: self.gap, time_limit, node_limit: self.nodes, ..Limits::default() },
            deterministic: self.deterministic,
        })
    }

    fn manifest(&self, command: &str, extra: serde_json::Value, opts: &RunOptions, out: &Path) -> Result<(), Failure> {
        if !self.manifest {
            return Ok(());
        }
        let mut doc = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "model": opts.model.as_str(),
            "cuts": opts.cuts.to_spec(),
            "gap": opts.limits.gap,
            "time_limit": if opts.deterministic { None } else { opts.limits.time_limit.map(|d| d.as_secs_f64()) },
            "node_limit": opts.limits.node_limit,
            "cut_rounds": opts.limits.cut_rounds,
            "int_tol": opts.limits.int_tol,
            "cone_tol": opts.limits.cone_tol,
            "sos1_branching": opts.limits.sos1_branching,
            "seed": self.seed,
            "deterministic": opts.deterministic,
            "threads": self.threads,
        });
        if let (Some(m), serde_json::Value::Object(e)) = (doc.as_object_mut(), extra) {
            m.extend(e);
        }
        std::fs::create_dir_all(out).map_err(DrccError::Io)?;
        let text = serde_json::to_string_pretty(&doc).map_err(DrccError::Json)? + "\n";
        std::fs::write(out.join("manifest.json"), text).map_err(DrccError::Io)?;
        Ok(())
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| DrccError::File { path: p.to_path_buf(), source }.into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen(a: &GenArgs) -> Result<(), Failure> {
    let inst = match a.family {
        Family::Transportation => {
            let cfg = TransportationConfig::new(a.seed, a.suppliers, a.customers, a.samples.unwrap_or(50));
            Instance::Transportation(TransportationInstance::generate(&cfg)?)
        }
        Family::Building => {
            let cfg = BuildingConfig::new(a.seed, a.buildings, a.periods, a.samples.unwrap_or(10));
            Instance::BuildingLoad(BuildingLoadInstance::generate(&cfg)?)
        }
        Family::Toy => Instance::Transportation(TransportationInstance::canonical_toy()),
    };
    match &a.out {
        Some(p) => save_instance(&inst, p)?,
        None => print!("{}", inst.to_json()?),
    }
    Ok(())
}

fn solve(a: &SolveArgs) -> Result<(), Failure> {
    let opts = a.solver.options(a.model.into())?;
    let inst = load_instance(&a.instance)?;
    a.solver.manifest("solve", json!({ "instance": a.instance, "out": a.out }), &opts, &a.out)?;
    let res = harness::run(&inst, &opts)?;
    harness::write_run(&a.out, &res, opts.deterministic)?;
    println!("{}", harness::summary_line(&res));
    if res.status() == SolveStatus::Infeasible {
        return Err(Failure { code: 3, msg: format!("{} is infeasible", res.instance) });
    }
    Ok(())
}

fn compare(a: &CompareArgs) -> Result<(), Failure> {
    let models: Vec<ModelKind> = a.model.iter().map(|&m| m.into()).collect();
    let opts = a.solver.options(models[0])?;
    let insts: Vec<Instance> = if a.instances.is_empty() {
        let mut v = Vec::new();
        for &n in &a.sample_sizes {
            for &seed in &a.seeds {
                let cfg = TransportationConfig::new(seed, a.suppliers, a.customers, n);
                v.push(Instance::Transportation(TransportationInstance::generate(&cfg)?));
            }
        }
        v
    } else {
        a.instances.iter().map(|p| load_instance(p)).collect::<Result<_, _>>()?
    };
    let names: Vec<&str> = models.iter().map(|m| m.as_str()).collect();
    a.solver.manifest(
        "compare",
        json!({
            "models": names,
            "instances": a.instances,
            "seeds": a.seeds,
            "sample_sizes": a.sample_sizes,
            "suppliers": a.suppliers,
            "customers": a.customers,
            "out": a.out,
        }),
        &opts,
        &a.out,
    )?;
    let cmp = harness::compare(&insts, &models, &opts)?;
    cmp.write(&a.out)?;
    let violated = cmp.rows.iter().filter(|r| r.dominance(cmp.gap) == Some(false)).count();
    println!("{} instances, dominance violations {violated}, trend={}", cmp.rows.len(), cmp.trend());
    Ok(())
}

fn oracle(a: &OracleArgs) -> Result<(), Failure> {
    let inst = load_instance(&a.instance)?;
    let model: ModelKind = a.model.into();
    let sol = harness::oracle(&inst, model)?;
    std::fs::create_dir_all(&a.out).map_err(DrccError::Io)?;
    let doc = json!({
        "instance": inst.name(),
        "model": model.as_str(),
        "objective": sol.objective,
        "alphas": sol.alphas,
        "x": sol.x,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(DrccError::Json)? + "\n";
    std::fs::write(a.out.join("oracle.json"), text).map_err(DrccError::Io)?;
    println!("{:?}", sol.objective);
    Ok(())
}

fn export(a: &ExportArgs) -> Result<(), Failure> {
    let opts = a.solver.options(a.model.into())?;
    let inst = load_instance(&a.instance)?;
    let format = match a.format {
        FormatArg::Lp => ExportFormat::Lp,
        FormatArg::Mps => ExportFormat::Mps,
    };
    let text = harness::export(&inst, &opts, format, a.linearize_oa, a.period)?;
    write_text(a.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Compare(a) => compare(a),
        Command::Oracle(a) => oracle(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("drcc: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
