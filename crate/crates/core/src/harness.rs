//! End-to-end runs: build, solve, compare and export, plus the CSV/JSON reports.
//!
//! Files written by [`write_run`]:
//!
//! - `report.csv`: one row per solved problem (a building instance has one per period).
//! - `alphas.csv`: one row per chance constraint.
//! - `timings.csv`: preprocessing, build and solve times.
//! - `solution.json`: decisions, alphas and the binaries set to one.
//!
//! In deterministic mode every time column is written as zero and the time
//! limit is ignored, so reruns produce identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{DrccError, Result};
use crate::instances::Instance;
use crate::model::{linearize, write_lp, write_mps, CutTag, VarKind};
use crate::reformulate::{
    build_continuous, build_finite, build_milp_binary, build_stochastic, ContinuousOptions, DrccInstance,
    FiniteOptions, Formulation, ModelKind,
};
use crate::solve::{
    oracle_finite_enum, oracle_jk_enum, solve_formulation, Limits, OracleSolution, SeparationMode, SeparationOptions,
    SolveReport, SolveStatus, JK_ENUM_MAX_SAMPLES,
};

/// Cut families, parsed from a comma list such as `ordering,star`.
///
/// Tokens: `ordering`, `star`, `no-big-m` (star row replaces the big-M rows),
/// `polymatroid`, `polymatroid-int`, `oa`, `oa-int`, `all`, `none`.
/// The `-int` forms separate only at integral points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutOptions {
    pub ordering: bool,
    pub star: bool,
    pub no_big_m: bool,
    pub polymatroid: SeparationMode,
    pub oa: SeparationMode,
}

impl Default for CutOptions {
    fn default() -> Self {
        CutOptions::all()
    }
}

impl CutOptions {
    pub fn all() -> Self {
        CutOptions {
            ordering: true,
            star: true,
            no_big_m: false,
            polymatroid: SeparationMode::Lazy,
            oa: SeparationMode::Lazy,
        }
    }

    pub fn none() -> Self {
        CutOptions {
            ordering: false,
            star: false,
            no_big_m: false,
            polymatroid: SeparationMode::Off,
            oa: SeparationMode::Off,
        }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let mut c = CutOptions::none();
        for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok {
                "none" => c = CutOptions::none(),
                "all" => c = CutOptions::all(),
                "ordering" => c.ordering = true,
                "star" => c.star = true,
                "no-big-m" => c.no_big_m = true,
                "polymatroid" => c.polymatroid = SeparationMode::Lazy,
                "polymatroid-int" => c.polymatroid = SeparationMode::Integer,
                "oa" => c.oa = SeparationMode::Lazy,
                "oa-int" => c.oa = SeparationMode::Integer,
                other => return Err(DrccError::InvalidParameter(format!("unknown cut option `{other}`"))),
            }
        }
        if c.no_big_m && !(c.ordering && c.star) {
            return Err(DrccError::InvalidParameter("`no-big-m` needs `ordering` and `star`".into()));
        }
        Ok(c)
    }

    /// Canonical comma list, the inverse of [`CutOptions::parse`].
    pub fn to_spec(&self) -> String {
        let mut toks = Vec::new();
        if self.ordering {
            toks.push("ordering");
        }
        if self.star {
            toks.push("star");
        }
        if self.no_big_m {
            toks.push("no-big-m");
        }
        match self.polymatroid {
            SeparationMode::Lazy => toks.push("polymatroid"),
            SeparationMode::Integer => toks.push("polymatroid-int"),
            SeparationMode::Off => {}
        }
        match self.oa {
            SeparationMode::Lazy => toks.push("oa"),
            SeparationMode::Integer => toks.push("oa-int"),
            SeparationMode::Off => {}
        }
        if toks.is_empty() {
            "none".into()
        } else {
            toks.join(",")
        }
    }

    pub fn finite(&self) -> FiniteOptions {
        FiniteOptions {
            ordering: self.ordering,
            star: self.star,
            star_replaces_big_m: self.no_big_m,
            ..FiniteOptions::default()
        }
    }

    pub fn separation(&self) -> SeparationOptions {
        SeparationOptions { polymatroid: self.polymatroid, oa: self.oa }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub model: ModelKind,
    pub cuts: CutOptions,
    pub limits: Limits,
    pub deterministic: bool,
}

impl RunOptions {
    pub fn new(model: ModelKind) -> Self {
        RunOptions { model, cuts: CutOptions::default(), limits: Limits::default(), deterministic: false }
    }

    fn effective_limits(&self) -> Limits {
        let mut l = self.limits;
        if self.deterministic {
            l.time_limit = None;
        }
        l
    }
}

pub fn build(inst: &DrccInstance, model: ModelKind, cuts: &CutOptions) -> Result<Formulation> {
    match model {
        ModelKind::Finite => build_finite(inst, &cuts.finite()),
        ModelKind::Continuous => build_continuous(inst, &ContinuousOptions::default()),
        ModelKind::Stochastic => build_stochastic(inst),
        ModelKind::MilpBinary => build_milp_binary(inst),
    }
}

/// Result of one solved problem.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub instance: String,
    pub model: ModelKind,
    pub period: Option<usize>,
    pub constraints: usize,
    pub samples: usize,
    pub build_time: Duration,
    pub preprocess: Duration,
    pub report: SolveReport,
    /// Ordering and star rows present in the model before the search.
    pub static_cuts: BTreeMap<CutTag, usize>,
    pub alphas: Vec<(String, f64)>,
    pub x: Vec<(String, f64)>,
    pub binaries_on: Vec<String>,
}

impl RunRecord {
    pub fn cut_count(&self, tag: CutTag) -> usize {
        self.static_cuts.get(&tag).copied().unwrap_or(0) + self.report.cuts.get(&tag).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub instance: String,
    pub model: ModelKind,
    pub records: Vec<RunRecord>,
}

impl RunResult {
    /// Sum of the objectives, or `None` when some problem has no solution.
    pub fn objective(&self) -> Option<f64> {
        self.records.iter().map(|r| r.report.objective).sum()
    }

    /// The least favourable status over the records.
    pub fn status(&self) -> SolveStatus {
        let rank = |s: SolveStatus| match s {
            SolveStatus::Optimal => 0,
            SolveStatus::NodeLimit => 1,
            SolveStatus::TimeLimit => 2,
            SolveStatus::Infeasible => 3,
        };
        self.records.iter().map(|r| r.report.status).max_by_key(|&s| rank(s)).unwrap_or(SolveStatus::Optimal)
    }
}

fn static_cuts(f: &Formulation) -> BTreeMap<CutTag, usize> {
    let mut out = BTreeMap::new();
    for r in &f.model.rows {
        let tag = match r.role.as_deref() {
            Some("ordering") => CutTag::Ordering,
            Some("star") => CutTag::Star,
            _ => continue,
        };
        *out.entry(tag).or_insert(0) += 1;
    }
    out
}

/// Builds and solves one DRCC problem.
pub fn run_drcc(inst: &DrccInstance, opts: &RunOptions, period: Option<usize>) -> Result<(RunRecord, Formulation)> {
    let start = Instant::now();
    let f = build(inst, opts.model, &opts.cuts)?;
    let build_time = start.elapsed();
    let out = solve_formulation(&f, &opts.cuts.separation(), &opts.effective_limits())?;
    let (alphas, x, binaries_on) = match &out.x {
        Some(v) => (
            inst.constraints.iter().map(|c| c.name.clone()).zip(f.alphas(v)).collect(),
            inst.vars.iter().map(|d| d.name.clone()).zip(f.decisions(v)).collect(),
            f.model
                .vars
                .iter()
                .zip(v)
                .filter(|(var, &val)| var.kind == VarKind::Binary && val > 0.5)
                .map(|(var, _)| var.name.clone())
                .collect(),
        ),
        None => (Vec::new(), Vec::new(), Vec::new()),
    };
    let record = RunRecord {
        instance: inst.name.clone(),
        model: opts.model,
        period,
        constraints: inst.constraints.len(),
        samples: inst.constraints.iter().map(|c| c.samples.len()).max().unwrap_or(0),
        build_time,
        preprocess: f.preprocess,
        static_cuts: static_cuts(&f),
        report: out.report,
        alphas,
        x,
        binaries_on,
    };
    Ok((record, f))
}

/// Solves an instance file. Building-load periods are solved in order, each
/// starting from the temperatures reached in the previous one; the run stops
/// at the first period without a solution.
pub fn run(inst: &Instance, opts: &RunOptions) -> Result<RunResult> {
    let mut records = Vec::new();
    match inst {
        Instance::Transportation(t) => {
            records.push(run_drcc(&t.to_drcc()?, opts, None)?.0);
        }
        Instance::BuildingLoad(b) => {
            let mut temps = b.x_init.clone();
            let nb = b.buildings.len();
            for t in 0..b.periods() {
                let (rec, _) = run_drcc(&b.period_instance(t, &temps)?, opts, Some(t))?;
                let on: Option<Vec<bool>> =
                    if rec.x.len() >= nb { Some(rec.x[..nb].iter().map(|(_, v)| *v > 0.5).collect()) } else { None };
                records.push(rec);
                match on {
                    Some(on) => temps = b.step(&temps, &on),
                    None => break,
                }
            }
        }
    }
    Ok(RunResult { instance: inst.name().to_string(), model: opts.model, records })
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v > 0.0 {
        "inf".into()
    } else if v < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

fn secs(d: Duration, deterministic: bool) -> String {
    if deterministic {
        "0".into()
    } else {
        format!("{:.6}", d.as_secs_f64())
    }
}

pub const REPORT_HEADER: [&str; 20] = [
    "instance",
    "model",
    "period",
    "constraints",
    "samples",
    "t_bs",
    "t_solve",
    "t_total",
    "status",
    "objective",
    "bound",
    "gap",
    "nodes",
    "lp_iterations",
    "cuts_ordering",
    "cuts_star",
    "cuts_polymatroid",
    "cuts_oa",
    "alpha_mean",
    "alphas",
];

pub const ALPHAS_HEADER: [&str; 5] = ["instance", "model", "period", "constraint", "alpha"];
pub const TIMINGS_HEADER: [&str; 7] = ["instance", "model", "period", "t_bs", "t_build", "t_solve", "t_total"];

fn period_field(p: Option<usize>) -> String {
    p.map(|p| p.to_string()).unwrap_or_default()
}

pub fn report_csv(results: &[RunResult], deterministic: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER)?;
    for res in results {
        for r in &res.records {
            let rep = &r.report;
            let total = r.preprocess + r.build_time + rep.solve_time;
            let alpha_mean = if r.alphas.is_empty() {
                String::new()
            } else {
                num(r.alphas.iter().map(|a| a.1).sum::<f64>() / r.alphas.len() as f64)
            };
            let alphas = r.alphas.iter().map(|a| num(a.1)).collect::<Vec<_>>().join(";");
            w.write_record([
                r.instance.clone(),
                r.model.as_str().to_string(),
                period_field(r.period),
                r.constraints.to_string(),
                r.samples.to_string(),
                secs(r.preprocess, deterministic),
                secs(rep.solve_time, deterministic),
                secs(total, deterministic),
                rep.status.as_str().to_string(),
                rep.objective.map(num).unwrap_or_default(),
                num(rep.bound),
                num(rep.gap),
                rep.nodes.to_string(),
                rep.lp_iterations.to_string(),
                r.cut_count(CutTag::Ordering).to_string(),
                r.cut_count(CutTag::Star).to_string(),
                r.cut_count(CutTag::Polymatroid).to_string(),
                (r.cut_count(CutTag::HyperbolicOa) + r.cut_count(CutTag::SocOa)).to_string(),
                alpha_mean,
                alphas,
            ])?;
        }
    }
    finish(w)
}

pub fn alphas_csv(results: &[RunResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ALPHAS_HEADER)?;
    for res in results {
        for r in &res.records {
            for (name, a) in &r.alphas {
                w.write_record([
                    r.instance.clone(),
                    r.model.as_str().into(),
                    period_field(r.period),
                    name.clone(),
                    num(*a),
                ])?;
            }
        }
    }
    finish(w)
}

pub fn timings_csv(results: &[RunResult], deterministic: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TIMINGS_HEADER)?;
    for res in results {
        for r in &res.records {
            let total = r.preprocess + r.build_time + r.report.solve_time;
            w.write_record([
                r.instance.clone(),
                r.model.as_str().into(),
                period_field(r.period),
                secs(r.preprocess, deterministic),
                secs(r.build_time, deterministic),
                secs(r.report.solve_time, deterministic),
                secs(total, deterministic),
            ])?;
        }
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| DrccError::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| DrccError::Schema(e.to_string()))
}

#[derive(Serialize)]
struct PeriodSolution<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    period: Option<usize>,
    status: &'a str,
    objective: Option<f64>,
    bound: f64,
    alphas: BTreeMap<&'a str, f64>,
    x: BTreeMap<&'a str, f64>,
    binaries_on: &'a [String],
}

#[derive(Serialize)]
struct Solution<'a> {
    instance: &'a str,
    model: &'a str,
    status: &'a str,
    objective: Option<f64>,
    problems: Vec<PeriodSolution<'a>>,
}

pub fn solution_json(res: &RunResult) -> Result<String> {
    let sol = Solution {
        instance: &res.instance,
        model: res.model.as_str(),
        status: res.status().as_str(),
        objective: res.objective(),
        problems: res
            .records
            .iter()
            .map(|r| PeriodSolution {
                period: r.period,
                status: r.report.status.as_str(),
                objective: r.report.objective,
                bound: if r.report.bound.is_finite() { r.report.bound } else { 0.0 },
                alphas: r.alphas.iter().map(|(n, a)| (n.as_str(), *a)).collect(),
                x: r.x.iter().map(|(n, v)| (n.as_str(), *v)).collect(),
                binaries_on: &r.binaries_on,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&sol)?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| DrccError::File { path: path.to_path_buf(), source })
}

pub fn write_run(dir: &Path, res: &RunResult, deterministic: bool) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| DrccError::File { path: dir.to_path_buf(), source })?;
    let one = std::slice::from_ref(res);
    write_file(&dir.join("report.csv"), &report_csv(one, deterministic)?)?;
    write_file(&dir.join("alphas.csv"), &alphas_csv(one)?)?;
    write_file(&dir.join("timings.csv"), &timings_csv(one, deterministic)?)?;
    write_file(&dir.join("solution.json"), &solution_json(res)?)
}

/// Objectives of several models on one instance.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub instance: String,
    pub samples: usize,
    pub results: Vec<RunResult>,
}

impl CompareRow {
    pub fn objective(&self, m: ModelKind) -> Option<f64> {
        self.results.iter().find(|r| r.model == m).and_then(|r| r.objective())
    }

    /// `(z_ref - z_m) / z_ref` against the first model.
    pub fn diff(&self, m: ModelKind) -> Option<f64> {
        let zr = self.results.first()?.objective()?;
        let zm = self.objective(m)?;
        Some((zr - zm) / zr.abs().max(f64::MIN_POSITIVE))
    }

    /// `z_finite >= z_continuous` up to the optimality gap, when both are known.
    pub fn dominance(&self, gap: f64) -> Option<bool> {
        let zd = self.objective(ModelKind::Finite)?;
        let zc = self.objective(ModelKind::Continuous)?;
        Some(zd >= zc - gap * zd.abs().max(1.0))
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub models: Vec<ModelKind>,
    pub rows: Vec<CompareRow>,
    pub gap: f64,
}

/// Sorts `models` with finite first; the first model is the reference of every Diff.
pub fn compare(insts: &[Instance], models: &[ModelKind], opts: &RunOptions) -> Result<Comparison> {
    let mut models = models.to_vec();
    models.sort();
    models.dedup();
    if models.len() < 2 {
        return Err(DrccError::InvalidParameter("compare needs at least two models".into()));
    }
    let mut rows = Vec::with_capacity(insts.len());
    for inst in insts {
        let mut results = Vec::new();
        for &m in &models {
            results.push(run(inst, &RunOptions { model: m, ..opts.clone() })?);
        }
        let samples = results.first().and_then(|r| r.records.first()).map_or(0, |r| r.samples);
        rows.push(CompareRow { instance: inst.name().to_string(), samples, results });
    }
    Ok(Comparison { models, rows, gap: opts.limits.gap })
}

impl Comparison {
    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["instance".to_string(), "samples".to_string()];
        header.extend(self.models.iter().map(|m| format!("z_{}", m.as_str())));
        header.extend(self.models[1..].iter().map(|m| format!("diff_{}", m.as_str())));
        header.push("dominance".into());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.instance.clone(), r.samples.to_string()];
            rec.extend(self.models.iter().map(|&m| r.objective(m).map(num).unwrap_or_default()));
            rec.extend(self.models[1..].iter().map(|&m| r.diff(m).map(num).unwrap_or_default()));
            rec.push(match r.dominance(self.gap) {
                Some(true) => "ok".into(),
                Some(false) => "violated".into(),
                None => "na".into(),
            });
            w.write_record(&rec)?;
        }
        finish(w)
    }

    /// Mean Diff per model for each sample size, in increasing sample size.
    pub fn mean_diffs(&self) -> Vec<(usize, usize, Vec<Option<f64>>)> {
        let mut sizes: Vec<usize> = self.rows.iter().map(|r| r.samples).collect();
        sizes.sort();
        sizes.dedup();
        sizes
            .into_iter()
            .map(|n| {
                let group: Vec<&CompareRow> = self.rows.iter().filter(|r| r.samples == n).collect();
                let means = self.models[1..]
                    .iter()
                    .map(|&m| {
                        let d: Option<Vec<f64>> = group.iter().map(|r| r.diff(m)).collect();
                        d.filter(|d| !d.is_empty()).map(|d| d.iter().sum::<f64>() / d.len() as f64)
                    })
                    .collect();
                (n, group.len(), means)
            })
            .collect()
    }

    /// `ok` when the mean Finite-vs-Continuous Diff strictly falls as the sample size grows.
    pub fn trend(&self) -> &'static str {
        let Some(pos) = self.models[1..].iter().position(|&m| m == ModelKind::Continuous) else {
            return "na";
        };
        if self.models[0] != ModelKind::Finite {
            return "na";
        }
        let means: Option<Vec<f64>> = self.mean_diffs().iter().map(|(_, _, m)| m[pos]).collect();
        match means {
            Some(m) if m.len() >= 2 => {
                if m.windows(2).all(|w| w[1] < w[0]) {
                    "ok"
                } else {
                    "violated"
                }
            }
            _ => "na",
        }
    }

    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["samples".to_string(), "instances".to_string()];
        header.extend(self.models[1..].iter().map(|m| format!("mean_diff_{}", m.as_str())));
        header.push("trend".into());
        w.write_record(&header)?;
        let trend = self.trend();
        for (n, count, means) in self.mean_diffs() {
            let mut rec = vec![n.to_string(), count.to_string()];
            rec.extend(means.iter().map(|m| m.map(num).unwrap_or_default()));
            rec.push(trend.into());
            w.write_record(&rec)?;
        }
        finish(w)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|source| DrccError::File { path: dir.to_path_buf(), source })?;
        write_file(&dir.join("compare.csv"), &self.csv()?)?;
        write_file(&dir.join("compare_summary.csv"), &self.summary_csv()?)
    }
}

/// Ground truth by enumeration: staircase levels for `finite`, sample pairs for `continuous`.
pub fn oracle(inst: &Instance, model: ModelKind) -> Result<OracleSolution> {
    let Instance::Transportation(t) = inst else {
        return Err(DrccError::Unsupported("the oracles need continuous decisions; building load has binaries".into()));
    };
    let d = t.to_drcc()?;
    match model {
        ModelKind::Finite => oracle_finite_enum(&d),
        ModelKind::Continuous => oracle_jk_enum(&d, JK_ENUM_MAX_SAMPLES),
        other => Err(DrccError::Unsupported(format!("no oracle for the {} model", other.as_str()))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Lp,
    Mps,
}

impl ExportFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lp" => Some(ExportFormat::Lp),
            "mps" => Some(ExportFormat::Mps),
            _ => None,
        }
    }
}

/// Model text for one problem of `inst`; `period` picks a building-load period
/// started from the initial temperatures.
///
/// With `linearize_oa` the model is solved first and its cones are replaced
/// by every cut collected during the search.
pub fn export(
    inst: &Instance,
    opts: &RunOptions,
    format: ExportFormat,
    linearize_oa: bool,
    period: usize,
) -> Result<String> {
    let d = match inst {
        Instance::Transportation(t) => t.to_drcc()?,
        Instance::BuildingLoad(b) => b.period_instance(period, &b.x_init)?,
    };
    let f = build(&d, opts.model, &opts.cuts)?;
    let model = if linearize_oa && !f.model.cones.is_empty() {
        let out = solve_formulation(&f, &opts.cuts.separation(), &opts.effective_limits())?;
        linearize(&f.model, &out.pool)?
    } else {
        f.model
    };
    match format {
        ExportFormat::Lp => Ok(write_lp(&model)),
        ExportFormat::Mps => write_mps(&model),
    }
}

/// Formats the report of a run for the terminal.
pub fn summary_line(res: &RunResult) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "{} [{}] status={} objective={}",
        res.instance,
        res.model.as_str(),
        res.status().as_str(),
        res.objective().map(num).unwrap_or_else(|| "-".into())
    );
    let nodes: usize = res.records.iter().map(|r| r.report.nodes).sum();
    let _ = write!(s, " nodes={nodes} problems={}", res.records.len());
    s
}
