use std::path::PathBuf;
use std::time::Duration;

use drcc_core::harness::{self, CutOptions, ExportFormat, RunOptions, RunResult};
use drcc_core::instances::{
    load_instance, save_instance, BuildingConfig, BuildingLoadInstance, TransportationConfig, TransportationInstance,
};
use drcc_core::reformulate::ModelKind;
use drcc_core::samples;
use drcc_core::DrccError;
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(drcc, InfeasibleError, PyValueError);
create_exception!(drcc, CapExceededError, PyValueError);

fn err(e: DrccError) -> PyErr {
    match e {
        DrccError::Infeasible(_) | DrccError::EmptyCurve(_) => InfeasibleError::new_err(e.to_string()),
        DrccError::CapExceeded(_) => CapExceededError::new_err(e.to_string()),
        DrccError::Io(_) | DrccError::File { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn model_kind(name: &str) -> PyResult<ModelKind> {
    ModelKind::parse(name).ok_or_else(|| PyValueError::new_err(format!("unknown model `{name}`")))
}

/// Sorted samples of one uncertain right-hand side with a Wasserstein radius.
#[pyclass(name = "SampleSet", frozen)]
struct PySampleSet(samples::SampleSet);

#[pymethods]
impl PySampleSet {
    #[new]
    fn new(values: Vec<f64>, epsilon: f64) -> PyResult<Self> {
        samples::SampleSet::new(values, epsilon).map(PySampleSet).map_err(err)
    }

    /// Samples in non-increasing order.
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn var_continuous(&self, alpha: f64) -> PyResult<f64> {
        self.0.var_continuous(alpha).map(|v| v.value).map_err(err)
    }

    fn var_finite(&self, alpha: f64) -> PyResult<f64> {
        self.0.var_finite(alpha).map(|v| v.value).map_err(err)
    }

    /// 1-based index of the last sample at or above the flood level.
    fn critical_index(&self, alpha: f64) -> PyResult<Option<usize>> {
        self.0.critical_index(alpha).map_err(err)
    }

    /// Smallest alpha at which the finite VaR reaches sample `n`, if any.
    fn alpha_for_level(&self, n: usize) -> PyResult<Option<f64>> {
        self.0.alpha_for_level(n).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("SampleSet(n={}, epsilon={})", self.0.len(), self.0.epsilon())
    }
}

#[pyclass(name = "Instance", frozen)]
struct PyInstance(drcc_core::instances::Instance);

#[pymethods]
impl PyInstance {
    #[staticmethod]
    #[pyo3(signature = (seed=1, suppliers=40, customers=100, samples=50))]
    fn transportation(seed: u64, suppliers: usize, customers: usize, samples: usize) -> PyResult<Self> {
        let t = TransportationInstance::generate(&TransportationConfig::new(seed, suppliers, customers, samples));
        t.map(|t| PyInstance(t.into())).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (seed=1, buildings=6, periods=53, samples=10))]
    fn building(seed: u64, buildings: usize, periods: usize, samples: usize) -> PyResult<Self> {
        let b = BuildingLoadInstance::generate(&BuildingConfig::new(seed, buildings, periods, samples));
        b.map(|b| PyInstance(b.into())).map_err(err)
    }

    /// One supplier, one customer, samples 10, 8, 6, 4, 2.
    #[staticmethod]
    fn toy() -> Self {
        PyInstance(TransportationInstance::canonical_toy().into())
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        load_instance(&path).map(PyInstance).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_instance(&self.0, &path).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    #[getter]
    fn name(&self) -> &str {
        self.0.name()
    }

    fn __repr__(&self) -> String {
        format!("Instance({})", self.0.name())
    }
}

fn run_options(
    model: &str,
    cuts: &str,
    gap: f64,
    time_limit: Option<f64>,
    node_limit: Option<usize>,
    deterministic: bool,
) -> PyResult<RunOptions> {
    let mut opts = RunOptions::new(model_kind(model)?);
    opts.cuts = CutOptions::parse(cuts).map_err(err)?;
    opts.limits.gap = gap;
    opts.limits.time_limit = time_limit.map(Duration::from_secs_f64);
    opts.limits.node_limit = node_limit;
    opts.deterministic = deterministic;
    Ok(opts)
}

fn result_dict<'py>(py: Python<'py>, res: &RunResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("instance", &res.instance)?;
    d.set_item("model", res.model.as_str())?;
    d.set_item("status", res.status().as_str())?;
    d.set_item("objective", res.objective())?;
    let mut problems = Vec::new();
    for r in &res.records {
        let p = PyDict::new(py);
        p.set_item("period", r.period)?;
        p.set_item("status", r.report.status.as_str())?;
        p.set_item("objective", r.report.objective)?;
        p.set_item("bound", r.report.bound)?;
        p.set_item("gap", r.report.gap)?;
        p.set_item("nodes", r.report.nodes)?;
        p.set_item("lp_iterations", r.report.lp_iterations)?;
        p.set_item("solve_time", r.report.solve_time.as_secs_f64())?;
        p.set_item("alphas", r.alphas.iter().cloned().collect::<std::collections::BTreeMap<_, _>>())?;
        p.set_item("x", r.x.iter().cloned().collect::<std::collections::BTreeMap<_, _>>())?;
        p.set_item("binaries_on", &r.binaries_on)?;
        problems.push(p);
    }
    d.set_item("problems", problems)?;
    Ok(d)
}

/// Builds and solves `instance` with one of `finite`, `continuous`,
/// `stochastic` or `milp-binary`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (instance, model="continuous", cuts="all", gap=1e-4, time_limit=None, node_limit=None, deterministic=false))]
fn solve<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    model: &str,
    cuts: &str,
    gap: f64,
    time_limit: Option<f64>,
    node_limit: Option<usize>,
    deterministic: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = run_options(model, cuts, gap, time_limit, node_limit, deterministic)?;
    let res = py.detach(|| harness::run(&instance.0, &opts)).map_err(err)?;
    result_dict(py, &res)
}

/// Solves and writes report.csv, alphas.csv, timings.csv and solution.json into `out`.
#[pyfunction]
#[pyo3(signature = (instance, out, model="continuous", cuts="all", deterministic=false))]
fn solve_to_dir(
    py: Python<'_>,
    instance: &PyInstance,
    out: PathBuf,
    model: &str,
    cuts: &str,
    deterministic: bool,
) -> PyResult<()> {
    let opts = run_options(model, cuts, 1e-4, None, None, deterministic)?;
    py.detach(|| harness::run(&instance.0, &opts).and_then(|res| harness::write_run(&out, &res, deterministic)))
        .map_err(err)
}

/// Enumeration ground truth; returns `(objective, x, alphas)`.
#[pyfunction]
#[pyo3(signature = (instance, model="continuous"))]
fn oracle(py: Python<'_>, instance: &PyInstance, model: &str) -> PyResult<(f64, Vec<f64>, Vec<f64>)> {
    let kind = model_kind(model)?;
    let sol = py.detach(|| harness::oracle(&instance.0, kind)).map_err(err)?;
    Ok((sol.objective, sol.x, sol.alphas))
}

/// Model text in `lp` or `mps` format.
#[pyfunction]
#[pyo3(signature = (instance, model="finite", format="lp", linearize_oa=false, period=0))]
fn export(instance: &PyInstance, model: &str, format: &str, linearize_oa: bool, period: usize) -> PyResult<String> {
    let fmt = ExportFormat::parse(format).ok_or_else(|| PyValueError::new_err(format!("unknown format `{format}`")))?;
    let opts = RunOptions::new(model_kind(model)?);
    harness::export(&instance.0, &opts, fmt, linearize_oa, period).map_err(err)
}

#[pymodule]
fn drcc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySampleSet>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_to_dir, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(export, m)?)?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add("CapExceededError", m.py().get_type::<CapExceededError>())?;
    Ok(())
}
