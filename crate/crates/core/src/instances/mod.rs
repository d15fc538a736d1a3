//! Instance families, their generators and the JSON/CSV file formats.
//!
//! An instance file is a JSON object with `"schema": 1` and a `"type"` of
//! `transportation` or `building_load`. Sample sets are either inline arrays
//! or `{"samples_file": "demand_3.csv"}`, resolved relative to the JSON file.

mod building;
mod transportation;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{DrccError, Result};
use crate::samples::{RiskBounds, RiskCost, SampleSet};

pub use building::{BuildingConfig, BuildingLoadInstance, Thermal};
pub use transportation::{TransportationConfig, TransportationInstance};

pub const SCHEMA_VERSION: u32 = 1;

/// Wasserstein radius, risk window and risk price shared by the chance constraints of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskConfig {
    pub epsilon: f64,
    pub alpha_bar: f64,
    #[serde(default = "default_alpha_min")]
    pub alpha_min: f64,
    pub risk_cost: RiskCost,
}

fn default_alpha_min() -> f64 {
    1e-6
}

impl RiskConfig {
    pub fn bounds(&self) -> Result<RiskBounds> {
        RiskBounds::with_min(self.alpha_bar, self.alpha_min)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(DrccError::InvalidParameter(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        self.bounds()?;
        self.risk_cost.validate()
    }
}

/// One sample set, inline or read from a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Samples {
    Inline(Vec<f64>),
    File { samples_file: PathBuf },
}

impl Samples {
    pub fn values(&self) -> Result<&[f64]> {
        match self {
            Samples::Inline(v) => Ok(v),
            Samples::File { samples_file } => {
                Err(DrccError::Schema(format!("samples file `{}` was not resolved", samples_file.display())))
            }
        }
    }

    fn resolve(&mut self, base: &Path) -> Result<()> {
        if let Samples::File { samples_file } = self {
            let path = if samples_file.is_absolute() { samples_file.clone() } else { base.join(&*samples_file) };
            *self = Samples::Inline(read_samples_csv(&path)?);
        }
        Ok(())
    }

    pub fn sample_set(&self, epsilon: f64) -> Result<SampleSet> {
        SampleSet::new(self.values()?.to_vec(), epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Instance {
    Transportation(TransportationInstance),
    BuildingLoad(BuildingLoadInstance),
}

impl From<TransportationInstance> for Instance {
    fn from(t: TransportationInstance) -> Self {
        Instance::Transportation(t)
    }
}

impl From<BuildingLoadInstance> for Instance {
    fn from(b: BuildingLoadInstance) -> Self {
        Instance::BuildingLoad(b)
    }
}

#[derive(Serialize)]
struct Tagged<'a> {
    schema: u32,
    #[serde(flatten)]
    inner: &'a Instance,
}

#[derive(Deserialize)]
struct Header {
    schema: Option<u32>,
    #[serde(rename = "type")]
    kind: Option<String>,
}

impl Instance {
    pub fn name(&self) -> &str {
        match self {
            Instance::Transportation(t) => &t.name,
            Instance::BuildingLoad(b) => &b.name,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Instance::Transportation(t) => t.validate(),
            Instance::BuildingLoad(b) => b.validate(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&Tagged { schema: SCHEMA_VERSION, inner: self })?;
        s.push('\n');
        Ok(s)
    }

    /// Parses an instance; relative sample files are looked up under `base`.
    pub fn from_json(text: &str, base: &Path) -> Result<Instance> {
        let header: Header = serde_json::from_str(text).map_err(|e| DrccError::Schema(e.to_string()))?;
        match header.schema {
            Some(SCHEMA_VERSION) => {}
            Some(v) => return Err(DrccError::Schema(format!("unsupported schema version {v}"))),
            None => return Err(DrccError::Schema("missing field `schema`".into())),
        }
        // the variants are parsed directly so that errors keep their line and column
        let schema_err = |e: serde_json::Error| DrccError::Schema(e.to_string());
        let mut inst = match header.kind.as_deref() {
            Some("transportation") => Instance::Transportation(serde_json::from_str(text).map_err(schema_err)?),
            Some("building_load") => Instance::BuildingLoad(serde_json::from_str(text).map_err(schema_err)?),
            Some(other) => return Err(DrccError::Schema(format!("unknown instance type `{other}`"))),
            None => return Err(DrccError::Schema("missing field `type`".into())),
        };
        match &mut inst {
            Instance::Transportation(t) => t.demand.iter_mut().try_for_each(|s| s.resolve(base))?,
            Instance::BuildingLoad(b) => b.pv.iter_mut().try_for_each(|s| s.resolve(base))?,
        }
        inst.validate()?;
        Ok(inst)
    }
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).map_err(|source| DrccError::File { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    Instance::from_json(&text, base).map_err(|e| match e {
        DrccError::Schema(msg) => DrccError::Schema(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_instance(inst: &Instance, path: &Path) -> Result<()> {
    fs::write(path, inst.to_json()?).map_err(|source| DrccError::File { path: path.to_path_buf(), source })
}

/// Reads one column of samples. The column is `xi` when a header is present,
/// otherwise the first column.
pub fn read_samples_csv(path: &Path) -> Result<Vec<f64>> {
    let file = fs::File::open(path).map_err(|source| DrccError::File { path: path.to_path_buf(), source })?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(file);
    let mut col = 0;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if line == 0 && rec.iter().any(|f| f.parse::<f64>().is_err()) {
            col = rec.iter().position(|f| f == "xi").ok_or_else(|| DrccError::Parse {
                line: 1,
                msg: format!("{}: header has no `xi` column", path.display()),
            })?;
            continue;
        }
        let field = rec.get(col).unwrap_or("");
        let v: f64 = field.parse().map_err(|_| DrccError::Parse {
            line: line + 1,
            msg: format!("{}: `{field}` is not a number", path.display()),
        })?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(DrccError::InvalidSamples(format!("{} has no samples", path.display())));
    }
    Ok(out)
}

pub fn write_samples_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["xi"])?;
    for v in values {
        w.write_record([format!("{v:?}")])?;
    }
    w.flush()?;
    Ok(())
}
