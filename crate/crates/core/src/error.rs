use std::path::PathBuf;

/// Everything that can go wrong while building, solving or loading a model.
#[derive(Debug, thiserror::Error)]
pub enum DrccError {
    #[error("invalid samples: {0}")]
    InvalidSamples(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value outside the domain: {0}")]
    Domain(String),
    #[error("empty VaR curve: {0}")]
    EmptyCurve(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("invalid bounds for `{name}`: [{lower}, {upper}]")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error("unknown variable index {0}")]
    UnknownVariable(usize),
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
    #[error("row `{0}` has no coefficients")]
    EmptyRow(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, DrccError>;
