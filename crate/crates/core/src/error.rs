use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("layout has odd coordinate count {0}")]
    OddLayout(usize),

    #[error("invalid site box: {0}")]
    InvalidSite(String),

    #[error("invalid turbine spec: {0}")]
    InvalidTurbine(String),

    #[error("need at least {needed} turbines, got {got}")]
    TooFewTurbines { needed: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("zero ambient speed at turbine {turbine}: flow direction undefined")]
    ZeroFlow { turbine: usize },

    #[error("flow direction must be a unit vector (norm {0})")]
    BadDirection(f64),

    #[error("expected {expected} wake models (one shared or one per turbine), got {got}")]
    WakeModelCount { expected: usize, got: usize },

    #[error("malformed grid: {0}")]
    Grid(String),

    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },

    #[error("objective provides no gradient")]
    NoGradient,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error in {path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
