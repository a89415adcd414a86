use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("no grid or sample point falls inside the domain")]
    EmptyDomain,

    #[error("rejection sampling accepted no points after {attempts} attempts")]
    RejectionExhausted { attempts: usize },

    #[error("non-finite value {value} at node {node:?}")]
    NonFinite { node: Vec<f64>, value: String },

    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("eigendecomposition did not converge")]
    EigenNonConvergence,

    #[error("duplicate translate offset {0:?}")]
    DuplicateOffset(Vec<f64>),

    #[error("family vanishes at probe node {0:?}")]
    VanishingFamily(Vec<f64>),

    #[error("grid does not cover the required region: {0}")]
    Coverage(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("iteration {iteration}: {reason}")]
    Solver { iteration: usize, reason: String },

    #[error("IDX parse error at byte offset {offset}: {reason}")]
    Idx { offset: usize, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
