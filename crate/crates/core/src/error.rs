use std::path::PathBuf;

/// Errors raised by tensor operations, spectral calculus and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("tensor is not Hermitian: asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("index {index} out of range (dimension {dim})")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("{name} is undefined at {args:?}: {reason}")]
    Domain {
        name: String,
        args: Vec<f64>,
        reason: String,
    },

    #[error("kernel undefined at eigenvalue pair ({i}, {j}): {source}")]
    EigenPair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("function undefined at eigenvalue {index} (= {value}): {source}")]
    Eigenvalue {
        index: usize,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tensor does not commute with the base tensor: commutator norm {norm:.3e} exceeds {tolerance:.3e}")]
    NotCommuting { norm: f64, tolerance: f64 },

    #[error("sample {index}: {source}")]
    Sample {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{failed} of {total} samples failed (first: {first})")]
    TooManyFailures {
        failed: usize,
        total: usize,
        first: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed tensor file: {message}")]
    TensorFile { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(name: &str, args: &[f64], reason: &str) -> Self {
        Error::Domain {
            name: name.to_string(),
            args: args.to_vec(),
            reason: reason.to_string(),
        }
    }
}
