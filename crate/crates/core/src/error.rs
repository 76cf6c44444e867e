use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("matrix is not symmetric: entries ({row},{col}) differ by {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("eigen decomposition did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNonConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is singular or indefinite at pivot {pivot} (value {value:e})")]
    Singular { pivot: usize, value: f64 },

    #[error("correlation is undefined for constant input")]
    UndefinedCorrelation,

    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    #[error("model does not support {0}")]
    MissingCapability(&'static str),

    #[error("csv parse error at row {row}, column {col}: {message}")]
    Parse {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("no data rows")]
    NoData,

    #[error("io error: {0}")]
    Io(String),

    #[error("protocol error at line {line}: {message}")]
    Protocol { line: usize, message: String },

    #[error("exact enumeration over {features} features exceeds the limit of {limit}")]
    TooManyFeatures { features: usize, limit: usize },

    #[error("LIME normal matrix is singular at ridge 0 (sigma2 = {sigma2}); use a positive ridge")]
    LimeConditioning { sigma2: f64 },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("no closed-form h(summary) for {0}; compute operator norms numerically instead")]
    NoClosedForm(&'static str),

    #[error("functional distance domain {actual} does not match the {expected} required by {removal} removal")]
    DomainMismatch {
        expected: &'static str,
        actual: &'static str,
        removal: &'static str,
    },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
