use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data has the wrong shape or contains invalid values.
    #[error("validation error: {0}")]
    Validation(String),

    /// A file could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// The QP solver hit its iteration cap.
    #[error("solver did not converge after {iterations} iterations (kkt residual {residual:e})")]
    Solver {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    /// A quantity that must be non-negative came out materially negative.
    #[error("numerical integrity error: {0}")]
    Numerical(String),

    /// The requested operation is not feasible for this input size.
    #[error("capability error: {0}")]
    Capability(String),

    /// A best-response oracle produced non-finite values.
    #[error("oracle error at PSRO iteration {iteration}: {message}")]
    Oracle { iteration: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Validation(_) => "validation",
            Error::Parse { .. } => "parse",
            Error::Solver { .. } => "solver",
            Error::Numerical(_) => "numerical",
            Error::Capability(_) => "capability",
            Error::Oracle { .. } => "oracle",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
