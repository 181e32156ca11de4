use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("quadrature did not converge: estimate {value}, error estimate {error}")]
    Quadrature { value: f64, error: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        what: String,
        iterations: usize,
        residual: f64,
    },

    #[error("loss of orthogonality: Gram defect {defect:e} exceeds {bound:e}")]
    Orthogonality { defect: f64, bound: f64 },

    #[error("{quantity} = {value} outside the tabulated range [{lo}, {hi}]")]
    OutOfRange {
        quantity: String,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidInput(_) => "invalid_input",
            Error::Quadrature { .. } => "quadrature",
            Error::Convergence { .. } => "convergence",
            Error::Orthogonality { .. } => "orthogonality",
            Error::OutOfRange { .. } => "out_of_range",
            Error::Io(_) => "io",
        }
    }
}
