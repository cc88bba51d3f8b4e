use thiserror::Error;

/// Errors produced by the library and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a precondition of the operation it was passed to.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// `alpha * beta <= 1`: the moving-average series diverges almost surely.
    #[error("alpha*beta <= 1: series diverges (alpha={alpha}, beta={beta})")]
    DivergentSeries { alpha: f64, beta: f64 },

    /// Parameters fall outside every covered limit-theorem region.
    #[error("limit law not covered for alpha={alpha}, beta={beta}: {reason}")]
    LimitNotCovered {
        alpha: f64,
        beta: f64,
        reason: &'static str,
    },

    /// Density inversion is implemented for symmetric laws only.
    #[error("asymmetric stable density not supported (eta={eta})")]
    AsymmetricDensity { eta: f64 },

    /// A quadratic-functional estimate was non-positive; no entropy exists.
    #[error("non-positive estimate {value}: Renyi entropy undefined")]
    NonPositiveEstimate { value: f64 },

    /// The requested diagnostic needs more data than was supplied.
    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    /// Asymptotic bandwidth conditions are decidable only for power rules.
    #[error("bandwidth rule is not a power rule; asymptotic condition undecidable")]
    UnsupportedBandwidthRule,

    /// The operation requires symmetric stable innovations.
    #[error("operation requires standard symmetric stable innovations: {0}")]
    UnsupportedInnovation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input file or flag value.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code the CLI maps this error to: `2` for validation
    /// failures (bad parameters or inputs), `1` for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}
