use thiserror::Error;

/// Errors raised across the crate. Variants carry enough context to locate the failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("precision insufficient: {0}")]
    PrecisionInsufficient(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("{what} = {value} outside available range [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("singularity at s = {s}: {reason}")]
    Singular { s: f64, reason: String },

    #[error("step size fell below floor at s = {s}")]
    StepFloor { s: f64 },

    #[error("analytic continuation failed: {0}")]
    Continuation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("at (n = {n}, s = {s}): {source}")]
    At {
        n: usize,
        s: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn at(self, n: usize, s: f64) -> Error {
        Error::At {
            n,
            s,
            source: Box::new(self),
        }
    }
}
