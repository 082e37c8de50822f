use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("exponent out of range: {0}")]
    Exponent(String),

    #[error("unknown test function `{0}`")]
    UnknownFunction(String),

    #[error("point {0} lies outside the evaluable domain [{1}, {2}]")]
    OutOfDomain(f64, f64, f64),

    #[error("point {0} is not a node of the sample grid")]
    NotOnGrid(f64),

    #[error("gauge check failed: {0}")]
    Gauge(String),

    #[error("hypothesis check refused: {0}")]
    Hypothesis(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("local-time support is not covered by the level grid")]
    SupportNotCovered,

    #[error("uniform convergence spot check failed: {0}")]
    UniformConvergence(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for refusals that a caller may override with a force flag.
    pub fn is_hypothesis_refusal(&self) -> bool {
        matches!(self, Error::Hypothesis(_))
    }
}
