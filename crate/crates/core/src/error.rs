use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polynomial is not a total derivative: {0}")]
    NotExact(String),

    #[error("jet of length {got} is too short, need {need}")]
    JetTooShort { need: usize, got: usize },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("at least {min} quadrature nodes required, got {got}")]
    NodeCountTooSmall { min: usize, got: usize },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("solution blows up near x = {x}")]
    PoleDetected { x: f64 },

    #[error("no real far-field branch: {0}")]
    NoRealBranch(String),

    #[error("boundary correction does not decay in the matching window: {0}")]
    MatchingWindowViolated(String),

    #[error("argument {value} outside the covered domain [{lo}, {hi}]")]
    DomainExceeded { value: f64, lo: f64, hi: f64 },

    #[error("cross-check failed: {0}")]
    CrossCheckFailed(String),

    #[error("radicand changes sign on [{from}, {to}]")]
    NegativeRadicand { from: f64, to: f64 },

    #[error("log-derivative has a pole near x = {x}")]
    PoleOfW { x: f64 },

    #[error("weight is not integrable: {0}")]
    NonIntegrableWeight(String),

    #[error("orthogonality lost (residual {residual:e}); raise precision_bits")]
    PrecisionExhausted { residual: f64 },

    #[error("quadrature did not converge: {0}")]
    NotConverged(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
