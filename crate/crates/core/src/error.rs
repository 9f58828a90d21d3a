use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponential moment of order {order} diverges: {reason}")]
    MomentDiverges { order: f64, reason: String },
    #[error("model is not simulable: {0}")]
    NotSimulable(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("networks have different depths ({0} vs {1})")]
    LayerMismatch(usize, usize),
    #[error("networks have different output dimensions ({0} vs {1})")]
    OutputDimMismatch(usize, usize),
    #[error("parse error at {location}: {message}")]
    ParseError { location: String, message: String },
    #[error("damping failure: {0}")]
    DampingFailure(String),
    #[error("sector violation: {0}")]
    SectorViolation(String),
    #[error("all {attempts} attempts missed the target; best error {best}")]
    AttemptsExhausted { attempts: usize, best: f64 },
    #[error("dimension {0} is too large for this operation (max 3)")]
    DimensionTooLarge(usize),
    #[error("rho must exceed 1/2, got {0}")]
    RhoTooSmall(f64),
    #[error("integral diverges: {0}")]
    Diverges(String),
    #[error("singular least-squares fit: {0}")]
    SingularFit(String),
    #[error("config error at `{key}`: {message}")]
    ConfigError { key: String, message: String },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigError { key: key.into(), message: message.into() }
    }
}
