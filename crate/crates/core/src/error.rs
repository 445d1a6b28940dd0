use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("level {level} out of range for site {site} (dim {dim})")]
    OutOfRange { site: usize, level: usize, dim: usize },
    #[error("site {site}: {msg}")]
    KindMismatch { site: usize, msg: String },
    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dispersive regime violated: epsilon = {epsilon} <= 10 g = {limit}")]
    DispersiveRegimeViolated { epsilon: f64, limit: f64 },
    #[error("frame mismatch: {0}")]
    FrameMismatch(String),
    #[error("incomplete parameters for {model}: missing `{param}`")]
    IncompleteParams { model: String, param: String },
    #[error("unsupported term: {0}")]
    UnsupportedTerm(String),
    #[error("integration failure: {0}")]
    IntegrationFailure(String),
    #[error("zero broadening for mode {0}; use a finite linewidth")]
    ZeroBroadening(usize),
    #[error("insufficient truncation: need d >= {need}, got {got}")]
    InsufficientTruncation { need: usize, got: usize },
    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
