use thiserror::Error;

pub type Result<T, E = FnlsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FnlsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field is zero (mass {0:e})")]
    ZeroField(f64),

    #[error("negative density entry {value:e} at index {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("under-resolved field: {0}")]
    Resolution(String),

    #[error("inadmissible configuration: {0}")]
    Inadmissible(String),

    #[error("blow-up detected at iteration {iteration}: {reason}")]
    BlowUp { iteration: usize, reason: String },

    #[error("non-finite values at t = {t}")]
    NonFinite { t: f64 },

    #[error("config error (line {line}): {message}")]
    Config { line: usize, message: String },

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FnlsError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        FnlsError::Domain(msg.into())
    }
}
