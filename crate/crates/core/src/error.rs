use thiserror::Error;

pub type Result<T> = std::result::Result<T, QesError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QesError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// α = 0 lies outside the ansatz family.
    #[error("degenerate ansatz: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("recurrence row {row} out of range 0..={max}")]
    IndexOutOfRange { row: usize, max: usize },

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),
}

impl QesError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        QesError::InvalidParameter(msg.into())
    }
}
