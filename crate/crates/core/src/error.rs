use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A matrix failed the density-matrix checks (Hermitian, unit trace, PSD).
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("shape error: {0}")]
    Shape(String),
    /// Requested dimension exceeds the configured cap.
    #[error("resource limit: dimension {dim} exceeds cap {cap}")]
    ResourceLimit { dim: usize, cap: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
}
