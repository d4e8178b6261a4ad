use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("matrix is singular")]
    Singular,
    #[error("partition of unity degenerates: {0}")]
    DegeneratePartition(String),
    #[error("transition data rejected: {0}")]
    InvalidTransition(String),
    #[error("incompatible local data: {0}")]
    Incompatible(String),
    #[error("not a module map: {0}")]
    NotModuleMap(String),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}
