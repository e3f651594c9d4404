use thiserror::Error;

/// Errors raised by the estimation pipeline.
///
/// The variants map onto the CLI exit-code classes (usage, input,
/// numerical, validation), so callers can classify a failure without
/// inspecting its message.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed an argument outside the operation's contract.
    #[error("usage error: {0}")]
    Usage(String),

    /// A numeric argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data (tables, checkpoints, config files) is missing, corrupt or incompatible.
    #[error("input error: {0}")]
    Input(String),

    /// A numerical procedure failed to converge or produced an unusable result.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An internal consistency check failed; indicates a bug rather than bad input.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
