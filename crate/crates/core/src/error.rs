use thiserror::Error;

/// Errors raised by the toolkit.
///
/// `Domain` covers physics preconditions (β ≥ 1, ρ outside (0,1), ...),
/// `Config` covers malformed user input. The CLI maps the first to exit
/// code 1 and the second to exit code 2.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("undefined event pair: events coincide in space and time")]
    UndefinedPair,

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("drop detected in {bins} bin(s); refusing to emit a bound")]
    DropDetected { bins: usize },

    #[error("unknown preset `{name}` (available: {available})")]
    UnknownPreset { name: String, available: String },

    #[error("failed to parse quantity `{input}`: {reason}")]
    Unit { input: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by bad user input rather than bad physics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Unit { .. } | Error::Config(_) | Error::UnknownPreset { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
