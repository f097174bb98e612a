use thiserror::Error;

/// Errors produced by the link model and its front ends.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates its declared range.
    #[error("invalid configuration at `{path}`: {reason}")]
    Config { path: String, reason: String },

    /// The configuration document could not be parsed.
    #[error("cannot parse configuration at `{path}`: {message}")]
    Parse { path: String, message: String },

    /// Effectiveness is zero, so the error fraction is 0/0.
    #[error("no sifted key: sifted-key effectiveness is zero and the QBER is undefined")]
    NoSiftedKey,
}

impl ModelError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        ModelError::Domain(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        ModelError::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
