use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("pole of the gamma function at {0}")]
    Pole(String),

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("{op} did not converge: {detail}")]
    Convergence { op: &'static str, detail: String },

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn convergence(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Convergence {
            op,
            detail: detail.into(),
        }
    }

    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. })
    }
}
