use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants group into the four classes the CLI maps to exit codes:
/// verification failures are not errors (they are reports), everything
/// else is a config/domain problem except [`Error::Capacity`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("mixed radicands: sqrt({0}) and sqrt({1}) live in different fields")]
    MixedRadicand(u32, u32),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("arithmetic capacity exceeded: {0}")]
    Capacity(String),
    #[error("incomplete data: {0}")]
    IncompleteData(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),
    #[error("spectrum has no bragg entries")]
    EmptySpectrum,
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// Process exit code for this error: 3 for capacity, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
