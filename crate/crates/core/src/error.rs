use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation received data that violates its precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A configuration value is out of range or inconsistent. `field` names
    /// the offending setting (TOML path where applicable).
    #[error("invalid configuration `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    /// Every channel coefficient is zero, so nothing can be detected.
    #[error("degenerate channel: all path gains are zero")]
    DegenerateChannel,

    /// Delay hypotheses make the model matrix rank deficient.
    #[error("degenerate delays: model matrix is rank deficient")]
    DegenerateDelays,

    /// Not enough spectral bins survive the threshold to resolve the paths.
    #[error("identifiability: {0}")]
    Identifiability(String),

    #[error("config parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the user's configuration rather than by a
    /// failure while running.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidConfig { .. } | Error::Parse(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
