use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular state: {0}")]
    SingularState(String),

    #[error("invalid pressure law: {0}")]
    InvalidLaw(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("admissibility rejection: {0}")]
    Admissibility(String),

    #[error("zero-amplitude shock: {0}")]
    ZeroAmplitude(String),

    #[error("connection not found: {0}")]
    ConnectionNotFound(String),

    #[error("singular diffusion matrix (det D = {det:e})")]
    SingularDiffusion { det: f64 },

    #[error("measurement failed: {0}")]
    Measurement(String),

    #[error("state invalidated in cell {cell} at t = {time}: {reason}")]
    StateInvalidated {
        cell: usize,
        time: f64,
        reason: String,
    },
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::SingularState(_) => "singular_state",
            Error::InvalidLaw(_) => "invalid_law",
            Error::Numeric(_) => "numeric",
            Error::Admissibility(_) => "admissibility",
            Error::ZeroAmplitude(_) => "zero_amplitude",
            Error::ConnectionNotFound(_) => "connection_not_found",
            Error::SingularDiffusion { .. } => "singular_diffusion",
            Error::Measurement(_) => "measurement",
            Error::StateInvalidated { .. } => "state_invalidated",
        }
    }

    /// Process exit status: 2 for mathematically inadmissible requests,
    /// 3 for numerical failures, 1 for invalid input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Admissibility(_) | Error::ZeroAmplitude(_) | Error::ConnectionNotFound(_) => 2,
            Error::Numeric(_)
            | Error::SingularDiffusion { .. }
            | Error::Measurement(_)
            | Error::StateInvalidated { .. } => 3,
            Error::Domain(_) | Error::SingularState(_) | Error::InvalidLaw(_) => 1,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
