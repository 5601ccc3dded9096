use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a model invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A user coincides with an antenna, so the free-space term is undefined.
    #[error("degenerate geometry: user {user} coincides with antenna {antenna}")]
    DegenerateGeometry { user: usize, antenna: usize },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by the supplied configuration rather than by a runtime failure.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::InvalidConfig(_) | Error::Parse(_))
    }
}
