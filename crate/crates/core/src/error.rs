use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("mode {0} appears more than once")]
    DuplicateMode(String),

    #[error("mode map is not unitary: |M M^dagger - I| = {deviation:.3e}")]
    NonUnitary { deviation: f64 },

    #[error("mode map output {0} collides with a mode the map does not act on")]
    ModeCollision(String),

    #[error("mode {0} has no detector assigned")]
    UnassignedMode(String),

    #[error("state carries {0} photons; at most {max} are supported", max = crate::fock::MAX_PHOTONS)]
    TooManyPhotons(usize),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("ports must be distinct, got {0} twice")]
    SamePort(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(String),

    #[error("counter overflow while merging tallies")]
    CounterOverflow,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
