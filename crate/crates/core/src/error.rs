use thiserror::Error;

/// Errors produced by the analytical models, codecs and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("timestamp {requested} s precedes the first kept sample at {first} s")]
    BeforeFirstSample { requested: f64, first: f64 },

    #[error("line {line}: {reason}")]
    Parse { line: u64, reason: String },

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error("trace for node {node} ran out of samples at t = {time_s} s")]
    TraceUnderrun { node: u32, time_s: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("scenario is not stationary: {0}")]
    NonStationary(String),

    #[error("packet: {0}")]
    Packet(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
