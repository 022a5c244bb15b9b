use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("spin index {index} out of range for a cluster of {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("cluster size {size} exceeds the dense oracle cap of {cap}")]
    SizeCapExceeded { size: usize, cap: usize },
    #[error("operation requires the {expected} regime, found {found}")]
    WrongRegime { expected: &'static str, found: String },
    #[error("measurement point is uninformative (p = {p})")]
    Uninformative { p: f64 },
    #[error("quadrature did not converge: successive estimates {previous:e} and {latest:e}")]
    NonConvergence { previous: f64, latest: f64 },
    #[error("integration failed at t = {t:e}: {reason}")]
    Integration { t: f64, reason: String },
    #[error("state corrupted: {0}")]
    StateCorrupted(String),
    #[error("decay rate diverges (sub-Ohmic bath at a zero gap)")]
    Diverged,
    #[error("unknown {kind} '{name}'")]
    Unknown { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
