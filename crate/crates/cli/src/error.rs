use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("oracle check failed: {0}")]
    OracleFailed(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::OracleFailed(_) => 1,
            CliError::Invalid(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<thermoprobe::Error> for CliError {
    fn from(e: thermoprobe::Error) -> Self {
        use thermoprobe::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::IndexOutOfRange { .. }
            | E::SizeCapExceeded { .. }
            | E::WrongRegime { .. }
            | E::Unknown { .. } => CliError::Invalid(e.to_string()),
            E::Uninformative { .. }
            | E::NonConvergence { .. }
            | E::Integration { .. }
            | E::StateCorrupted(_)
            | E::Diverged => CliError::Numerical(e.to_string()),
        }
    }
}
