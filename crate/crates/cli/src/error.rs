use hgt_core::hgt::HgtFailure;

/// Command failure, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),

    #[error(transparent)]
    Algorithm(#[from] HgtFailure),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Algorithm(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<hgt_core::Error> for CliError {
    fn from(e: hgt_core::Error) -> Self {
        match e {
            hgt_core::Error::Hgt(f) => CliError::Algorithm(f),
            hgt_core::Error::Io(source) => CliError::Io { path: "<io>".into(), source },
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}
