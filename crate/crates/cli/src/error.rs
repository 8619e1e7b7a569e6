use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Data {
        path: PathBuf,
        #[source]
        source: bsr_core::Error,
    },
    #[error("missing upstream artifact {path} (run `{stage}` first)")]
    Missing { path: PathBuf, stage: &'static str },
    #[error(transparent)]
    Core(#[from] bsr_core::Error),
    #[error("{0} item(s) failed; see the failure reports")]
    Partial(usize),
}

impl CliError {
    /// 0 success, 1 usage or config, 2 data, 3 partial failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(bsr_core::Error::Config(_)) => 1,
            CliError::Data { .. } | CliError::Missing { .. } | CliError::Core(_) => 2,
            CliError::Partial(_) => 3,
        }
    }

    pub(crate) fn data(path: impl Into<PathBuf>, source: bsr_core::Error) -> Self {
        CliError::Data {
            path: path.into(),
            source,
        }
    }
}
