use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Everything the CLI can fail with. Input and usage problems exit with 2,
/// output problems with 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },

    #[error("{}: invalid `{field}`: {message}", path.display())]
    Schema {
        path: PathBuf,
        field: String,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] bandlab_core::Error),

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Write { .. } => 3,
            _ => 2,
        }
    }
}
