use std::path::{Path, PathBuf};

use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// `path` is the dotted location of the offending config field.
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: dynloc_core::Error,
    },

    #[error(transparent)]
    Core(#[from] dynloc_core::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 config, 3 accuracy, 4 I/O or parse.
    pub fn exit_code(&self) -> i32 {
        use dynloc_core::Error as E;
        match self {
            CliError::Config { .. } => 2,
            CliError::Io { .. } | CliError::Input { .. } => 4,
            CliError::Core(e) => match e {
                E::Domain(_) | E::InvalidLattice(_) | E::Config(_) => 2,
                E::Accuracy(_) => 3,
                E::Parse { .. }
                | E::EmptySignal(_)
                | E::DegenerateUncertainty(_)
                | E::Io(_)
                | E::Json(_)
                | E::Csv(_) => 4,
            },
        }
    }
}
