use std::path::PathBuf;

use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {msg}", path.display())]
    Parse { path: PathBuf, msg: String },

    #[error("numerical failure: {0}")]
    Numerical(#[source] mpsvqa::Error),
}

impl CliError {
    pub const EXIT_VALIDATION: u8 = 2;
    pub const EXIT_IO: u8 = 3;
    pub const EXIT_NUMERICAL: u8 = 4;
    pub const EXIT_PARSE: u8 = 5;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => Self::EXIT_VALIDATION,
            CliError::Io { .. } => Self::EXIT_IO,
            CliError::Numerical(_) => Self::EXIT_NUMERICAL,
            CliError::Parse { .. } => Self::EXIT_PARSE,
        }
    }

    /// Classifies a core error raised while building inputs from `path`.
    pub(crate) fn from_input(path: &std::path::Path, e: mpsvqa::Error) -> Self {
        use mpsvqa::Error as E;
        match e {
            E::Io(source) => CliError::Io { path: path.to_path_buf(), source },
            E::Parse { .. } | E::Json(_) => CliError::Parse {
                path: path.to_path_buf(),
                msg: e.to_string(),
            },
            E::NonFinite { .. } => CliError::Numerical(e),
            other => CliError::Validation(format!("{}: {other}", path.display())),
        }
    }

    /// Classifies a core error raised during the computation itself.
    pub(crate) fn from_compute(e: mpsvqa::Error) -> Self {
        use mpsvqa::Error as E;
        match e {
            E::Argument(_) | E::Shape(_) | E::Capacity(_) | E::Range(_) => CliError::Validation(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
