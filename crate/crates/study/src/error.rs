use std::io;
use std::path::PathBuf;

pub type Result<T, E = StudyError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] cwave_core::Error),
}

impl StudyError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        StudyError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        StudyError::Parse {
            line,
            message: message.into(),
        }
    }

    /// Whether the failure came from the numerics rather than from input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, StudyError::Numerical(_))
    }
}
