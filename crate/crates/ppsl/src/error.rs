use std::path::PathBuf;

use ppsl_core::ValidationReport;

/// Failures of the file-format and command layer.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    /// Malformed input. `location` is `line L, column C` for syntax errors
    /// and a field path such as `edges[3]` for semantic ones.
    #[error("{path}: {location}: {message}")]
    Parse {
        path: String,
        location: String,
        message: String,
    },
    #[error("{path}: invalid network: {report}")]
    Validation {
        path: String,
        report: ValidationReport,
    },
    #[error(transparent)]
    Core(#[from] ppsl_core::Error),
    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = IoError> = std::result::Result<T, E>;

pub(crate) fn file_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::File {
        path: path.to_path_buf(),
        source,
    }
}
