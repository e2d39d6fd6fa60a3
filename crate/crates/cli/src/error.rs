use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 usage, 3 data (including I/O), 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) | CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

impl From<kindap::Error> for CliError {
    fn from(err: kindap::Error) -> Self {
        use kindap::Error as E;
        let message = err.to_string();
        match err {
            E::InvalidParameter(_) | E::InfeasibleK { .. } => CliError::Usage(message),
            E::RankDeficient { .. } | E::EigSolverFailure(_) => CliError::Numerical(message),
            E::EmptyCluster(_)
            | E::BadLabel { .. }
            | E::ZeroRow(_)
            | E::IsolatedVertex(_)
            | E::LengthMismatch { .. }
            | E::DimensionMismatch(_) => CliError::Data(message),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
