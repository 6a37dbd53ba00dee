use plflow_core::flowmetrics::MetricsError;
use plflow_core::geometry::GeometryError;
use plflow_core::hdfilter::FilterError;
use plflow_core::lattice::LatticeError;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Failure of one command. Each variant maps onto a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Param(String),
    #[error("{0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Format(_) => 2,
            CliError::Param(_) => 3,
            CliError::Degenerate(_) => 4,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path, msg: impl std::fmt::Display) -> Self {
        CliError::Format(format!("{}: {msg}", path.display()))
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::NonFinite(_) | LatticeError::Overflow(_) => CliError::Degenerate(e.to_string()),
            _ => CliError::Param(e.to_string()),
        }
    }
}

impl From<FilterError> for CliError {
    fn from(e: FilterError) -> Self {
        match e {
            FilterError::Empty | FilterError::DegenerateNormalization { .. } | FilterError::NonFinite(_) => {
                CliError::Degenerate(e.to_string())
            }
            FilterError::Lattice(inner) => inner.into(),
            _ => CliError::Param(e.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::NoValidPixels => CliError::Degenerate(e.to_string()),
            GeometryError::DimensionMismatch { .. } => CliError::Format(e.to_string()),
            GeometryError::Lattice(inner) => inner.into(),
            _ => CliError::Param(e.to_string()),
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::LengthMismatch { .. } | MetricsError::ShapeMismatch(..) => CliError::Format(e.to_string()),
            MetricsError::InvalidSilog { .. } | MetricsError::InvalidStandard(_) => CliError::Param(e.to_string()),
            _ => CliError::Degenerate(e.to_string()),
        }
    }
}
