use std::path::PathBuf;

use thiserror::Error;

/// Failures of the file formats and command layer.
#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] heraldsim_core::Error),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("threshold file {path}: {reason}")]
    Threshold { path: PathBuf, reason: String },

    #[error("{path}:{line}: {reason}")]
    Config { path: PathBuf, line: usize, reason: String },

    #[error("{path}:{line}: {reason}")]
    Csv { path: PathBuf, line: usize, reason: String },

    #[error("manifest {path}: {reason}")]
    Manifest { path: PathBuf, reason: String },

    #[error("closed form and oracle disagree: max deviation {deviation:e} exceeds {tolerance:e}")]
    OracleBreach { deviation: f64, tolerance: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = AppError> = std::result::Result<T, E>;

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        use heraldsim_core::Error as E;
        match self {
            Self::InvalidParams(_) | Self::Config { .. } | Self::Manifest { .. } => 2,
            Self::Threshold { .. } => 6,
            Self::OracleBreach { .. } => 4,
            Self::Core(e) => match e {
                E::Domain { .. } | E::InvalidConfig(_) | E::ClickOutOfRange { .. } => 2,
                E::DegenerateHerald { .. } => 3,
                E::TruncationInsufficient { .. } => 4,
                E::InsufficientSamples { .. } => 5,
                E::InvalidCurve(_) | E::OrderMismatch { .. } => 6,
                E::SeriesNotConverged { .. } => 1,
            },
            Self::Csv { .. } | Self::Io { .. } | Self::Json(_) => 1,
        }
    }
}
