use std::path::PathBuf;

use thiserror::Error;

use crate::config::Scenario;

/// Crate-wide error type. Validation-class errors map to exit code 1,
/// runtime errors to exit code 2.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("region {region} ({name}): {field} = {value} is not a valid calibration value")]
    RegionParam {
        region: usize,
        name: String,
        field: &'static str,
        value: f64,
    },

    #[error("calibration {path}: row {row}, column {column}: {message}")]
    Calibration {
        path: String,
        row: usize,
        column: String,
        message: String,
    },

    #[error("climate state invalid: {0}")]
    Climate(String),

    #[error("world state invalid: {0}")]
    State(String),

    #[error("carbon transfer matrix column {column} sums to {sum}, expected 1 within 1e-12")]
    TransferMatrix { column: usize, sum: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("episode failed (scenario {scenario}, seed {seed}): {source}")]
    Episode {
        scenario: Scenario,
        seed: u64,
        #[source]
        source: Box<SimError>,
    },

    #[error("step {step}, stage {stage}: {source}")]
    Stage {
        step: usize,
        stage: &'static str,
        #[source]
        source: Box<SimError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    /// Process exit code for the CLI: 1 for validation failures,
    /// 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::RegionParam { .. }
            | SimError::Calibration { .. }
            | SimError::Climate(_)
            | SimError::TransferMatrix { .. }
            | SimError::Config(_)
            | SimError::Scenario(_) => 1,
            SimError::State(_) | SimError::Io { .. } => 2,
            SimError::Episode { source, .. } | SimError::Stage { source, .. } => {
                source.exit_code()
            }
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
