use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh needs at least one segment per side, got {0}")]
    InvalidResolution(usize),

    #[error("meshes are not nested: fine n={fine} is not a multiple of coarse n={coarse}")]
    NotNested { coarse: usize, fine: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("contact sample layouts differ ({0})")]
    SampleLayoutMismatch(String),

    #[error("invalid material parameters: {0}")]
    InvalidMaterial(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("objective returned a non-finite value {value} after {evals} evaluations")]
    NonFiniteObjective { value: f64, evals: usize },

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
