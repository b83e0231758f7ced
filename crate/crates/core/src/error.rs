use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-finite coordinate at line {line}")]
    NonFiniteRecord { line: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("point cloud must contain at least one point")]
    EmptyCloud,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("rotation is not orthonormal with determinant +1")]
    InvalidRotation,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("regions must be ≥ 1")]
    NoRegions,

    #[error("cannot split {points} points into {regions} regions")]
    TooManyRegions { regions: usize, points: usize },

    #[error("region {region} out of range (region count {count})")]
    RegionOutOfRange { region: usize, count: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("sum of correspondence weights is zero")]
    ZeroWeight,

    #[error("singular value decomposition failed")]
    SvdFailed,

    #[error("no non-degenerate plane could be sampled")]
    DegeneratePlane,

    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
}
