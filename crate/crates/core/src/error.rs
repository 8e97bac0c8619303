use std::io;
use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// The shape's support does not fit inside the inscribed ball of the
    /// domain cube (with the margin needed so that every covered cell center
    /// stays strictly inside the ball).
    #[error("shape support exceeds the inscribed ball of the domain: {0}")]
    ShapeOutOfDomain(String),

    #[error("bad mask file: {0}")]
    BadMaskFile(String),

    /// An operation that divides by the set volume was called on an
    /// (effectively) empty set.
    #[error("operation requires a set of positive volume")]
    EmptySet,

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    GridInvalid(String),

    #[error("cannot canonicalize a zero vector")]
    ZeroVector,

    #[error("cyclic direction source requires a non-empty direction list")]
    EmptyCycle,

    #[error("invalid run configuration: {0}")]
    ConfigInvalid(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
