use thiserror::Error;

use crate::metric::PointId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown point {0}")]
    UnknownPoint(PointId),
    #[error("scale is undefined for non-positive distance {0}")]
    NonPositiveDistance(f64),
    #[error("aspect ratio {0} is not a power of two in [1, 2^62]")]
    InvalidPhi(f64),
    #[error("expected {expected}-dimensional coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinates must be finite")]
    NonFiniteCoordinate,
    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),
    #[error("operation requires a Euclidean metric space")]
    NotEuclidean,
    #[error("point {0} is already present")]
    DuplicatePoint(PointId),
    #[error("point {0} is not present")]
    AbsentPoint(PointId),
    #[error("point {point} is within distance {distance} < 1 of the current set")]
    TooClose { point: PointId, distance: f64 },
    #[error("ball radius {radius} exceeds the maintained radius {max} at level {level}")]
    RadiusTooLarge { level: usize, radius: f64, max: f64 },
    #[error("net level {0} does not exist")]
    UnknownLevel(usize),
    #[error("net levels are not nested at level {0}")]
    NotNested(usize),
    #[error("no distance estimate stored for ({0}, {1})")]
    MissingEstimate(PointId, PointId),
    #[error("point {0} is not a vertex of the sketch graph")]
    NotInSketch(PointId),
    #[error("lightness needs at least two points")]
    TooFewPoints,
    #[error("the light spanner is empty")]
    EmptySpanner,
    #[error("operation is not available in {0} mode")]
    ModeMismatch(&'static str),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
