use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("angular velocity {0} is too small for a defined motion radius")]
    ZeroAngularVelocity(f64),
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("distance to target {0} m is below the degeneracy threshold")]
    DegenerateRho(f64),
    #[error("look-ahead points coincide; segment has zero length")]
    CoincidentPoints,
    #[error("heading error {0} rad makes a control-law denominator vanish")]
    NearSingularAlpha(f64),
    #[error("pixel ray does not meet the ground plane ahead of the vehicle")]
    AboveHorizon,
    #[error("pixel ({u}, {v}) lies outside the image")]
    PixelOutOfBounds { u: f64, v: f64 },
    #[error("polyline is empty")]
    EmptyPolyline,
    #[error("polyline needs at least two distinct points")]
    DegeneratePolyline,
    #[error("resampling interval must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("at least two points are required for a fit, got {0}")]
    TooFewPoints(usize),
    #[error("boundary-condition duration must be positive, got {0}")]
    NonPositiveDuration(f64),
    #[error("lane x-ranges [{0}, {1}] and [{2}, {3}] do not overlap")]
    DisjointRanges(f64, f64, f64, f64),
    #[error("target ran past the end of an open track")]
    PathExhausted,
    #[error("path needs at least two distinct points")]
    DegeneratePath,
    #[error("log is empty")]
    EmptyLog,
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("unknown override key `{0}`")]
    UnknownOverride(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
