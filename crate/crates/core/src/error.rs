use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("paths live on different grids")]
    GridMismatch,

    #[error("non-finite path value at index {index}")]
    NonFinite { index: usize },

    #[error("path length {got} does not match grid with {expected} points")]
    LengthMismatch { expected: usize, got: usize },

    #[error("level width must be positive, got {0}")]
    InvalidEpsilon(f64),

    #[error("level width {eps} is below the resolution floor {floor} (3·√dt)")]
    BelowResolution { eps: f64, floor: f64 },

    #[error("empty or out-of-range window [{a}, {b}]")]
    EmptyWindow { a: f64, b: f64 },

    #[error("path must be nonnegative; found {value} at index {index}")]
    NegativePath { index: usize, value: f64 },

    #[error("invalid skewness function: {0}")]
    InvalidAlpha(String),

    #[error("shift {s} outside [0, {horizon}]")]
    ShiftOutOfRange { s: f64, horizon: f64 },

    #[error("horizon mismatch: {0} vs {1}")]
    HorizonMismatch(f64, f64),

    #[error("integrand is not constant on the excursion starting at grid index {index}")]
    NotConstantOnExcursion { index: usize },

    #[error("class-Σ invariant violated: {0}")]
    SigmaInvariant(String),

    #[error("invalid kernel query: {0}")]
    InvalidQuery(String),

    #[error(
        "quadrature did not reach tolerance after {subdivisions} subdivisions \
         (estimate {estimate:e}, error estimate {error_estimate:e})"
    )]
    Quadrature {
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("invalid experiment parameters: {0}")]
    InvalidExperiment(String),

    #[error("{0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
