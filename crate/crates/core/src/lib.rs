//! Simulation and verification toolkit for the time-inhomogeneous skew
//! Brownian motion
//!
//! ```text
//! X_t = x + B_t + ∫_0^t (2α(s) − 1) dL_s(X)
//! ```
//!
//! where `L(X)` is the symmetric local time of `X` at zero. Solutions are
//! built by flipping the signs of the excursions of a Brownian path with
//! Bernoulli draws whose bias follows `α`, local time is estimated from
//! upcrossing counts or occupation times, and the transition kernel is
//! evaluated by deterministic quadrature. The [`verify`] module ties the two
//! together with Monte Carlo experiments.

pub mod alpha;
pub mod cli;
pub mod error;
pub mod excursion;
pub mod kernel;
pub mod local_time;
pub mod path;
pub mod quad;
pub mod report;
pub mod rng;
pub mod skew;
pub mod stats;
pub mod verify;

pub use alpha::{AlphaSpec, AlphaStep};
pub use error::{Error, Result};
pub use excursion::{decompose_excursions, Excursion, ExcursionSet};
pub use kernel::KernelQuery;
pub use local_time::{EstimatorKind, LocalTimeCurve};
pub use path::{SamplePath, TimeGrid};
pub use report::ExperimentReport;
pub use rng::{Purpose, RngSpec};
pub use skew::{SigmaDecomposition, SignAssignment};
