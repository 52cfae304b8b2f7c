//! Deterministic, stochastic (Euler-Maruyama) and Caputo-fractional
//! simulation of the resistant-bacteria equation
//!
//! ```text
//! dR = [beta g(R) (N - R) - (gamma + mu) R] dt + sigma g(R) (N - R) dB,
//! g(R) = R / (1 + eps R)
//! ```
//!
//! on the invariant interval `(0, N)`, together with its thresholds,
//! equilibria and the statistics used to tell extinction from persistence.

pub mod analysis;
pub mod error;
pub mod exec;
pub mod fde;
pub mod grid;
pub mod mittag_leffler;
pub mod model;
pub mod ode;
pub mod params;
pub mod sde;

pub use analysis::{
    Histogram, Outcome, OutcomeKind, classify_outcome, level_crossings, log_slope,
    stationary_histogram,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use fde::{CaputoProblem, comparison_bound, integrate_caputo};
pub use grid::{Engine, TimeGrid, Trajectory};
pub use mittag_leffler::mittag_leffler;
pub use model::{
    Regime, ThresholdReport, compute_thresholds, equilibrium_deterministic, equilibrium_stochastic,
    functional_response,
};
pub use ode::{integrate_ode, step_rk4};
pub use params::ModelParams;
pub use sde::{EnsembleResult, IncrementRule, NoisePlan, simulate_ensemble, simulate_path};
