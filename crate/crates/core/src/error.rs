use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameters: {0}")]
    Parameter(String),

    /// `K0d <= 1`, or `beta*N - gamma - mu` is zero to rounding.
    #[error("no interior equilibrium (K0d = {k0_d}, beta*N - gamma - mu = {margin:e})")]
    NoInteriorEquilibrium { k0_d: f64, margin: f64 },

    #[error("no stochastic persistence level (K0s = {k0_s})")]
    NoPersistenceLevel { k0_s: f64 },

    #[error("a step of {dt} leaves (0, N) at t = {t} even after halving; try dt <= {suggested:e}")]
    StepSize { t: f64, dt: f64, suggested: f64 },

    #[error("Mittag-Leffler E_{alpha}({z}) overflows")]
    Range { alpha: f64, z: f64 },

    #[error("grid of {points} points exceeds the {limit}-point budget")]
    GridTooLong { points: usize, limit: usize },

    #[error("no samples left after burn-in")]
    EmptySample,

    #[error("path {index}: {source}")]
    Path {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// Two independent routes to the same quantity disagree.
    #[error("cross-check failed: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }
}
