use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Uniform time grid. Engines step every `dt`; only every `stride`-th
/// point (always including both ends) is stored in the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub stride: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t0.is_finite() && t_end.is_finite() && t_end > t0) {
            return Err(Error::Parameter(format!(
                "grid needs t_end > t0, got [{t0}, {t_end}]"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::domain("dt", dt, "(0, inf)"));
        }
        let steps = ((t_end - t0) / dt).round();
        if steps < 1.0 || steps > usize::MAX as f64 {
            return Err(Error::Parameter(format!(
                "dt = {dt} does not fit in [{t0}, {t_end}]"
            )));
        }
        Ok(TimeGrid {
            t0,
            t_end,
            dt,
            n_steps: steps as usize,
            stride: 1,
        })
    }

    /// Convenience for grids starting at zero.
    pub fn span(t_end: f64, dt: f64) -> Result<Self> {
        TimeGrid::new(0.0, t_end, dt)
    }

    pub fn with_stride(mut self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.n_steps.is_multiple_of(stride) {
            return Err(Error::Parameter(format!(
                "stride {stride} must divide the {} steps",
                self.n_steps
            )));
        }
        self.stride = stride;
        Ok(self)
    }

    #[inline]
    pub fn time(&self, step: usize) -> f64 {
        self.t0 + step as f64 * self.dt
    }

    /// Number of stored points, `n_steps / stride + 1`.
    #[inline]
    pub fn n_recorded(&self) -> usize {
        self.n_steps / self.stride + 1
    }

    pub fn recorded_times(&self) -> Arc<[f64]> {
        (0..self.n_recorded())
            .map(|i| self.time(i * self.stride))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Ode,
    Sde,
    Fde,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Ode => "ode",
            Engine::Sde => "sde",
            Engine::Fde => "fde",
        }
    }
}

/// One solution path on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Shared between the paths of an ensemble.
    pub times: Arc<[f64]>,
    pub values: Vec<f64>,
    pub params: ModelParams,
    pub engine: Engine,
    /// Noise seed; `None` for the deterministic engines.
    pub seed: Option<u64>,
    /// Steps that had to be retried or projected back into `(0, N)`.
    pub clamp_events: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("trajectory is never empty")
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }

    /// Value at the first stored time `>= t`.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let i = self.times.partition_point(|&s| s < t);
        self.values.get(i).copied()
    }

    /// The points with `t_from <= t <= t_to`.
    pub fn restrict(&self, t_from: f64, t_to: f64) -> Trajectory {
        let lo = self.times.partition_point(|&s| s < t_from);
        let hi = self.times.partition_point(|&s| s <= t_to);
        let hi = hi.max(lo);
        Trajectory {
            times: self.times[lo..hi].into(),
            values: self.values[lo..hi].to_vec(),
            ..self.clone()
        }
    }
}
