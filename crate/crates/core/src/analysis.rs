//! Post-processing of trajectories and ensembles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Engine, Trajectory};
use crate::model::{Regime, compute_thresholds};
use crate::params::ModelParams;
use crate::sde::EnsembleResult;

/// Below one bacterium the resistant class counts as extinct.
pub const EXTINCTION_FLOOR: f64 = 1.0;
/// Relative half-width of the band a persistent tail must stay in.
pub const PERSISTENCE_BAND: f64 = 0.02;
/// Fraction of the stored points that forms the terminal window.
pub const TERMINAL_WINDOW: f64 = 0.1;
pub const DEFAULT_BURN_IN: f64 = 0.5;
pub const DEFAULT_BINS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeKind {
    Extinct,
    Persistent,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub kind: OutcomeKind,
    pub terminal_value: f64,
    /// Mean of the terminal window, when the run persists.
    pub attractor_estimate: Option<f64>,
    /// Decay rate over the last half; absent if a value is not positive.
    pub log_slope: Option<f64>,
    /// What the threshold of the trajectory's engine predicts.
    pub expected: Regime,
}

fn terminal_window(values: &[f64]) -> &[f64] {
    let n = values.len();
    let k = ((n as f64 * TERMINAL_WINDOW).ceil() as usize).clamp(1, n);
    &values[n - k..]
}

pub fn classify_outcome(traj: &Trajectory, p: &ModelParams) -> Outcome {
    let window = terminal_window(&traj.values);
    let max = window.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let level = window.iter().sum::<f64>() / window.len() as f64;
    let kind = if max < EXTINCTION_FLOOR {
        OutcomeKind::Extinct
    } else if level > EXTINCTION_FLOOR
        && window
            .iter()
            .all(|v| (v - level).abs() <= PERSISTENCE_BAND * level)
    {
        OutcomeKind::Persistent
    } else {
        OutcomeKind::Indeterminate
    };
    let expected = match compute_thresholds(p) {
        Ok(report) => match traj.engine {
            Engine::Ode => report.regime_d,
            Engine::Sde => report.regime_s,
            Engine::Fde => report.regime_f,
        },
        Err(_) => Regime::Indeterminate,
    };
    Outcome {
        kind,
        terminal_value: traj.terminal(),
        attractor_estimate: (kind == OutcomeKind::Persistent).then_some(level),
        log_slope: log_slope(traj).ok(),
        expected,
    }
}

/// Least-squares slope of `ln R` against `t` over the last half of the
/// stored points.
pub fn log_slope(traj: &Trajectory) -> Result<f64> {
    if let Some(&bad) = traj.values.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::domain("R", bad, "(0, inf) for a log fit"));
    }
    let n = traj.len();
    if n < 2 {
        return Err(Error::Parameter("a slope needs at least two points".into()));
    }
    let from = (n / 2).min(n - 2);
    let ts = &traj.times[from..];
    let ys: Vec<f64> = traj.values[from..].iter().map(|v| v.ln()).collect();
    let m = ts.len() as f64;
    let t_mean = ts.iter().sum::<f64>() / m;
    let y_mean = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in ts.iter().zip(&ys) {
        let dt = t - t_mean;
        sxy += dt * (y - y_mean);
        sxx += dt * dt;
    }
    Ok(sxy / sxx)
}

/// Sign changes of `R - level` between stored points. Points exactly on
/// the level carry no sign and are skipped.
pub fn level_crossings(traj: &Trajectory, level: f64) -> usize {
    crossings(&traj.values, level)
}

fn crossings(values: &[f64], level: f64) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in values {
        let s = v - level;
        if s == 0.0 || s.is_nan() {
            continue;
        }
        if last != 0.0 && (s > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = s;
    }
    count
}

/// First stored time with `|R - level| <= rel_band * level`.
pub fn band_entry_time(traj: &Trajectory, level: f64, rel_band: f64) -> Option<f64> {
    traj.points()
        .find(|&(_, r)| (r - level).abs() <= rel_band * level)
        .map(|(t, _)| t)
}

/// Index of the first point kept after discarding `burn_in` of the grid.
fn burn_in_start(len: usize, burn_in: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&burn_in) {
        return Err(Error::domain("burn_in", burn_in, "[0, 1)"));
    }
    Ok((len as f64 * burn_in).floor() as usize)
}

/// Time average of the ensemble mean after burn-in.
pub fn post_burn_in_mean(ens: &EnsembleResult, burn_in: f64) -> Result<f64> {
    let from = burn_in_start(ens.per_time_mean.len(), burn_in)?;
    let tail = &ens.per_time_mean[from..];
    if tail.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Fraction of paths crossing `level` at least `min_crossings` times within
/// `[t_from, t_to]`.
pub fn crossing_fraction(
    ens: &EnsembleResult,
    level: f64,
    t_from: f64,
    t_to: f64,
    min_crossings: usize,
) -> f64 {
    let hits = ens
        .paths
        .iter()
        .filter(|p| {
            let lo = p.times.partition_point(|&s| s < t_from);
            let hi = p.times.partition_point(|&s| s <= t_to).max(lo);
            crossings(&p.values[lo..hi], level) >= min_crossings
        })
        .count();
    hits as f64 / ens.paths.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `n_bins + 1` equal-width edges from 0 to `N`; bins are `(left, right]`.
    pub bin_edges: Vec<f64>,
    pub bin_mass: Vec<f64>,
    pub n_samples: usize,
    pub burn_in_fraction: f64,
    /// Mean of the pooled samples themselves.
    pub sample_mean: f64,
}

impl Histogram {
    /// Mean of the binned distribution, placing each bin's mass at its centre.
    pub fn mean(&self) -> f64 {
        self.bin_edges
            .windows(2)
            .zip(&self.bin_mass)
            .map(|(e, m)| 0.5 * (e[0] + e[1]) * m)
            .sum()
    }

    pub fn n_bins(&self) -> usize {
        self.bin_mass.len()
    }
}

/// Pools every post-burn-in value of every path (path-major order) into
/// `n_bins` equal bins over `(0, N]`.
pub fn stationary_histogram(ens: &EnsembleResult, burn_in: f64, n_bins: usize) -> Result<Histogram> {
    if n_bins < 2 {
        return Err(Error::Parameter(format!("need at least 2 bins, got {n_bins}")));
    }
    let first = ens.paths.first().ok_or(Error::EmptySample)?;
    let n = first.params.population;
    let from = burn_in_start(first.len(), burn_in)?;
    let width = n / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    let mut total = 0usize;
    let mut sum = 0.0;
    for path in &ens.paths {
        for &x in &path.values[from.min(path.len())..] {
            let bin = ((x / width).ceil() as isize - 1).clamp(0, n_bins as isize - 1) as usize;
            counts[bin] += 1;
            total += 1;
            sum += x;
        }
    }
    if total == 0 {
        return Err(Error::EmptySample);
    }
    let bin_edges = (0..=n_bins)
        .map(|i| if i == n_bins { n } else { i as f64 * width })
        .collect();
    let bin_mass = counts.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(Histogram {
        bin_edges,
        bin_mass,
        n_samples: total,
        burn_in_fraction: burn_in,
        sample_mean: sum / total as f64,
    })
}
