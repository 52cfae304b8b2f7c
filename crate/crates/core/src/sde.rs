//! Seeded Euler-Maruyama for
//! `dR = b(R) dt + sigma g(R) (N - R) dB`, single paths and ensembles.
//!
//! Reproducibility: a path is a pure function of (params, R0, grid,
//! [`NoisePlan`]). Path `i` of an ensemble uses seed `base_seed + i`
//! (wrapping), so an ensemble is reproducible regardless of how its paths
//! are scheduled.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{Engine, TimeGrid, Trajectory};
use crate::params::ModelParams;

/// Name of the bit generator behind every [`NoisePlan`].
pub const GENERATOR_ID: &str = "rand_chacha-0.9/ChaCha8Rng::seed_from_u64";

/// Projection margin, as a fraction of `N`.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IncrementRule {
    /// One 64-bit draw per increment, mapped through the normal quantile.
    #[default]
    GaussianInverseCdf,
    /// Polar pairs; the second value of each pair is used by the next step.
    BoxMuller,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoisePlan {
    pub seed: u64,
    pub increment_rule: IncrementRule,
}

impl NoisePlan {
    pub fn new(seed: u64) -> Self {
        NoisePlan {
            seed,
            increment_rule: IncrementRule::default(),
        }
    }

    pub fn generator_id(&self) -> &'static str {
        GENERATOR_ID
    }
}

/// Standard normal variates from a [`NoisePlan`].
pub struct NormalStream {
    rng: ChaCha8Rng,
    rule: IncrementRule,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(plan: &NoisePlan) -> Self {
        NormalStream {
            rng: ChaCha8Rng::seed_from_u64(plan.seed),
            rule: plan.increment_rule,
            spare: None,
        }
    }

    /// Uniform on the open interval (0, 1): 53 random bits, centred in
    /// their cell.
    #[inline]
    fn open_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        match self.rule {
            IncrementRule::GaussianInverseCdf => {
                let u = self.open_uniform();
                -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
            }
            IncrementRule::BoxMuller => {
                if let Some(z) = self.spare.take() {
                    return z;
                }
                let radius = (-2.0 * self.open_uniform().ln()).sqrt();
                let angle = std::f64::consts::TAU * self.open_uniform();
                let (s, c) = angle.sin_cos();
                self.spare = Some(radius * s);
                radius * c
            }
        }
    }
}

/// Projects a post-step value that left `(0, N)` back to
/// `[delta, N - delta]`, `delta = 1e-9 N`. Values already inside are
/// untouched. Returns whether a projection happened.
#[inline]
pub fn project(p: &ModelParams, r: f64) -> (f64, bool) {
    if r > 0.0 && r < p.population {
        (r, false)
    } else if r >= p.population {
        (p.population * (1.0 - BOUNDARY_MARGIN), true)
    } else {
        (p.population * BOUNDARY_MARGIN, true)
    }
}

/// Rejects steps for which a single drift increment can exceed `N`.
fn check_step(p: &ModelParams, dt: f64) -> Result<()> {
    let max_drift = p.peak_acquisition().max(p.removal_rate() * p.population);
    if max_drift * dt > p.population {
        return Err(Error::StepSize {
            t: 0.0,
            dt,
            suggested: p.population / max_drift,
        });
    }
    Ok(())
}

/// Euler-Maruyama path driven by caller-supplied standard normals, one per
/// step. Returns the stored values and the number of projections.
pub fn simulate_path_with<F>(
    p: &ModelParams,
    r0: f64,
    grid: &TimeGrid,
    mut normal: F,
) -> Result<(Vec<f64>, u64)>
where
    F: FnMut() -> f64,
{
    p.validate()?;
    p.check_initial(r0)?;
    check_step(p, grid.dt)?;
    let dt = grid.dt;
    let sqrt_dt = dt.sqrt();
    let mut values = Vec::with_capacity(grid.n_recorded());
    values.push(r0);
    let mut r = r0;
    let mut clamps = 0u64;
    for step in 0..grid.n_steps {
        let z = normal();
        let (next, clamped) = project(p, r + p.drift(r) * dt + p.diffusion(r) * sqrt_dt * z);
        clamps += u64::from(clamped);
        r = next;
        if (step + 1) % grid.stride == 0 {
            values.push(r);
        }
    }
    Ok((values, clamps))
}

pub fn simulate_path(
    p: &ModelParams,
    r0: f64,
    grid: &TimeGrid,
    noise: &NoisePlan,
) -> Result<Trajectory> {
    let mut stream = NormalStream::new(noise);
    let (values, clamp_events) = simulate_path_with(p, r0, grid, || stream.next_normal())?;
    Ok(Trajectory {
        times: grid.recorded_times(),
        values,
        params: *p,
        engine: Engine::Sde,
        seed: Some(noise.seed),
        clamp_events,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub paths: Vec<Trajectory>,
    pub n_paths: usize,
    pub base_seed: u64,
    /// Mean across paths at each stored time.
    pub per_time_mean: Vec<f64>,
    /// Population variance (divisor `n_paths`) across paths at each stored
    /// time.
    pub per_time_variance: Vec<f64>,
}

impl EnsembleResult {
    pub fn seed_of(base_seed: u64, index: usize) -> u64 {
        base_seed.wrapping_add(index as u64)
    }

    pub fn clamp_events(&self) -> u64 {
        self.paths.iter().map(|t| t.clamp_events).sum()
    }
}

/// `n_paths` independent paths on the default execution and increment rule.
pub fn simulate_ensemble(
    p: &ModelParams,
    r0: f64,
    grid: &TimeGrid,
    n_paths: usize,
    base_seed: u64,
) -> Result<EnsembleResult> {
    simulate_ensemble_with(
        p,
        r0,
        grid,
        n_paths,
        base_seed,
        IncrementRule::default(),
        Execution::default(),
    )
}

pub fn simulate_ensemble_with(
    p: &ModelParams,
    r0: f64,
    grid: &TimeGrid,
    n_paths: usize,
    base_seed: u64,
    rule: IncrementRule,
    exec: Execution,
) -> Result<EnsembleResult> {
    if n_paths == 0 {
        return Err(Error::Parameter("an ensemble needs at least one path".into()));
    }
    let times = grid.recorded_times();
    let paths = exec.try_map(n_paths, |i| {
        let plan = NoisePlan {
            seed: EnsembleResult::seed_of(base_seed, i),
            increment_rule: rule,
        };
        let mut stream = NormalStream::new(&plan);
        simulate_path_with(p, r0, grid, || stream.next_normal())
            .map(|(values, clamp_events)| Trajectory {
                times: times.clone(),
                values,
                params: *p,
                engine: Engine::Sde,
                seed: Some(plan.seed),
                clamp_events,
            })
            .map_err(|e| Error::Path {
                index: i,
                source: Box::new(e),
            })
    })?;

    // Welford over paths in index order.
    let len = times.len();
    let mut mean = vec![0.0; len];
    let mut m2 = vec![0.0; len];
    for (k, path) in paths.iter().enumerate() {
        let count = (k + 1) as f64;
        for ((m, s), &x) in mean.iter_mut().zip(m2.iter_mut()).zip(&path.values) {
            let delta = x - *m;
            *m += delta / count;
            *s += delta * (x - *m);
        }
    }
    let n = n_paths as f64;
    let variance = m2.into_iter().map(|s| s / n).collect();

    Ok(EnsembleResult {
        paths,
        n_paths,
        base_seed,
        per_time_mean: mean,
        per_time_variance: variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::integrate_euler;

    fn grid(t_end: f64, dt: f64) -> TimeGrid {
        TimeGrid::span(t_end, dt).unwrap()
    }

    #[test]
    fn normals_look_standard() {
        for rule in [IncrementRule::GaussianInverseCdf, IncrementRule::BoxMuller] {
            let mut s = NormalStream::new(&NoisePlan {
                seed: 7,
                increment_rule: rule,
            });
            let n = 200_000;
            let xs: Vec<f64> = (0..n).map(|_| s.next_normal()).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
            let tail = xs.iter().filter(|x| x.abs() > 1.959_963_985).count() as f64 / n as f64;
            assert!(mean.abs() < 0.01, "{rule:?} mean {mean}");
            assert!((var - 1.0).abs() < 0.01, "{rule:?} var {var}");
            assert!((tail - 0.05).abs() < 0.003, "{rule:?} tail {tail}");
        }
    }

    #[test]
    fn same_plan_same_bits() {
        let p = ModelParams::table(0.0, 1e-7, 1.0);
        let g = grid(20.0, 0.01);
        let a = simulate_path(&p, 1.0, &g, &NoisePlan::new(42)).unwrap();
        let b = simulate_path(&p, 1.0, &g, &NoisePlan::new(42)).unwrap();
        let c = simulate_path(&p, 1.0, &g, &NoisePlan::new(43)).unwrap();
        let bits = |t: &Trajectory| t.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn zero_noise_is_explicit_euler() {
        let p = ModelParams::table(0.0, 0.0, 1.0);
        let g = grid(50.0, 0.01);
        let sde = simulate_path(&p, 1.0, &g, &NoisePlan::new(3)).unwrap();
        let euler = integrate_euler(&p, 1.0, &g).unwrap();
        for (a, b) in sde.values.iter().zip(&euler.values) {
            assert!((a - b).abs() <= 1e-12 * p.population);
        }
    }

    #[test]
    fn projection_only_touches_exits() {
        let p = ModelParams::table(0.0, 0.0, 1.0);
        assert_eq!(project(&p, 1e-20), (1e-20, false));
        assert_eq!(project(&p, -5.0), (1e-3, true));
        assert_eq!(project(&p, 2e6), (1e6 * (1.0 - 1e-9), true));
        assert!(project(&p, f64::NAN).1);
    }

    #[test]
    fn oversized_step_rejected() {
        let p = ModelParams::table(2.0, 1e-6, 1.0);
        let err = simulate_path(&p, 5e5, &grid(10.0, 1.0), &NoisePlan::new(1)).unwrap_err();
        assert!(matches!(err, Error::StepSize { .. }));
    }

    #[test]
    fn single_path_ensemble_mean_is_the_path() {
        let p = ModelParams::table(0.0, 1e-7, 1.0);
        let e = simulate_ensemble(&p, 1.0, &grid(10.0, 0.01), 1, 9).unwrap();
        assert_eq!(e.per_time_mean, e.paths[0].values);
        assert!(e.per_time_variance.iter().all(|&v| v == 0.0));
        assert_eq!(e.paths[0].seed, Some(9));
    }

    #[test]
    fn noiseless_ensemble_has_zero_variance() {
        let p = ModelParams::table(0.0, 0.0, 1.0);
        let e = simulate_ensemble(&p, 1.0, &grid(10.0, 0.01), 100, 0).unwrap();
        assert!(e.per_time_variance.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ensemble_independent_of_execution() {
        let p = ModelParams::table(0.1, 1e-7, 1.0);
        let g = grid(5.0, 0.01);
        let run = |exec| {
            simulate_ensemble_with(&p, 10.0, &g, 16, 100, IncrementRule::BoxMuller, exec).unwrap()
        };
        assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    }

    #[test]
    fn path_errors_carry_index() {
        let p = ModelParams::table(0.0, 1e-7, 1.0);
        let err = simulate_ensemble(&p, 0.0, &grid(1.0, 0.01), 3, 0).unwrap_err();
        assert!(matches!(err, Error::Path { index: 0, .. }));
    }
}
