//! Fixed-step classical RK4 for the deterministic equation, with a
//! step-halving guard that keeps every stage inside `(0, N)`.

use crate::error::{Error, Result};
use crate::grid::{Engine, TimeGrid, Trajectory};
use crate::params::ModelParams;

/// Halvings tried before a step that keeps leaving `(0, N)` is an error.
pub const MAX_HALVINGS: u32 = 20;

/// Default step, in days.
pub const DEFAULT_DT: f64 = 0.01;

/// One classical RK4 step of the drift.
pub fn step_rk4(p: &ModelParams, r: f64, dt: f64) -> Result<f64> {
    p.check_initial(r)?;
    Ok(rk4_stages(p, r, dt).4)
}

/// Returns the three interior stage points and the result.
#[inline]
fn rk4_stages(p: &ModelParams, r: f64, dt: f64) -> (f64, f64, f64, f64, f64) {
    let k1 = p.drift(r);
    let r2 = r + 0.5 * dt * k1;
    let k2 = p.drift(r2);
    let r3 = r + 0.5 * dt * k2;
    let k3 = p.drift(r3);
    let r4 = r + dt * k3;
    let k4 = p.drift(r4);
    let out = r + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    (k1, r2, r3, r4, out)
}

struct Guard<'a> {
    p: &'a ModelParams,
    retries: u64,
}

impl Guard<'_> {
    fn advance(&mut self, r: f64, t: f64, dt: f64, depth: u32) -> Result<f64> {
        let (_, r2, r3, r4, out) = rk4_stages(self.p, r, dt);
        let p = self.p;
        if p.in_open_domain(r2) && p.in_open_domain(r3) && p.in_open_domain(r4) && p.in_open_domain(out)
        {
            return Ok(out);
        }
        if depth >= MAX_HALVINGS {
            return Err(Error::StepSize {
                t,
                dt,
                suggested: dt / 2.0,
            });
        }
        self.retries += 1;
        let half = 0.5 * dt;
        let mid = self.advance(r, t, half, depth + 1)?;
        self.advance(mid, t + half, half, depth + 1)
    }
}

/// Integrates `dR/dt = b(R)` from `r0` over `grid` with RK4.
pub fn integrate_ode(p: &ModelParams, r0: f64, grid: &TimeGrid) -> Result<Trajectory> {
    p.validate()?;
    p.check_initial(r0)?;
    let mut guard = Guard { p, retries: 0 };
    let mut values = Vec::with_capacity(grid.n_recorded());
    values.push(r0);
    let mut r = r0;
    for step in 0..grid.n_steps {
        r = guard
            .advance(r, grid.time(step), grid.dt, 0)
            .map_err(|e| match e {
                Error::StepSize { t, .. } => Error::StepSize {
                    t,
                    dt: grid.dt,
                    suggested: grid.dt / 2f64.powi(MAX_HALVINGS as i32 + 1),
                },
                other => other,
            })?;
        if (step + 1) % grid.stride == 0 {
            values.push(r);
        }
    }
    Ok(Trajectory {
        times: grid.recorded_times(),
        values,
        params: *p,
        engine: Engine::Ode,
        seed: None,
        clamp_events: guard.retries,
    })
}

/// Explicit Euler with the same boundary projection as the SDE engine; the
/// noiseless limit of Euler-Maruyama.
pub fn integrate_euler(p: &ModelParams, r0: f64, grid: &TimeGrid) -> Result<Trajectory> {
    p.validate()?;
    p.check_initial(r0)?;
    let mut values = Vec::with_capacity(grid.n_recorded());
    values.push(r0);
    let mut r = r0;
    let mut clamps = 0;
    for step in 0..grid.n_steps {
        let (next, clamped) = crate::sde::project(p, r + p.drift(r) * grid.dt);
        clamps += u64::from(clamped);
        r = next;
        if (step + 1) % grid.stride == 0 {
            values.push(r);
        }
    }
    Ok(Trajectory {
        times: grid.recorded_times(),
        values,
        params: *p,
        engine: Engine::Ode,
        seed: None,
        clamp_events: clamps,
    })
}
