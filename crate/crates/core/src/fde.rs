//! Caputo fractional integration, `D^a R = b(R)`, by the Adams-Bashforth-
//! Moulton predictor-corrector with full memory on a uniform grid.
//!
//! With `y_j ~ R(t_j)`, `f_j = b(y_j)` and `h` the step:
//!
//! ```text
//! predictor  y*_{n+1} = y0 + h^a/G(a+1) * sum_{j=0..n} b_{n-j} f_j
//!                       b_k = (k+1)^a - k^a
//! corrector  y_{n+1}  = y0 + h^a/G(a+2) * (f(y*_{n+1}) + a0_n f_0
//!                                          + sum_{j=1..n} A_{n-j+1} f_j)
//!                       A_k  = (k+1)^(a+1) - 2 k^(a+1) + (k-1)^(a+1)
//!                       a0_n = n^(a+1) - (n-a) (n+1)^a
//! ```
//!
//! Each step costs O(n). At `a = 1` the memory terms collapse and the
//! scheme is run in its one-step form (Euler predictor, trapezoidal
//! corrector).

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{Engine, TimeGrid, Trajectory};
use crate::mittag_leffler::mittag_leffler;
use crate::params::ModelParams;
use crate::sde::project;

/// Longest grid (in points) the full-memory scheme accepts.
pub const MAX_GRID_POINTS: usize = 10_000_000;

/// Above this index the weights switch from direct powers to series in
/// `1/k`, which avoid the cancellation in the differences.
const SERIES_FROM: usize = 16;

/// `(k+1)^a - k^a`.
fn rectangle_weight(alpha: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let k = k as f64;
    k.powf(alpha) * (alpha * (1.0 / k).ln_1p()).exp_m1()
}

/// `(k+1)^s - 2 k^s + (k-1)^s` with `s = a + 1`, `k >= 1`.
fn trapezoid_weight(alpha: f64, k: usize) -> f64 {
    let s = alpha + 1.0;
    let kf = k as f64;
    if k < SERIES_FROM {
        return (kf + 1.0).powf(s) - 2.0 * kf.powf(s) + (kf - 1.0).powf(s);
    }
    // k^s * 2 * sum_{m>=1} C(s, 2m) u^(2m), u = 1/k
    let u2 = 1.0 / (kf * kf);
    let mut binom = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for m in 1..=12 {
        let i = 2 * m;
        binom *= (s - (i - 2) as f64) * (s - (i - 1) as f64) / ((i - 1) * i) as f64;
        power *= u2;
        let term = binom * power;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    2.0 * kf.powf(s) * sum
}

/// `n^(a+1) - (n-a)(n+1)^a`, the corrector weight of `f_0`.
fn start_weight(alpha: f64, n: usize) -> f64 {
    let nf = n as f64;
    if n < SERIES_FROM {
        return nf.powf(alpha + 1.0) - (nf - alpha) * (nf + 1.0).powf(alpha);
    }
    // n^(a+1) * -sum_{m>=2} (C(a, m) - a C(a, m-1)) u^m, u = 1/n
    let u = 1.0 / nf;
    let mut prev = alpha; // C(a, 1)
    let mut power = u;
    let mut sum = 0.0;
    for m in 2..=24 {
        let binom = prev * (alpha - (m - 1) as f64) / m as f64;
        power *= u;
        let term = (binom - alpha * prev) * power;
        sum += term;
        prev = binom;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    -nf.powf(alpha + 1.0) * sum
}

/// `sum_j x[j] * w[len - 1 - j]` with four independent accumulators.
#[inline]
fn dot_reversed(x: &[f64], w: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), w.len());
    let mut acc = [0.0f64; 4];
    let xs = x.chunks_exact(4);
    let ws = w.rchunks_exact(4);
    let (xr, wr) = (xs.remainder(), ws.remainder());
    for (a, b) in xs.zip(ws) {
        acc[0] += a[0] * b[3];
        acc[1] += a[1] * b[2];
        acc[2] += a[2] * b[1];
        acc[3] += a[3] * b[0];
    }
    let mut tail = 0.0;
    for (a, b) in xr.iter().zip(wr.iter().rev()) {
        tail += a * b;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Incremental ABM stepper for a scalar Caputo problem `D^a y = f(y)`.
///
/// A step is `predict`, then `correct`, then `accept`; the caller may
/// adjust both intermediate values (the model engine projects them into
/// `(0, N)`).
pub struct AbmStepper<F> {
    f: F,
    alpha: f64,
    h: f64,
    y0: f64,
    one_step: bool,
    predictor_scale: f64,
    corrector_scale: f64,
    rect: Vec<f64>,
    trap: Vec<f64>,
    history: Vec<f64>,
    current: f64,
    n: usize,
}

impl<F: FnMut(f64) -> f64> AbmStepper<F> {
    pub fn new(mut f: F, alpha: f64, h: f64, y0: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain("alpha", alpha, "(0, 1]"));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::domain("h", h, "(0, inf)"));
        }
        let ha = h.powf(alpha);
        let f0 = f(y0);
        Ok(AbmStepper {
            f,
            alpha,
            h,
            y0,
            one_step: alpha == 1.0,
            predictor_scale: ha / gamma(alpha + 1.0),
            corrector_scale: ha / gamma(alpha + 2.0),
            rect: vec![1.0],
            trap: vec![0.0],
            history: vec![f0],
            current: y0,
            n: 0,
        })
    }

    /// Keeps the full-memory sums at `a = 1` instead of the one-step form.
    pub fn full_memory(mut self) -> Self {
        self.one_step = false;
        self
    }

    /// Index of the last accepted point.
    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    pub fn predict(&mut self) -> f64 {
        let n = self.steps();
        if self.one_step {
            return self.current + self.h * self.history[0];
        }
        while self.rect.len() <= n {
            let k = self.rect.len();
            self.rect.push(rectangle_weight(self.alpha, k));
            self.trap.push(trapezoid_weight(self.alpha, k));
        }
        self.y0 + self.predictor_scale * dot_reversed(&self.history, &self.rect[..=n])
    }

    pub fn correct(&mut self, predicted: f64) -> f64 {
        let n = self.steps();
        let fp = (self.f)(predicted);
        if self.one_step {
            return self.current + 0.5 * self.h * (self.history[0] + fp);
        }
        let memory = if n == 0 {
            0.0
        } else {
            dot_reversed(&self.history[1..], &self.trap[1..=n])
        };
        let start = start_weight(self.alpha, n) * self.history[0];
        self.y0 + self.corrector_scale * (fp + start + memory)
    }

    pub fn accept(&mut self, y: f64) {
        let fy = (self.f)(y);
        if self.one_step {
            // Only the latest slope is needed.
            self.history[0] = fy;
        } else {
            self.history.push(fy);
        }
        self.n += 1;
        self.current = y;
    }
}

/// Solves `D^a y = f(y)`, `y(t0) = y0`, on `grid`; returns every stored
/// value. No projection is applied.
pub fn solve_scalar<F: FnMut(f64) -> f64>(
    f: F,
    y0: f64,
    alpha: f64,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    check_budget(grid)?;
    let mut stepper = AbmStepper::new(f, alpha, grid.dt, y0)?;
    let mut out = Vec::with_capacity(grid.n_recorded());
    out.push(y0);
    for step in 0..grid.n_steps {
        let pred = stepper.predict();
        let y = stepper.correct(pred);
        stepper.accept(y);
        if (step + 1) % grid.stride == 0 {
            out.push(y);
        }
    }
    Ok(out)
}

fn check_budget(grid: &TimeGrid) -> Result<()> {
    let points = grid.n_steps.saturating_add(1);
    if points > MAX_GRID_POINTS {
        return Err(Error::GridTooLong {
            points,
            limit: MAX_GRID_POINTS,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaputoProblem {
    pub params: ModelParams,
    pub r0: f64,
    pub alpha: f64,
    pub grid: TimeGrid,
}

impl CaputoProblem {
    /// Takes the order from `params.order`.
    pub fn new(params: ModelParams, r0: f64, grid: TimeGrid) -> Self {
        CaputoProblem {
            params,
            r0,
            alpha: params.order,
            grid,
        }
    }

    fn checked_params(&self) -> Result<ModelParams> {
        let p = self.params.with_order(self.alpha);
        p.validate()?;
        p.check_initial(self.r0)?;
        check_budget(&self.grid)?;
        Ok(p)
    }

    /// Whether `R0` lies in `(0, K0f)`, the interval on which the invariance
    /// result for the fractional model is stated. Reported, never enforced:
    /// `K0f` is a pure number while `R` counts bacteria.
    pub fn in_stated_invariance_interval(&self) -> bool {
        let k0_f = self.params.conjugation * self.params.population / self.params.removal_rate();
        self.r0 > 0.0 && self.r0 < k0_f
    }
}

/// Integrates the Caputo model over the whole grid.
pub fn integrate_caputo(prob: &CaputoProblem) -> Result<Trajectory> {
    integrate_caputo_until(prob, |_, _| false)
}

/// Like [`integrate_caputo`], but stops after the first stored point for
/// which `stop(t, R)` holds; the trajectory then ends at that point.
pub fn integrate_caputo_until<S>(prob: &CaputoProblem, mut stop: S) -> Result<Trajectory>
where
    S: FnMut(f64, f64) -> bool,
{
    let p = prob.checked_params()?;
    let grid = &prob.grid;
    let mut stepper = AbmStepper::new(|r| p.drift(r), prob.alpha, grid.dt, prob.r0)?;
    let mut values = Vec::with_capacity(grid.n_recorded());
    values.push(prob.r0);
    let mut clamps = 0u64;
    if !stop(grid.t0, prob.r0) {
        for step in 0..grid.n_steps {
            let (pred, c1) = project(&p, stepper.predict());
            let (y, c2) = project(&p, stepper.correct(pred));
            clamps += u64::from(c1 || c2);
            stepper.accept(y);
            if (step + 1) % grid.stride == 0 {
                values.push(y);
                if stop(grid.time(step + 1), y) {
                    break;
                }
            }
        }
    }
    let times = grid.recorded_times();
    let times = if values.len() == times.len() {
        times
    } else {
        times[..values.len()].into()
    };
    Ok(Trajectory {
        times,
        values,
        params: p,
        engine: Engine::Fde,
        seed: None,
        clamp_events: clamps,
    })
}

/// Upper bound from the comparison principle:
/// `D^a R <= c* - (gamma + mu) R` with `c*` the peak acquisition rate, so
/// `R(t) <= (R0 - c) E_a(-(gamma + mu) t^a) + c`, `c = c* / (gamma + mu)`.
pub fn comparison_bound(p: &ModelParams, r0: f64, alpha: f64, t: f64) -> Result<f64> {
    p.validate()?;
    if !(t >= 0.0) {
        return Err(Error::domain("t", t, "[0, inf)"));
    }
    let removal = p.removal_rate();
    let c = p.peak_acquisition() / removal;
    let e = mittag_leffler(alpha, -removal * t.powf(alpha))?;
    Ok((r0 - c) * e + c)
}
