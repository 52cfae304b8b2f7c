//! Vector field, noise coefficient, thresholds and equilibria of
//!
//! ```text
//! dR = [beta g(R) (N - R) - (gamma + mu) R] dt + sigma g(R) (N - R) dB,   g(R) = R / (1 + eps R)
//! ```
//!
//! shared by the ODE, SDE and Caputo engines. Everything here is a pure
//! function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Relative width of the band around a threshold value of 1 (or around a
/// zero numerator of the equilibrium formula) treated as the boundary case.
pub const BOUNDARY_RTOL: f64 = 1e-12;

/// Relative bracket width at which the persistence-level bisection stops.
pub const BISECTION_RTOL: f64 = 1e-12;

/// Allowed relative disagreement between the bisection root and the
/// closed-form construction of the persistence level.
pub const CROSS_CHECK_RTOL: f64 = 1e-9;

/// Saturating contact term `g(R) = R / (1 + eps R)`.
pub fn functional_response(r: f64, saturation: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain("R", r, "[0, inf)"));
    }
    if saturation.is_nan() || saturation < 0.0 {
        return Err(Error::domain("epsilon", saturation, "[0, inf)"));
    }
    Ok(response(r, saturation))
}

#[inline]
fn response(r: f64, saturation: f64) -> f64 {
    r / (1.0 + saturation * r)
}

/// `phi(R) = (N - R) / (1 + eps R)`, the per-capita acquisition factor.
#[inline]
fn acquisition_factor(p: &ModelParams, r: f64) -> f64 {
    (p.population - r) / (1.0 + p.saturation * r)
}

impl ModelParams {
    /// Deterministic vector field `b(R)`. Defined for any `R`; solvers may
    /// probe slightly outside `[0, N]`, use [`ModelParams::drift_checked`]
    /// to reject that.
    #[inline]
    pub fn drift(&self, r: f64) -> f64 {
        self.conjugation * response(r, self.saturation) * (self.population - r)
            - self.removal_rate() * r
    }

    pub fn drift_checked(&self, r: f64) -> Result<f64> {
        self.check_closed(r)?;
        Ok(self.drift(r))
    }

    /// Diffusion coefficient `sigma g(R) (N - R)`.
    #[inline]
    pub fn diffusion(&self, r: f64) -> f64 {
        self.noise * response(r, self.saturation) * (self.population - r)
    }

    pub fn diffusion_checked(&self, r: f64) -> Result<f64> {
        self.check_closed(r)?;
        Ok(self.diffusion(r))
    }

    /// The stochastic Lyapunov operator applied to `V = ln R`:
    /// `beta phi - (gamma + mu) - sigma^2 phi^2 / 2` with
    /// `phi = (N - R) / (1 + eps R)`.
    pub fn lyapunov_sv(&self, r: f64) -> Result<f64> {
        if !self.in_open_domain(r) {
            return Err(Error::domain("R", r, "(0, N)"));
        }
        Ok(self.lyapunov_sv_unchecked(r))
    }

    #[inline]
    fn lyapunov_sv_unchecked(&self, r: f64) -> f64 {
        let phi = acquisition_factor(self, r);
        self.conjugation * phi - self.removal_rate() - 0.5 * self.noise * self.noise * phi * phi
    }

    /// One-sided limits of [`ModelParams::lyapunov_sv`] at `0+` and `N-`.
    pub fn lyapunov_sv_limits(&self) -> (f64, f64) {
        let n = self.population;
        let at_zero =
            self.conjugation * n - self.removal_rate() - 0.5 * self.noise * self.noise * n * n;
        (at_zero, -self.removal_rate())
    }

    /// `max over [0, N]` of `beta g(R) (N - R)`, attained at
    /// `R* = (sqrt(1 + eps N) - 1) / eps` (or `N / 2` when `eps = 0`).
    pub fn peak_acquisition(&self) -> f64 {
        let n = self.population;
        let eps = self.saturation;
        let r_star = if eps > 0.0 {
            // (sqrt(1 + eps N) - 1) / eps without the cancellation
            n / ((1.0 + eps * n).sqrt() + 1.0)
        } else {
            0.5 * n
        };
        self.conjugation * response(r_star, eps) * (n - r_star)
    }

    fn check_closed(&self, r: f64) -> Result<()> {
        if r.is_nan() || r < 0.0 || r > self.population {
            Err(Error::domain("R", r, "[0, N]"))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Extinction,
    Persistence,
    /// The threshold equals 1 to within [`BOUNDARY_RTOL`].
    Indeterminate,
}

impl Regime {
    pub fn from_threshold(k0: f64) -> Self {
        if (k0 - 1.0).abs() <= BOUNDARY_RTOL {
            Regime::Indeterminate
        } else if k0 < 1.0 {
            Regime::Extinction
        } else {
            Regime::Persistence
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub k0_d: f64,
    pub k0_s: f64,
    pub k0_f: f64,
    /// Interior equilibrium of the ODE (and of the Caputo equation).
    pub xi_d: Option<f64>,
    /// Level the SDE visits infinitely often.
    pub xi_s: Option<f64>,
    pub regime_d: Regime,
    pub regime_s: Regime,
    pub regime_f: Regime,
    /// `sigma^2 N <= beta`, the extra hypothesis of almost-sure extinction.
    pub noise_bound_holds: bool,
    /// `(beta N - gamma - mu)/(beta N) - beta/(gamma + mu) < eps < 1`, the
    /// side condition of the fractional persistence result. Reported only.
    pub fractional_side_condition: bool,
}

pub fn compute_thresholds(p: &ModelParams) -> Result<ThresholdReport> {
    p.validate()?;
    let removal = p.removal_rate();
    let n = p.population;
    let k0_d = p.conjugation * n / removal;
    let k0_s = k0_d - p.noise * p.noise * n * n / (2.0 * removal);
    let k0_f = k0_d;

    let regime_d = Regime::from_threshold(k0_d);
    let regime_s = Regime::from_threshold(k0_s);
    let xi_d = match regime_d {
        Regime::Persistence => Some(equilibrium_deterministic(p)?),
        _ => None,
    };
    let xi_s = match regime_s {
        Regime::Persistence => Some(equilibrium_stochastic(p)?),
        _ => None,
    };

    let beta_n = p.conjugation * n;
    let lower = (beta_n - removal) / beta_n - p.conjugation / removal;
    Ok(ThresholdReport {
        k0_d,
        k0_s,
        k0_f,
        xi_d,
        xi_s,
        regime_d,
        regime_s,
        regime_f: Regime::from_threshold(k0_f),
        noise_bound_holds: p.noise * p.noise * n <= p.conjugation,
        fractional_side_condition: lower < p.saturation && p.saturation < 1.0,
    })
}

/// `xi_d = (beta N - gamma - mu) / (beta + eps (gamma + mu))`.
pub fn equilibrium_deterministic(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let removal = p.removal_rate();
    let beta_n = p.conjugation * p.population;
    let margin = beta_n - removal;
    let k0_d = beta_n / removal;
    if margin <= BOUNDARY_RTOL * beta_n.max(removal) {
        return Err(Error::NoInteriorEquilibrium { k0_d, margin });
    }
    Ok(margin / (p.conjugation + p.saturation * removal))
}

/// Closed-form persistence level: the smaller root `eta` of
/// `beta u - (gamma + mu) - sigma^2 u^2 / 2`, mapped back through
/// `phi(R) = eta`. Written as `2 (gamma + mu) / (beta + sqrt(D))` so that it
/// stays accurate as `sigma -> 0`.
pub fn persistence_level_closed_form(p: &ModelParams) -> Result<f64> {
    let removal = p.removal_rate();
    let disc = p.conjugation * p.conjugation - 2.0 * p.noise * p.noise * removal;
    if disc < 0.0 {
        return Err(Error::Parameter(format!(
            "beta^2 - 2 sigma^2 (gamma + mu) = {disc:e} is negative"
        )));
    }
    let eta = 2.0 * removal / (p.conjugation + disc.sqrt());
    Ok((p.population - eta) / (1.0 + p.saturation * eta))
}

/// The unique root of [`ModelParams::lyapunov_sv`] in `(0, N)`, located by
/// bisection and cross-checked against [`persistence_level_closed_form`].
pub fn equilibrium_stochastic(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let report_k0s = {
        let removal = p.removal_rate();
        let n = p.population;
        p.conjugation * n / removal - p.noise * p.noise * n * n / (2.0 * removal)
    };
    if Regime::from_threshold(report_k0s) != Regime::Persistence {
        return Err(Error::NoPersistenceLevel { k0_s: report_k0s });
    }
    let closed = persistence_level_closed_form(p)?;

    let delta = 1e-12 * p.population;
    let mut lo = delta;
    let mut hi = p.population - delta;
    let f_lo = p.lyapunov_sv_unchecked(lo);
    let f_hi = p.lyapunov_sv_unchecked(hi);
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(Error::Inconsistent(format!(
            "L_sV has no sign change on (delta, N - delta): {f_lo:e}, {f_hi:e}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECTION_RTOL * mid {
            break;
        }
        if p.lyapunov_sv_unchecked(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);

    if (root - closed).abs() > CROSS_CHECK_RTOL * closed.abs() {
        return Err(Error::Inconsistent(format!(
            "bisection gives {root}, closed form gives {closed}"
        )));
    }
    Ok(root)
}
