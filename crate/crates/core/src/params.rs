use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rate constants of the resistance-reversal model. All rates are per day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Total bacterial population `N` (sensitive plus resistant).
    pub population: f64,
    /// Turnover rate `mu`.
    pub turnover: f64,
    /// Conjugation (plasmid acquisition) rate `beta`, per count per day.
    pub conjugation: f64,
    /// Plasmid-loss (reversal) rate `gamma`.
    pub plasmid_loss: f64,
    /// Saturation `epsilon` of the functional response, per count.
    pub saturation: f64,
    /// Intensity `sigma` of the white-noise perturbation of `beta`.
    pub noise: f64,
    /// Caputo derivative order `alpha` in (0, 1].
    pub order: f64,
}

impl ModelParams {
    /// The E. coli / colistin parameter set: `N = 1e6`, `mu = 0.1`,
    /// `beta = 5e-7`, `epsilon = 1e-6`, with the swept quantities supplied.
    pub fn table(plasmid_loss: f64, noise: f64, order: f64) -> Self {
        ModelParams {
            population: 1e6,
            turnover: 0.1,
            conjugation: 5e-7,
            plasmid_loss,
            saturation: 1e-6,
            noise,
            order,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("N", self.population),
            ("mu", self.turnover),
            ("beta", self.conjugation),
            ("gamma", self.plasmid_loss),
            ("epsilon", self.saturation),
            ("sigma", self.noise),
            ("alpha", self.order),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be finite, got {v}")));
            }
        }
        if self.population <= 0.0 {
            return Err(Error::domain("N", self.population, "(0, inf)"));
        }
        if self.conjugation <= 0.0 {
            return Err(Error::domain("beta", self.conjugation, "(0, inf)"));
        }
        for (name, v) in [
            ("mu", self.turnover),
            ("gamma", self.plasmid_loss),
            ("epsilon", self.saturation),
            ("sigma", self.noise),
        ] {
            if v < 0.0 {
                return Err(Error::domain(name, v, "[0, inf)"));
            }
        }
        if self.removal_rate() <= 0.0 {
            return Err(Error::Parameter(
                "gamma + mu must be positive; every threshold divides by it".into(),
            ));
        }
        if !(self.order > 0.0 && self.order <= 1.0) {
            return Err(Error::domain("alpha", self.order, "(0, 1]"));
        }
        Ok(())
    }

    /// `gamma + mu`, the per-capita loss rate of the resistant class.
    #[inline]
    pub fn removal_rate(&self) -> f64 {
        self.plasmid_loss + self.turnover
    }

    pub fn with_plasmid_loss(mut self, gamma: f64) -> Self {
        self.plasmid_loss = gamma;
        self
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise = sigma;
        self
    }

    pub fn with_order(mut self, alpha: f64) -> Self {
        self.order = alpha;
        self
    }

    /// Whether `r` lies in the open invariant interval `(0, N)`.
    #[inline]
    pub fn in_open_domain(&self, r: f64) -> bool {
        r > 0.0 && r < self.population
    }

    pub(crate) fn check_initial(&self, r0: f64) -> Result<()> {
        if self.in_open_domain(r0) {
            Ok(())
        } else {
            Err(Error::domain("R0", r0, "(0, N)"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values_validate() {
        ModelParams::table(0.0, 1e-7, 0.7).validate().unwrap();
        ModelParams::table(2.0, 5e-6, 1.0).validate().unwrap();
    }

    #[test]
    fn rejects_zero_removal_rate() {
        let mut p = ModelParams::table(0.0, 0.0, 1.0);
        p.turnover = 0.0;
        assert!(matches!(p.validate(), Err(Error::Parameter(_))));
    }

    #[test]
    fn rejects_out_of_range_order() {
        for alpha in [0.0, -0.1, 1.0000001, f64::NAN] {
            assert!(ModelParams::table(0.0, 0.0, alpha).validate().is_err());
        }
    }

    #[test]
    fn rejects_nonpositive_population_and_conjugation() {
        let mut p = ModelParams::table(0.0, 0.0, 1.0);
        p.population = 0.0;
        assert!(p.validate().is_err());
        let mut p = ModelParams::table(0.0, 0.0, 1.0);
        p.conjugation = 0.0;
        assert!(p.validate().is_err());
    }
}
