use serde::{Deserialize, Serialize};

use super::CorrelationModel;
use crate::error::{Error, Result};
use crate::power::{powers_from_alpha, PowerSplit};

/// Pilot power used in place of the allocated one when perfect CSI is
/// requested; large enough that the estimate equals the channel to ~1e-6.
pub const PERFECT_CSI_RHO_P: f64 = 1e12;

/// Dimensions, powers and correlation of one experiment point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Transmit antennas.
    pub n: usize,
    /// Receive-to-transmit ratio; the receive count is `round(beta * n)`.
    pub beta: f64,
    /// Coherence time over `n`.
    pub tau: f64,
    /// Pilot length over `n`.
    pub tau_p: f64,
    /// Average power budget (linear).
    pub rho: f64,
    /// Fraction of the energy spent on data.
    pub alpha: f64,
    pub corr_model: CorrelationModel,
    /// Correlation coefficient in `[0, 1)`.
    pub r: f64,
    pub seed: u64,
    /// Estimate the channel with `PERFECT_CSI_RHO_P` instead of the allocated
    /// pilot power.
    #[serde(default)]
    pub perfect_csi: bool,
}

impl SystemConfig {
    /// Receive antennas, `round(beta * n)`.
    pub fn m(&self) -> usize {
        (self.beta * self.n as f64).round() as usize
    }

    /// Realised ratio `m / n`.
    pub fn realized_beta(&self) -> f64 {
        self.m() as f64 / self.n as f64
    }

    /// Pilot length `T_p = round(tau_p * n)`.
    pub fn pilot_len(&self) -> usize {
        (self.tau_p * self.n as f64).round() as usize
    }

    /// `T_p / n` after rounding the pilot length to an integer.
    pub fn effective_tau_p(&self) -> f64 {
        self.pilot_len() as f64 / self.n as f64
    }

    pub fn rho_db(&self) -> f64 {
        10.0 * self.rho.log10()
    }

    pub fn set_rho_db(&mut self, rho_db: f64) {
        self.rho = db_to_linear(rho_db);
    }

    /// Allocated powers.
    pub fn powers(&self) -> Result<PowerSplit> {
        powers_from_alpha(self.alpha, self.rho, self.tau, self.tau_p)
    }

    /// Pilot power seen by the channel estimator.
    pub fn estimation_rho_p(&self) -> Result<f64> {
        if self.perfect_csi {
            Ok(PERFECT_CSI_RHO_P)
        } else {
            Ok(self.powers()?.rho_p)
        }
    }

    /// Collects every violated invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n == 0 {
            v.push("n must be a positive integer".to_string());
        }
        if !(self.beta.is_finite() && self.beta > 0.5) {
            v.push(format!("beta = {} must exceed 1/2 (box-relaxation recovery threshold)", self.beta));
        } else if self.n > 0 && self.m() == 0 {
            v.push("round(beta * n) must be at least 1".to_string());
        }
        if !(self.tau_p.is_finite() && self.tau_p >= 1.0) {
            v.push(format!("tau_p = {} must be at least 1 (T_p >= n)", self.tau_p));
        }
        if !(self.tau.is_finite() && self.tau > self.tau_p) {
            v.push(format!("tau = {} must exceed tau_p = {} so that tau_d = tau - tau_p > 0", self.tau, self.tau_p));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            v.push(format!("rho = {} must be positive", self.rho));
        }
        if !(self.alpha.is_finite() && (0.0..=1.0).contains(&self.alpha)) {
            v.push(format!("alpha = {} must lie in [0, 1]", self.alpha));
        }
        if !(self.r.is_finite() && (0.0..1.0).contains(&self.r)) {
            v.push(format!("r = {} must lie in [0, 1)", self.r));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SystemConfig {
        SystemConfig {
            n: 400,
            beta: 1.5,
            tau: 2.5,
            tau_p: 1.0,
            rho: 10.0,
            alpha: 0.5,
            corr_model: CorrelationModel::SquaredExponential,
            r: 0.2,
            seed: 42,
            perfect_csi: false,
        }
    }

    #[test]
    fn derived_dimensions() {
        let c = base();
        assert_eq!(c.m(), 600);
        assert_eq!(c.pilot_len(), 400);
        assert!((c.rho_db() - 10.0).abs() < 1e-12);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn reports_every_violation() {
        let mut c = base();
        c.beta = 0.4;
        c.tau = 2.0;
        c.tau_p = 3.0;
        c.r = 1.0;
        match c.validate() {
            Err(Error::Validation(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn perfect_csi_overrides_pilot_power() {
        let mut c = base();
        assert!((c.estimation_rho_p().unwrap() - 12.5).abs() < 1e-12);
        c.perfect_csi = true;
        assert_eq!(c.estimation_rho_p().unwrap(), PERFECT_CSI_RHO_P);
    }
}
