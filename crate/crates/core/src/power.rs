//! Pilot/data energy accounting and optimisation of the data power fraction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{big_f, q_function, solve_minmax, AsymptoticInput};
use crate::channel::{build_correlation, estimation_spectrum, symmetric_eigen_clamped, SystemConfig};
use crate::error::{Error, Result};
use crate::search::golden_section_min;

/// Per-symbol pilot and data powers for a given data fraction `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSplit {
    pub alpha: f64,
    pub rho_p: f64,
    pub rho_d: f64,
}

/// Splits the energy budget `ρτ` so that `ρ_d τ_d = α ρ τ` and
/// `ρ_p τ_p = (1 − α) ρ τ`, with `τ_d = τ − τ_p`.
pub fn powers_from_alpha(alpha: f64, rho: f64, tau: f64, tau_p: f64) -> Result<PowerSplit> {
    let tau_d = tau - tau_p;
    if tau_d.is_nan() || tau_d <= 0.0 {
        return Err(Error::Domain(format!("tau_d = tau - tau_p = {tau_d} must be positive")));
    }
    if tau_p.is_nan() || tau_p < 1.0 {
        return Err(Error::Domain(format!("tau_p = {tau_p} must be at least 1")));
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Domain(format!("rho = {rho} must be positive")));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    Ok(PowerSplit { alpha, rho_d: alpha * rho * tau / tau_d, rho_p: (1.0 - alpha) * rho * tau / tau_p })
}

/// Which asymptotic metric the allocation is optimised for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocationObjective {
    Mse,
    Ber,
}

/// Excluded margin at both ends of the `α` range; `α = 0` leaves no data
/// power and `α = 1` no pilot power.
pub const ALPHA_EPS: f64 = 1e-3;

/// Refinement tolerance on `α` after the grid scan.
pub const ALPHA_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationCurve {
    pub objective: AllocationObjective,
    pub alphas: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub mse_values: Vec<f64>,
    pub ber_values: Vec<f64>,
    /// Refined minimiser of the predicted MSE.
    pub alpha_star_mse: f64,
    /// Refined maximiser of `μ*` (equivalently minimiser of the predicted BER).
    pub alpha_star_ber: f64,
    /// Predicted MSE at `alpha_star_mse`.
    pub mse_at_star: f64,
    /// `μ*` at `alpha_star_mse`.
    pub mu_at_star_mse: f64,
    /// `μ*` at `alpha_star_ber`.
    pub mu_at_star: f64,
    /// Whether the grid curves change direction at most once. The optimiser
    /// assumes unimodality; a `false` here flags that the assumption failed.
    pub unimodal_mse: bool,
    pub unimodal_ber: bool,
}

impl AllocationCurve {
    /// Optimal `α` for the curve's objective.
    pub fn alpha_star(&self) -> f64 {
        match self.objective {
            AllocationObjective::Mse => self.alpha_star_mse,
            AllocationObjective::Ber => self.alpha_star_ber,
        }
    }

    /// Predicted BER at the BER-optimal fraction.
    pub fn ber_at_star(&self) -> f64 {
        q_function(self.mu_at_star / 2.0)
    }
}

/// Evaluates `μ*` as a function of `α` for a fixed correlation spectrum.
struct AlphaModel {
    nu: Vec<f64>,
    n: usize,
    rho: f64,
    tau: f64,
    tau_p: f64,
}

impl AlphaModel {
    fn mu_star(&self, alpha: f64) -> Result<f64> {
        let split = powers_from_alpha(alpha, self.rho, self.tau, self.tau_p)?;
        let (lambda, delta) = estimation_spectrum(&self.nu, self.tau_p, split.rho_p)?;
        let input = AsymptoticInput::new(lambda, delta, split.rho_d, self.n)?;
        Ok(solve_minmax(&input)?.mu_star)
    }
}

fn sign_changes(values: &[f64]) -> usize {
    let signs: Vec<bool> = values.windows(2).map(|w| w[1] - w[0]).filter(|d| *d != 0.0).map(|d| d > 0.0).collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Scans `α` on an open grid, solves the asymptotic saddle problem at every
/// point and refines the optimum by golden-section search between the grid
/// neighbours of the best grid point.
pub fn optimize_alpha(
    config: &SystemConfig,
    objective: AllocationObjective,
    grid_points: usize,
) -> Result<AllocationCurve> {
    if grid_points < 3 {
        return Err(Error::Domain(format!("grid_points = {grid_points} must be at least 3")));
    }
    config.validate()?;
    let r = build_correlation(config.corr_model, config.m(), config.r)?;
    let (nu, _) = symmetric_eigen_clamped(&r)?;
    let model = AlphaModel { nu, n: config.n, rho: config.rho, tau: config.tau, tau_p: config.tau_p };

    let step = (1.0 - 2.0 * ALPHA_EPS) / (grid_points - 1) as f64;
    let alphas: Vec<f64> = (0..grid_points).map(|k| ALPHA_EPS + k as f64 * step).collect();
    let mu_values = alphas.par_iter().map(|&a| model.mu_star(a)).collect::<Result<Vec<f64>>>()?;
    let mse_values: Vec<f64> = mu_values.iter().map(|&m| big_f(m)).collect();
    let ber_values: Vec<f64> = mu_values.iter().map(|&m| q_function(m / 2.0)).collect();

    let bracket = |k: usize| {
        let lo = alphas[k.saturating_sub(1)];
        let hi = alphas[(k + 1).min(grid_points - 1)];
        (lo, hi)
    };
    // Errors inside the refinement are surfaced after the search.
    let mut failure: Option<Error> = None;

    let k_mse = argmin(&mse_values);
    let (lo, hi) = bracket(k_mse);
    let refined_mse = golden_section_min(
        |a| match model.mu_star(a) {
            Ok(mu) => big_f(mu),
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        ALPHA_TOL * 1e-2,
        1.0,
    );
    let (alpha_star_mse, mse_at_star, mu_at_star_mse) = if refined_mse.value <= mse_values[k_mse] {
        let mu = model.mu_star(refined_mse.x)?;
        (refined_mse.x, refined_mse.value, mu)
    } else {
        (alphas[k_mse], mse_values[k_mse], mu_values[k_mse])
    };

    let k_mu = argmin(&mu_values.iter().map(|m| -m).collect::<Vec<_>>());
    let (lo, hi) = bracket(k_mu);
    let refined_mu = golden_section_min(
        |a| match model.mu_star(a) {
            Ok(mu) => -mu,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        ALPHA_TOL * 1e-2,
        1.0,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (alpha_star_ber, mu_at_star) = if -refined_mu.value >= mu_values[k_mu] {
        (refined_mu.x, -refined_mu.value)
    } else {
        (alphas[k_mu], mu_values[k_mu])
    };

    Ok(AllocationCurve {
        objective,
        unimodal_mse: sign_changes(&mse_values) <= 1,
        unimodal_ber: sign_changes(&mu_values) <= 1,
        alphas,
        mu_values,
        mse_values,
        ber_values,
        alpha_star_mse,
        alpha_star_ber,
        mse_at_star,
        mu_at_star_mse,
        mu_at_star,
    })
}

fn argmin(values: &[f64]) -> usize {
    values.iter().enumerate().fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) }).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::CorrelationModel;

    #[test]
    fn half_split_example() {
        let p = powers_from_alpha(0.5, 10.0, 2.5, 1.0).unwrap();
        assert!((p.rho_d - 25.0 / 3.0).abs() < 1e-12);
        assert!((p.rho_p - 12.5).abs() < 1e-12);
        assert!((p.rho_p * 1.0 + p.rho_d * 1.5 - 25.0).abs() < 1e-12);
    }

    #[test]
    fn endpoints_put_everything_on_one_phase() {
        let p = powers_from_alpha(0.0, 10.0, 2.5, 1.0).unwrap();
        assert_eq!(p.rho_d, 0.0);
        let p = powers_from_alpha(1.0, 10.0, 2.5, 1.0).unwrap();
        assert_eq!(p.rho_p, 0.0);
    }

    #[test]
    fn rejects_non_positive_data_time() {
        assert!(powers_from_alpha(0.5, 10.0, 2.0, 2.0).is_err());
        assert!(powers_from_alpha(0.5, 10.0, 2.0, 3.0).is_err());
        assert!(powers_from_alpha(1.5, 10.0, 2.5, 1.0).is_err());
    }

    #[test]
    fn sign_change_counter() {
        assert_eq!(sign_changes(&[3.0, 2.0, 1.0, 2.0, 3.0]), 1);
        assert_eq!(sign_changes(&[1.0, 2.0, 1.0, 2.0]), 2);
        assert_eq!(sign_changes(&[1.0, 1.0, 1.0]), 0);
    }

    #[test]
    fn small_curve_has_interior_optimum() {
        let cfg = SystemConfig {
            n: 40,
            beta: 1.5,
            tau: 2.0,
            tau_p: 1.0,
            rho: 10.0,
            alpha: 0.5,
            corr_model: CorrelationModel::SquaredExponential,
            r: 0.4,
            seed: 1,
            perfect_csi: false,
        };
        let curve = optimize_alpha(&cfg, AllocationObjective::Mse, 11).unwrap();
        assert_eq!(curve.alphas.len(), 11);
        assert!(curve.alpha_star_mse > 0.3 && curve.alpha_star_mse < 0.7);
        assert!(curve.mse_at_star <= curve.mse_values.iter().cloned().fold(f64::INFINITY, f64::min));
        assert!(curve.mu_at_star >= curve.mu_values.iter().cloned().fold(0.0, f64::max));
    }
}
