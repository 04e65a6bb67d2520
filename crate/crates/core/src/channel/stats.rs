use nalgebra::DMatrix;

use super::correlation::{reconstruct, symmetric_eigen_clamped};
use crate::error::{Error, Result};

/// Second-order statistics of the channel, its LMMSE estimate and the
/// estimation error. All matrices share the eigenvectors of `r`.
#[derive(Debug, Clone)]
pub struct ChannelStats {
    pub r: DMatrix<f64>,
    pub r_hat: DMatrix<f64>,
    pub r_delta: DMatrix<f64>,
    /// Eigenvalues of `r`, ascending.
    pub eigvals_r: Vec<f64>,
    /// Eigenvalues of `r_hat`, aligned with `eigvals_r`.
    pub lambda: Vec<f64>,
    /// Eigenvalues of `r_delta`, aligned with `eigvals_r`.
    pub delta: Vec<f64>,
    pub eigvecs: DMatrix<f64>,
    pub tau_p: f64,
    pub rho_p: f64,
    /// Square roots used for sampling.
    pub sqrt_r: DMatrix<f64>,
    pub sqrt_r_hat: DMatrix<f64>,
    pub sqrt_r_delta: DMatrix<f64>,
    /// `R (R + I/(τ_p ρ_p))^{-1}`.
    pub lmmse_filter: DMatrix<f64>,
}

impl ChannelStats {
    pub fn m(&self) -> usize {
        self.r.nrows()
    }

    /// Per-entry variance of the effective pilot noise, `1/(τ_p ρ_p)`.
    pub fn noise_var(&self) -> f64 {
        1.0 / (self.tau_p * self.rho_p)
    }
}

/// Eigenvalues of the estimate and error covariances for correlation
/// eigenvalues `nu`: `λ = ν²/(ν + 1/(τ_p ρ_p))`, `δ = ν − λ`.
pub fn estimation_spectrum(nu: &[f64], tau_p: f64, rho_p: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let energy = tau_p * rho_p;
    if !energy.is_finite() || energy <= 0.0 {
        return Err(Error::Singular(energy));
    }
    let noise = 1.0 / energy;
    let lambda: Vec<f64> = nu.iter().map(|&v| v * v / (v + noise)).collect();
    let delta = nu.iter().zip(&lambda).map(|(&v, &l)| (v - l).max(0.0)).collect();
    Ok((lambda, delta))
}

/// Derives the estimate/error covariances from `r` for pilot energy `τ_p ρ_p`.
pub fn derive_stats(r: &DMatrix<f64>, tau_p: f64, rho_p: f64) -> Result<ChannelStats> {
    let (eigvals_r, eigvecs) = symmetric_eigen_clamped(r)?;
    let (lambda, delta) = estimation_spectrum(&eigvals_r, tau_p, rho_p)?;
    let noise = 1.0 / (tau_p * rho_p);
    let sqrt = |v: &[f64]| v.iter().map(|x| x.sqrt()).collect::<Vec<_>>();
    let filter: Vec<f64> = eigvals_r.iter().map(|&v| v / (v + noise)).collect();
    Ok(ChannelStats {
        r: r.clone(),
        r_hat: reconstruct(&eigvecs, &lambda),
        r_delta: reconstruct(&eigvecs, &delta),
        sqrt_r: reconstruct(&eigvecs, &sqrt(&eigvals_r)),
        sqrt_r_hat: reconstruct(&eigvecs, &sqrt(&lambda)),
        sqrt_r_delta: reconstruct(&eigvecs, &sqrt(&delta)),
        lmmse_filter: reconstruct(&eigvecs, &filter),
        eigvals_r,
        lambda,
        delta,
        eigvecs,
        tau_p,
        rho_p,
    })
}
