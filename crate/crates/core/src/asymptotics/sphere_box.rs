//! Closed-form minimisation of a linear function over a sphere intersected
//! with the box `[-a, 0]^n`:
//!
//! ```text
//! min  -(1/n) hᵀe   s.t.  ‖e‖ = √n ξ,  -a ≤ e ≤ 0
//! ```
//!
//! The optimiser scales negative entries of `h` by `a/μ` and clips them at
//! `-a`, where `μ` is chosen so that the norm budget is met exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::bisect;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereBoxMin {
    /// Optimal cost.
    pub value: f64,
    /// Threshold parameter; `+∞` when `ξ = 0`.
    pub mu_hat: f64,
    /// Minimiser, entries in `[-a, 0]`.
    pub e_star: Vec<f64>,
}

/// Left side of the norm-budget equation, `(a²/n)(#{h ≤ −μ} + Σ_{−μ<h<0} h²/μ²)`.
fn budget(h: &[f64], a: f64, mu: f64) -> f64 {
    let mut clipped = 0.0;
    let mut scaled = 0.0;
    for &hi in h {
        if hi <= -mu {
            clipped += 1.0;
        } else if hi < 0.0 {
            scaled += hi * hi;
        }
    }
    a * a / h.len() as f64 * (clipped + scaled / (mu * mu))
}

/// Three-branch minimiser for a given threshold `mu`.
pub fn sphere_box_minimizer(h: &[f64], a: f64, mu: f64) -> Vec<f64> {
    h.iter()
        .map(|&hi| {
            if hi >= 0.0 {
                0.0
            } else if hi <= -mu {
                -a
            } else {
                a / mu * hi
            }
        })
        .collect()
}

/// Solves the inner minimisation in closed form.
///
/// Requires `ξ² ≤ a² · #{h_i < 0} / n`; when it holds with equality every
/// negative coordinate sits on the box and any `μ ≤ min |h_i<0|` is a valid
/// threshold, in which case `min |h_i<0|` is returned.
pub fn sphere_box_min(h: &[f64], a: f64, xi: f64) -> Result<SphereBoxMin> {
    if h.is_empty() {
        return Err(Error::Domain("h is empty".into()));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Domain(format!("a = {a} must be positive")));
    }
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(Error::Domain(format!("xi = {xi} must be non-negative")));
    }
    if let Some(i) = h.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("h[{i}] is not finite")));
    }
    let n = h.len();
    if xi == 0.0 {
        return Ok(SphereBoxMin { value: 0.0, mu_hat: f64::INFINITY, e_star: vec![0.0; n] });
    }
    let neg: Vec<f64> = h.iter().copied().filter(|&v| v < 0.0).map(f64::abs).collect();
    if neg.is_empty() {
        return Err(Error::Degenerate(format!("all h_i >= 0 but xi = {xi} > 0")));
    }
    let target = xi * xi;
    let cap = a * a * neg.len() as f64 / n as f64;
    if target > cap * (1.0 + 1e-12) {
        return Err(Error::Infeasible(format!("xi^2 = {target} exceeds a^2 * #(h < 0) / n = {cap}")));
    }
    let smallest = neg.iter().copied().fold(f64::INFINITY, f64::min);

    let mu_hat = if target >= cap * (1.0 - 1e-12) {
        smallest
    } else {
        // budget(smallest) = cap > ξ², and for μ ≥ max|h| the budget is
        // (a²/nμ²) Σ h², so this `hi` undershoots ξ².
        let sum_sq: f64 = neg.iter().map(|v| v * v).sum();
        let largest = neg.iter().copied().fold(0.0, f64::max);
        let hi = 2.0 * largest.max(a * (sum_sq / n as f64).sqrt() / xi);
        bisect(|mu| budget(h, a, mu) - target, smallest, hi, |lo, hi, _| hi - lo <= 1e-15 * hi)
    };

    let e_star = sphere_box_minimizer(h, a, mu_hat);
    let mut value = 0.0;
    for &hi in h {
        if hi <= -mu_hat {
            value -= a * hi.abs();
        } else if hi < 0.0 {
            value -= a * hi * hi / mu_hat;
        }
    }
    value /= n as f64;
    Ok(SphereBoxMin { value, mu_hat, e_star })
}
