//! The scalar min-max problem whose saddle point predicts the MSE and BER of
//! the box-relaxation decoder.
//!
//! ```text
//! min_{μ>0} max_{γ>0}  (1/2n) Σ_j (ρ_d λ_j F(μ) + ρ_d δ_j + 1) / (1/2 + λ_j √ρ_d / γ)
//!                      − (√ρ_d / 2) Υ(μ)² γ
//! ```
//!
//! `λ_j` are the eigenvalues of the estimated-channel covariance and `δ_j` the
//! eigenvalues of the estimation-error covariance in the same eigenbasis.

use serde::{Deserialize, Serialize};

use super::scalar::{big_f, big_f_prime, q_function, upsilon, upsilon_prime};
use crate::error::{Error, Result};
use crate::search::{bisect, golden_section_min};

/// Spectral description of one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticInput {
    /// Eigenvalues of the estimated-channel covariance.
    pub lambda: Vec<f64>,
    /// Eigenvalues of the estimation-error covariance, aligned with `lambda`.
    pub delta: Vec<f64>,
    /// Data power per symbol.
    pub rho_d: f64,
    /// Number of transmit antennas.
    pub n: usize,
}

impl AsymptoticInput {
    pub fn new(lambda: Vec<f64>, delta: Vec<f64>, rho_d: f64, n: usize) -> Result<Self> {
        let input = Self { lambda, delta, rho_d, n };
        input.validate()?;
        Ok(input)
    }

    pub fn m(&self) -> usize {
        self.lambda.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.len() != self.delta.len() {
            return Err(Error::LengthMismatch { expected: self.lambda.len(), got: self.delta.len() });
        }
        if self.lambda.is_empty() {
            return Err(Error::Domain("spectrum is empty".into()));
        }
        if self.n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        if !(self.rho_d.is_finite() && self.rho_d > 0.0) {
            return Err(Error::Domain(format!("rho_d = {} must be positive", self.rho_d)));
        }
        if let Some(j) = self.lambda.iter().position(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::Domain(format!("lambda[{j}] = {} must be non-negative", self.lambda[j])));
        }
        if let Some(j) = self.delta.iter().position(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::Domain(format!("delta[{j}] = {} must be non-negative", self.delta[j])));
        }
        Ok(())
    }
}

/// Saddle point of the min-max problem and the predictions derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSolution {
    pub mu_star: f64,
    pub gamma_star: f64,
    /// Predicted MSE, `F(μ*)`.
    pub mse: f64,
    /// Predicted BER, `Q(μ*/2)`.
    pub ber: f64,
    /// Saddle value.
    pub objective: f64,
}

impl AsymptoticSolution {
    fn from_saddle(mu_star: f64, gamma_star: f64, objective: f64) -> Self {
        Self { mu_star, gamma_star, mse: big_f(mu_star), ber: q_function(mu_star / 2.0), objective }
    }
}

/// Per-mode quantities that do not depend on `γ`.
struct Modes<'a> {
    input: &'a AsymptoticInput,
    sqrt_rho: f64,
}

impl<'a> Modes<'a> {
    fn new(input: &'a AsymptoticInput) -> Self {
        Self { input, sqrt_rho: input.rho_d.sqrt() }
    }

    /// Calls `f(numerator_j, s_j)` for every mode, with `s_j = λ_j √ρ_d`.
    #[inline]
    fn fold<F: FnMut(f64, f64)>(&self, f_mu: f64, mut f: F) {
        let rho = self.input.rho_d;
        for (&l, &d) in self.input.lambda.iter().zip(&self.input.delta) {
            f(rho * l * f_mu + rho * d + 1.0, l * self.sqrt_rho);
        }
    }

    fn value(&self, f_mu: f64, ups: f64, gamma: f64) -> f64 {
        let mut sum = 0.0;
        // N / (1/2 + s/γ) written as N γ / (γ/2 + s) so that s = 0 is harmless.
        self.fold(f_mu, |num, s| sum += num * gamma / (0.5 * gamma + s));
        sum / (2.0 * self.input.n as f64) - 0.5 * self.sqrt_rho * ups * ups * gamma
    }

    fn d_gamma(&self, f_mu: f64, ups: f64, gamma: f64) -> f64 {
        let mut sum = 0.0;
        self.fold(f_mu, |num, s| {
            if s > 0.0 {
                let den = 0.5 * gamma + s;
                sum += num * s / (den * den);
            }
        });
        sum / (2.0 * self.input.n as f64) - 0.5 * self.sqrt_rho * ups * ups
    }

    /// Partial derivative in `μ` at fixed `γ`.
    fn d_mu(&self, mu: f64, gamma: f64) -> f64 {
        let rho = self.input.rho_d;
        let fp = big_f_prime(mu);
        let mut sum = 0.0;
        for &l in &self.input.lambda {
            sum += rho * l * fp * gamma / (0.5 * gamma + l * self.sqrt_rho);
        }
        sum / (2.0 * self.input.n as f64) - self.sqrt_rho * upsilon(mu) * upsilon_prime(mu) * gamma
    }
}

/// Evaluates the min-max objective at `(μ, γ)`.
pub fn minmax_objective(mu: f64, gamma: f64, input: &AsymptoticInput) -> f64 {
    Modes::new(input).value(big_f(mu), upsilon(mu), gamma)
}

/// Inner maximisation; `γ = 0` is returned when the supremum sits at the
/// boundary (the objective is then non-increasing in `γ`).
fn inner_max_raw(modes: &Modes<'_>, mu: f64) -> Result<(f64, f64)> {
    let f_mu = big_f(mu);
    let ups = upsilon(mu);
    if ups.is_nan() || ups <= 0.0 {
        return Err(Error::Unbounded(format!("Upsilon({mu}) = 0 leaves gamma unpenalised")));
    }
    // The objective is concave in γ, so its maximiser is where the
    // derivative changes sign.
    if modes.d_gamma(f_mu, ups, 0.0) <= 0.0 {
        return Ok((0.0, modes.value(f_mu, ups, 0.0)));
    }
    let mut hi = 1.0;
    while modes.d_gamma(f_mu, ups, hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Unbounded(format!("no maximiser in gamma at mu = {mu}")));
        }
    }
    let gamma = bisect(|g| modes.d_gamma(f_mu, ups, g), 0.0, hi, |lo, hi, _| hi - lo <= 1e-15 * hi);
    Ok((gamma, modes.value(f_mu, ups, gamma)))
}

/// Maximises the objective over `γ > 0` for fixed `μ`; returns `(γ*, value)`.
pub fn inner_max_gamma(mu: f64, input: &AsymptoticInput) -> Result<(f64, f64)> {
    input.validate()?;
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Domain(format!("mu = {mu} must be positive")));
    }
    if input.lambda.iter().all(|&l| l == 0.0) {
        return Err(Error::Degenerate("all lambda are zero".into()));
    }
    let (gamma, value) = inner_max_raw(&Modes::new(input), mu)?;
    if gamma <= 0.0 {
        return Err(Error::Bracket(format!("maximiser in gamma sits at 0 for mu = {mu}")));
    }
    Ok((gamma, value))
}

const MU_LO: f64 = 1e-6;
const MU_HI: f64 = 64.0;
const MU_HI_MAX: f64 = 512.0;

/// Solves the min-max problem and returns the saddle point with the
/// MSE/BER predictions `F(μ*)` and `Q(μ*/2)`.
pub fn solve_minmax(input: &AsymptoticInput) -> Result<AsymptoticSolution> {
    input.validate()?;
    if input.lambda.iter().all(|&l| l == 0.0) {
        return Err(Error::Degenerate("all lambda are zero".into()));
    }
    let modes = Modes::new(input);
    let outer = |mu: f64| inner_max_raw(&modes, mu).map(|(_, v)| v).unwrap_or(f64::INFINITY);

    let mut hi = MU_HI;
    let golden = loop {
        let r = golden_section_min(outer, MU_LO, hi, 1e-9, MU_LO);
        if r.lo <= MU_LO {
            return Err(Error::Bracket(format!("outer minimum sits at the lower edge mu = {MU_LO}")));
        }
        if r.hi < hi {
            break r;
        }
        hi *= 2.0;
        if hi > MU_HI_MAX {
            return Err(Error::Bracket(format!(
                "no interior minimum in mu up to {MU_HI_MAX} (rho_d = {})",
                input.rho_d
            )));
        }
    };

    // Golden section only resolves the argument to about sqrt(machine eps);
    // polish with the envelope derivative dV/dμ = ∂_μ objective(μ, γ*(μ)).
    let d_outer = |mu: f64| match inner_max_raw(&modes, mu) {
        Ok((g, _)) => modes.d_mu(mu, g),
        Err(_) => f64::NAN,
    };
    let mut mu_star = golden.x;
    let lo = golden.lo.min(mu_star * (1.0 - 1e-6)).max(MU_LO);
    let hi_p = golden.hi.max(mu_star * (1.0 + 1e-6));
    let (dl, dh) = (d_outer(lo), d_outer(hi_p));
    if dl < 0.0 && dh > 0.0 {
        mu_star = bisect(d_outer, lo, hi_p, |a, b, _| b - a <= 1e-15 * b);
    }

    let (gamma_star, objective) = inner_max_raw(&modes, mu_star)?;
    if gamma_star <= 0.0 {
        return Err(Error::Bracket(format!("gamma* = 0 at mu* = {mu_star}")));
    }
    Ok(AsymptoticSolution::from_saddle(mu_star, gamma_star, objective))
}
