//! Gaussian special functions used by the asymptotic error formulas.

use crate::error::{Error, Result};
use crate::search::bisect;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Below this argument `big_f` and `upsilon` switch to their Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`, evaluated through
/// `erfc` so that the far tail keeps full relative accuracy.
#[inline]
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `1 - 2 Q(x)`, i.e. `erf(x / sqrt 2)`, without the cancellation.
#[inline]
fn one_minus_two_q(x: f64) -> f64 {
    libm::erf(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `φ(μ) = 1/2 − Q(μ) − μ·pdf(μ)`, the second moment of the standard normal
/// truncated to `[0, μ]`.
///
/// For `μ < 1` the power series of `∫₀^μ t² pdf(t) dt` is summed directly;
/// the closed form loses relative accuracy there to cancellation.
pub fn varphi(mu: f64) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    if mu < 1.0 {
        varphi_series(mu)
    } else {
        varphi_closed(mu)
    }
}

fn varphi_series(mu: f64) -> f64 {
    // Σ_k (−1)^k μ^{2k+3} / (2^k k! (2k+3))
    let mu2 = mu * mu;
    let mut power = mu2 * mu;
    let mut sum = power / 3.0;
    for k in 1..60 {
        power *= -mu2 / (2.0 * k as f64);
        let term = power / (2 * k + 3) as f64;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    INV_SQRT_2PI * sum
}

fn varphi_closed(mu: f64) -> f64 {
    0.5 * one_minus_two_q(mu) - mu * normal_pdf(mu)
}

/// `F(μ) = 4 (Q(μ) + φ(μ)/μ²)`: the asymptotic MSE as a function of the
/// saddle parameter. Strictly decreasing from 2 (at 0⁺) to 0 (at ∞).
pub fn big_f(mu: f64) -> f64 {
    if mu < SERIES_THRESHOLD {
        let mu = mu.max(0.0);
        return 2.0 - (8.0 / 3.0) * INV_SQRT_2PI * mu + (4.0 / 15.0) * INV_SQRT_2PI * mu * mu * mu;
    }
    4.0 * (q_function(mu) + varphi(mu) / (mu * mu))
}

/// `F'(μ) = −8 φ(μ) / μ³`.
pub fn big_f_prime(mu: f64) -> f64 {
    if mu < SERIES_THRESHOLD {
        return -8.0 * INV_SQRT_2PI * (1.0 / 3.0 - mu * mu / 10.0);
    }
    -8.0 * varphi(mu) / (mu * mu * mu)
}

/// `Υ(μ) = (1 − 2 Q(μ)) / μ`, limit `sqrt(2/π)` at 0⁺.
pub fn upsilon(mu: f64) -> f64 {
    if mu < SERIES_THRESHOLD {
        let mu2 = mu * mu;
        return SQRT_2_OVER_PI * (1.0 - mu2 / 6.0 + mu2 * mu2 / 40.0);
    }
    one_minus_two_q(mu) / mu
}

/// `Υ'(μ) = (2 μ pdf(μ) − (1 − 2Q(μ))) / μ²`.
pub fn upsilon_prime(mu: f64) -> f64 {
    if mu < 1e-3 {
        return SQRT_2_OVER_PI * (-mu / 3.0 + mu * mu * mu / 10.0);
    }
    (2.0 * mu * normal_pdf(mu) - one_minus_two_q(mu)) / (mu * mu)
}

/// Inverts `F`: returns the unique `μ > 0` with `F(μ) = ξ²`.
///
/// Feasible only for `0 < ξ < √2` since `F` maps `(0, ∞)` onto `(0, 2)`.
pub fn solve_mu_of_xi(xi: f64) -> Result<f64> {
    let target = xi * xi;
    if !xi.is_finite() || xi <= 0.0 || target >= 2.0 {
        return Err(Error::Domain(format!("xi = {xi} must satisfy 0 < xi and xi^2 < 2")));
    }
    let mut lo = 1e-8;
    let mut hi = 64.0;
    while big_f(lo) <= target {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::Bracket(format!("F(mu) = {target} has no solution above 1e-300")));
        }
    }
    while big_f(hi) >= target {
        hi *= 2.0;
        if hi > 1e150 {
            return Err(Error::Bracket(format!("F(mu) = {target} has no solution below 1e150")));
        }
    }
    // Run the bracket down to f64 resolution; the residual is then far below 1e-10.
    let mu = bisect(|m| big_f(m) - target, lo, hi, |a, b, _| b - a <= 1e-15 * b);
    Ok(mu)
}
