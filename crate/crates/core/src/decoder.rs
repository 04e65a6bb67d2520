//! Box-relaxation and least-squares detection of BPSK symbols, and the
//! per-trial error metrics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 20_000;

/// Relative singular-value cutoff of the least-squares pseudo-inverse.
pub const LS_CUTOFF: f64 = 1e-10;

const POLISH_EVERY: usize = 100;

/// Stopping rule of the box-relaxation solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iters: DEFAULT_MAX_ITERS }
    }
}

/// Detection problem `min (1/n)‖y − √(ρ_d/n) Â x‖²`.
#[derive(Debug, Clone, Copy)]
pub struct DecodeProblem<'a> {
    pub y: &'a DVector<f64>,
    pub a_hat: &'a DMatrix<f64>,
    pub rho_d: f64,
    pub n: usize,
}

impl<'a> DecodeProblem<'a> {
    pub fn new(y: &'a DVector<f64>, a_hat: &'a DMatrix<f64>, rho_d: f64) -> Result<Self> {
        let p = Self { y, a_hat, rho_d, n: a_hat.ncols() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.a_hat.ncols() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: self.a_hat.ncols() });
        }
        if self.y.len() != self.a_hat.nrows() {
            return Err(Error::LengthMismatch { expected: self.a_hat.nrows(), got: self.y.len() });
        }
        if !(self.rho_d.is_finite() && self.rho_d > 0.0) {
            return Err(Error::Domain(format!("rho_d = {} must be positive", self.rho_d)));
        }
        Ok(())
    }

    /// Channel scaling `√(ρ_d/n)`.
    pub fn scale(&self) -> f64 {
        (self.rho_d / self.n as f64).sqrt()
    }
}

/// Output of a detector.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub x_relaxed: DVector<f64>,
    pub x_detected: DVector<f64>,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub converged: bool,
}

/// Quadratic form of the objective: `f(x) = ‖y‖²/n − cᵀx + ½ xᵀHx`.
struct Quadratic {
    h: DMatrix<f64>,
    c: DVector<f64>,
}

impl Quadratic {
    fn new(p: &DecodeProblem) -> Self {
        let s = p.scale();
        let n = p.n as f64;
        let gram = p.a_hat.transpose() * p.a_hat;
        Self { h: gram * (2.0 * s * s / n), c: p.a_hat.tr_mul(p.y) * (2.0 * s / n) }
    }

    /// Largest eigenvalue of `h` by power iteration.
    fn lipschitz(&self) -> f64 {
        let n = self.h.nrows();
        let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
        let mut est = 0.0;
        for _ in 0..1000 {
            let w = &self.h * &v;
            let norm = w.norm();
            if norm == 0.0 {
                return 0.0;
            }
            let next = v.dot(&w);
            v = w / norm;
            if (next - est).abs() <= 1e-12 * next.abs() {
                est = next;
                break;
            }
            est = next;
        }
        est * (1.0 + 1e-6)
    }
}

fn project(x: &mut DVector<f64>) {
    x.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
}

/// Gradient restricted to feasible descent directions of the box.
fn projected_gradient_of(x: &DVector<f64>, g: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        x.len(),
        x.iter().zip(g.iter()).map(|(&xi, &gi)| {
            if xi <= -1.0 {
                gi.min(0.0)
            } else if xi >= 1.0 {
                gi.max(0.0)
            } else {
                gi
            }
        }),
    )
}

/// Gradient of the detection objective at `x`.
pub fn bro_gradient(problem: &DecodeProblem, x: &DVector<f64>) -> DVector<f64> {
    let s = problem.scale();
    let residual = problem.y - problem.a_hat * x * s;
    problem.a_hat.tr_mul(&residual) * (-2.0 * s / problem.n as f64)
}

/// `(1/n)‖y − √(ρ_d/n) Â x‖²`.
pub fn bro_objective(problem: &DecodeProblem, x: &DVector<f64>) -> f64 {
    let residual = problem.y - problem.a_hat * x * problem.scale();
    residual.norm_squared() / problem.n as f64
}

/// Projected gradient of the detection objective; zero exactly at the box-QP optimum.
pub fn projected_gradient(problem: &DecodeProblem, x: &DVector<f64>) -> DVector<f64> {
    projected_gradient_of(x, &bro_gradient(problem, x))
}

/// Largest violation of the first-order optimality conditions at `x`.
pub fn kkt_residual(problem: &DecodeProblem, x: &DVector<f64>) -> f64 {
    projected_gradient(problem, x).amax()
}

/// Solves the reduced Newton system on the coordinates not pinned to the box
/// by `x` and `g`. Returns `None` when the guess leaves the box.
fn polish(q: &Quadratic, x: &DVector<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let free: Vec<usize> =
        (0..x.len()).filter(|&i| !((x[i] <= -1.0 && g[i] >= 0.0) || (x[i] >= 1.0 && g[i] <= 0.0))).collect();
    let mut out = x.clone();
    if free.is_empty() {
        return Some(out);
    }
    let pinned: Vec<usize> = (0..x.len()).filter(|i| free.binary_search(i).is_err()).collect();
    let k = free.len();
    let h_ff = DMatrix::from_fn(k, k, |a, b| q.h[(free[a], free[b])]);
    let rhs = DVector::from_fn(k, |a, _| {
        let i = free[a];
        q.c[i] - pinned.iter().map(|&j| q.h[(i, j)] * x[j]).sum::<f64>()
    });
    let sol = h_ff.cholesky()?.solve(&rhs);
    if sol.iter().any(|v| !v.is_finite() || v.abs() > 1.0 + 1e-9) {
        return None;
    }
    for (a, &i) in free.iter().enumerate() {
        out[i] = sol[a].clamp(-1.0, 1.0);
    }
    Some(out)
}

/// Box-relaxation detector: accelerated projected gradient with step `1/L`,
/// function-value restart, and a reduced Newton step once the active face
/// has settled.
pub fn bro_solve(problem: &DecodeProblem, tol: f64, max_iters: usize) -> Result<DecodeResult> {
    problem.validate()?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tol = {tol} must be positive")));
    }
    let q = Quadratic::new(problem);
    let n = problem.n;
    let finish = |x: DVector<f64>, iterations: usize, norm: f64| {
        let x_detected = sign_detect(&x);
        DecodeResult { x_relaxed: x, x_detected, iterations, final_gradient_norm: norm, converged: norm <= tol }
    };

    let mut lip = q.lipschitz();
    let mut x = DVector::zeros(n);
    let mut hx = DVector::zeros(n);
    let mut pg_norm = projected_gradient_of(&x, &(&hx - &q.c)).norm();
    if lip <= 0.0 || pg_norm <= tol {
        return Ok(finish(x, 0, pg_norm));
    }

    // Objective changes are formed from differences, `f(a) − f(b) =
    // (a − b)ᵀ(½(Ha + Hb) − c)`, so they stay accurate near the optimum where
    // `f` itself is dominated by the constant term.
    let mut y = x.clone();
    let mut hy = hx.clone();
    let mut t = 1.0_f64;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        let gy = &hy - &q.c;
        let (x_new, hx_new) = loop {
            let mut cand = &y - &gy / lip;
            project(&mut cand);
            let hc = &q.h * &cand;
            let d = &cand - &y;
            let curvature = d.dot(&(&hc - &hy));
            if curvature <= lip * d.norm_squared() * (1.0 + 1e-12) || !lip.is_finite() {
                break (cand, hc);
            }
            lip *= 2.0;
        };

        let step = &x_new - &x;
        let change = step.dot(&((&hx_new + &hx) * 0.5 - &q.c));
        if change > 0.0 && t > 1.0 {
            t = 1.0;
            y.copy_from(&x);
            hy.copy_from(&hx);
            continue;
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        y = &x_new * (1.0 + momentum) - &x * momentum;
        hy = &hx_new * (1.0 + momentum) - &hx * momentum;
        t = t_next;
        x = x_new;
        hx = hx_new;

        let g = &hx - &q.c;
        pg_norm = projected_gradient_of(&x, &g).norm();
        if pg_norm <= tol {
            return Ok(match try_polish(&q, &x, &g) {
                Some((xp, norm)) if norm < pg_norm => finish(xp, iterations, norm),
                _ => finish(x, iterations, pg_norm),
            });
        }
        if iterations % POLISH_EVERY == 0 || iterations == max_iters {
            if let Some((xp, norm)) = try_polish(&q, &x, &g) {
                if norm <= tol {
                    return Ok(finish(xp, iterations, norm));
                }
            }
        }
    }
    Ok(finish(x, iterations, pg_norm))
}

/// A polished point is kept only if it certifies optimality on its own.
fn try_polish(q: &Quadratic, x: &DVector<f64>, g: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let xp = polish(q, x, g)?;
    let hxp = &q.h * &xp;
    let norm = projected_gradient_of(&xp, &(&hxp - &q.c)).norm();
    Some((xp, norm))
}

/// Elementwise sign with `sign(0) = +1`.
pub fn sign_detect(x: &DVector<f64>) -> DVector<f64> {
    x.map(|v| if v < 0.0 { -1.0 } else { 1.0 })
}

/// Zero-forcing detector: minimum-norm least-squares solution through the
/// SVD, singular values below `LS_CUTOFF · σ_max` discarded. No box clipping.
pub fn ls_solve(problem: &DecodeProblem) -> Result<DecodeResult> {
    problem.validate()?;
    let svd = problem.a_hat.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let x = if sigma_max > 0.0 {
        let sol = svd.solve(problem.y, LS_CUTOFF * sigma_max).map_err(|e| Error::Degenerate(e.to_string()))?;
        sol / problem.scale()
    } else {
        DVector::zeros(problem.n)
    };
    let norm = bro_gradient(problem, &x).norm();
    let x_detected = sign_detect(&x);
    Ok(DecodeResult { x_relaxed: x, x_detected, iterations: 0, final_gradient_norm: norm, converged: true })
}

/// `(1/n)‖x̂ − x0‖²`.
pub fn mse_metric(x_relaxed: &DVector<f64>, x0: &DVector<f64>) -> Result<f64> {
    if x_relaxed.len() != x0.len() {
        return Err(Error::LengthMismatch { expected: x0.len(), got: x_relaxed.len() });
    }
    Ok((x_relaxed - x0).norm_squared() / x0.len() as f64)
}

fn check_binary(v: &DVector<f64>) -> Result<()> {
    match v.iter().position(|&x| x != 1.0 && x != -1.0) {
        Some(index) => Err(Error::NotBinary { index, value: v[index] }),
        None => Ok(()),
    }
}

/// Fraction of coordinates where the detected and sent symbols differ.
pub fn ber_metric(x_detected: &DVector<f64>, x0: &DVector<f64>) -> Result<f64> {
    if x_detected.len() != x0.len() {
        return Err(Error::LengthMismatch { expected: x0.len(), got: x_detected.len() });
    }
    check_binary(x_detected)?;
    check_binary(x0)?;
    let errors = x_detected.iter().zip(x0.iter()).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / x0.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{gaussian_matrix as gaussian, trial_rng};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn sign_rules() {
        assert_eq!(sign_detect(&v(&[0.3, -0.9])), v(&[1.0, -1.0]));
        assert_eq!(sign_detect(&v(&[0.0])), v(&[1.0]));
        let s = sign_detect(&v(&[-0.0, 2.0, -1e-300]));
        assert_eq!(s, v(&[1.0, 1.0, -1.0]));
        assert_eq!(sign_detect(&s), s);
    }

    #[test]
    fn metrics() {
        let x0 = v(&[1.0, -1.0, 1.0, 1.0]);
        assert_eq!(mse_metric(&x0, &x0).unwrap(), 0.0);
        assert_eq!(mse_metric(&(-&x0), &x0).unwrap(), 4.0);
        assert_eq!(mse_metric(&v(&[0.0, 1.0]), &v(&[1.0, 1.0])).unwrap(), 0.5);
        assert_eq!(ber_metric(&x0, &x0).unwrap(), 0.0);
        assert_eq!(ber_metric(&(-&x0), &x0).unwrap(), 1.0);
        assert_eq!(ber_metric(&v(&[-1.0, -1.0, 1.0, 1.0]), &x0).unwrap(), 0.25);
        assert!(matches!(mse_metric(&v(&[1.0]), &x0), Err(Error::LengthMismatch { .. })));
        assert!(matches!(ber_metric(&v(&[1.0, 0.5, 1.0, 1.0]), &x0), Err(Error::NotBinary { index: 1, .. })));
    }

    #[test]
    fn noiseless_recovery() {
        let mut rng = trial_rng(3, 0);
        let a = gaussian(24, 12, &mut rng);
        let x0 = DVector::from_fn(12, |i, _| if i % 3 == 0 { -1.0 } else { 1.0 });
        let rho_d = 5.0;
        let y = &a * &x0 * (rho_d / 12.0f64).sqrt();
        let p = DecodeProblem::new(&y, &a, rho_d).unwrap();
        let r = bro_solve(&p, 1e-10, 20_000).unwrap();
        assert!(r.converged, "{} iterations, norm {:e}", r.iterations, r.final_gradient_norm);
        assert!((&r.x_relaxed - &x0).amax() < 1e-8);
        let ls = ls_solve(&p).unwrap();
        assert!((&ls.x_relaxed - &x0).amax() < 1e-10);
    }

    #[test]
    fn zero_channel_objective_is_constant() {
        let a = DMatrix::zeros(5, 3);
        let y = v(&[1.0, 2.0, 0.0, -1.0, 0.5]);
        let p = DecodeProblem::new(&y, &a, 2.0).unwrap();
        let r = bro_solve(&p, 1e-8, 100).unwrap();
        assert!((bro_objective(&p, &r.x_relaxed) - y.norm_squared() / 3.0).abs() < 1e-15);
        assert!(r.x_relaxed.iter().all(|x| x.abs() <= 1.0));
    }

    #[test]
    fn rejects_bad_problems() {
        let a = DMatrix::zeros(4, 3);
        assert!(DecodeProblem::new(&v(&[1.0, 2.0]), &a, 1.0).is_err());
        assert!(DecodeProblem::new(&DVector::zeros(4), &a, 0.0).is_err());
        let y = DVector::zeros(4);
        let p = DecodeProblem::new(&y, &a, 1.0).unwrap();
        assert!(bro_solve(&p, 0.0, 10).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = trial_rng(9, 1);
        let a = gaussian(7, 4, &mut rng);
        let y = gaussian(7, 1, &mut rng).column(0).into_owned();
        let p = DecodeProblem::new(&y, &a, 3.0).unwrap();
        let x = v(&[0.2, -0.4, 0.9, 0.0]);
        let g = bro_gradient(&p, &x);
        for i in 0..4 {
            let mut e = DVector::zeros(4);
            e[i] = 1e-6;
            let fd = (bro_objective(&p, &(&x + &e)) - bro_objective(&p, &(&x - &e))) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-7, "{i}: {fd} vs {}", g[i]);
        }
    }
}
