//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use bro_mimo::asymptotics::{big_f, upsilon, AsymptoticInput};
use bro_mimo::channel::{CorrelationModel, SystemConfig};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub fn system(n: usize, beta: f64, rho_db: f64, r: f64) -> SystemConfig {
    SystemConfig {
        n,
        beta,
        tau: 2.5,
        tau_p: 1.0,
        rho: 10f64.powf(rho_db / 10.0),
        alpha: 0.5,
        corr_model: CorrelationModel::SquaredExponential,
        r,
        seed: 42,
        perfect_csi: false,
    }
}

/// Composite Simpson rule for `∫₀^μ t² pdf(t) dt`.
pub fn truncated_second_moment(mu: f64) -> f64 {
    let intervals = 20_000;
    let h = mu / intervals as f64;
    let f = |t: f64| t * t * (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut sum = f(0.0) + f(mu);
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(k as f64 * h);
    }
    sum * h / 3.0
}

pub const GRID: usize = 2000;

/// Saddle objective written out directly from its definition.
fn saddle_objective(mu_f: f64, mu_ups: f64, gamma: f64, input: &AsymptoticInput) -> f64 {
    let rho = input.rho_d;
    let mut sum = 0.0;
    for (&l, &d) in input.lambda.iter().zip(&input.delta) {
        sum += (rho * l * mu_f + rho * d + 1.0) / (0.5 + l * rho.sqrt() / gamma);
    }
    sum / (2.0 * input.n as f64) - 0.5 * rho.sqrt() * mu_ups * mu_ups * gamma
}

fn log_grid(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..GRID).map(|k| (a + (b - a) * k as f64 / (GRID - 1) as f64).exp()).collect()
}

/// Max over `γ` at fixed `μ`: a 2000-point log grid over `[1e-3, 1e3]`
/// refined by zooming onto the best point's neighbours.
fn grid_inner_max(input: &AsymptoticInput, mu: f64) -> (f64, f64) {
    let (f, u) = (big_f(mu), upsilon(mu));
    let (mut lo, mut hi) = (1e-3, 1e3);
    let mut best = (f64::NEG_INFINITY, lo);
    for _ in 0..3 {
        let grid = log_grid(lo, hi);
        let mut k_best = 0;
        best.0 = f64::NEG_INFINITY;
        for (k, &g) in grid.iter().enumerate() {
            let v = saddle_objective(f, u, g, input);
            if v > best.0 {
                best = (v, g);
                k_best = k;
            }
        }
        lo = grid[k_best.saturating_sub(2)];
        hi = grid[(k_best + 2).min(GRID - 1)];
    }
    best
}

/// Brute-force saddle point: a 2000-point log grid in `μ` over `[1e-3, 1e3]`,
/// zoomed twice around the minimiser, with the inner maximum over `γ` taken
/// on its own zoomed 2000-point grid for every `μ`.
pub fn brute_force_saddle(input: &AsymptoticInput) -> (f64, f64) {
    let (mut lo, mut hi) = (1e-3, 1e3);
    let mut best = (f64::INFINITY, lo, 0.0);
    for _ in 0..3 {
        let grid = log_grid(lo, hi);
        let mut k_best = 0;
        best.0 = f64::INFINITY;
        for (k, &mu) in grid.iter().enumerate() {
            let (v, g) = grid_inner_max(input, mu);
            if v < best.0 {
                best = (v, mu, g);
                k_best = k;
            }
        }
        lo = grid[k_best.saturating_sub(2)];
        hi = grid[(k_best + 2).min(GRID - 1)];
    }
    (best.1, best.2)
}

pub fn random_spectrum<R: Rng>(rng: &mut R) -> AsymptoticInput {
    let m = rng.random_range(1..=8usize);
    // keeps m/n above 1/2
    let n = rng.random_range(m.div_ceil(3)..=(2 * m - 1));
    let lambda: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..2.0)).collect();
    let delta: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..0.5)).collect();
    let rho_d = rng.random_range(0.5..30.0);
    AsymptoticInput::new(lambda, delta, rho_d, n).unwrap()
}

/// Minimises `-(1/n) hᵀe` over `‖e‖² = nξ²`, `e ∈ [-a, 0]^n` by enumerating
/// every assignment of coordinates to {lower bound, zero, free}. On the free
/// set the linear objective over a sphere is stationary at `±R h_F/‖h_F‖`.
pub fn sphere_box_by_enumeration(h: &[f64], a: f64, xi: f64) -> Option<f64> {
    let n = h.len();
    let total = 3usize.pow(n as u32);
    let mut best: Option<f64> = None;
    let slack = 1e-12 * (1.0 + a);
    for code in 0..total {
        let mut c = code;
        let mut lower = Vec::new();
        let mut free = Vec::new();
        for i in 0..n {
            match c % 3 {
                0 => lower.push(i),
                1 => {}
                _ => free.push(i),
            }
            c /= 3;
        }
        let r2 = n as f64 * xi * xi - a * a * lower.len() as f64;
        if r2 < -1e-12 {
            continue;
        }
        let r = r2.max(0.0).sqrt();
        let fixed: f64 = lower.iter().map(|&i| h[i] * a).sum();
        let mut candidates: Vec<Vec<f64>> = Vec::new();
        if free.is_empty() {
            if r <= 1e-9 {
                candidates.push(Vec::new());
            }
        } else {
            let norm = free.iter().map(|&i| h[i] * h[i]).sum::<f64>().sqrt();
            if norm > 0.0 {
                for sign in [1.0, -1.0] {
                    candidates.push(free.iter().map(|&i| sign * r * h[i] / norm).collect());
                }
            } else {
                candidates.push(vec![-r / (free.len() as f64).sqrt(); free.len()]);
            }
        }
        for e_free in candidates {
            if e_free.iter().any(|&e| e > slack || e < -a - slack) {
                continue;
            }
            let linear: f64 = free.iter().zip(&e_free).map(|(&i, &e)| h[i] * e).sum::<f64>() - fixed;
            let value = -linear / n as f64;
            best = Some(best.map_or(value, |b: f64| b.min(value)));
        }
    }
    best
}

/// `min ‖y − s A x‖²` over `x ∈ [-1, 1]^n` by enumerating which coordinates
/// sit at `-1`, at `+1` or are free, solving the free block by least squares.
pub fn box_qp_by_enumeration(a: &DMatrix<f64>, y: &DVector<f64>, s: f64) -> (DVector<f64>, f64) {
    let n = a.ncols();
    let mut best = (DVector::zeros(n), f64::INFINITY);
    for code in 0..3usize.pow(n as u32) {
        let mut c = code;
        let mut x = DVector::zeros(n);
        let mut free = Vec::new();
        for i in 0..n {
            match c % 3 {
                0 => x[i] = -1.0,
                1 => x[i] = 1.0,
                _ => free.push(i),
            }
            c /= 3;
        }
        if !free.is_empty() {
            let fixed_part = a * &x * s;
            let rhs = y - fixed_part;
            let sub = DMatrix::from_fn(a.nrows(), free.len(), |r, k| s * a[(r, free[k])]);
            let gram = sub.transpose() * &sub;
            let Some(chol) = gram.cholesky() else { continue };
            let z = chol.solve(&(sub.transpose() * rhs));
            if z.iter().any(|v| v.abs() > 1.0 + 1e-12) {
                continue;
            }
            for (k, &i) in free.iter().enumerate() {
                x[i] = z[k];
            }
        }
        let value = (y - a * &x * s).norm_squared();
        if value < best.1 {
            best = (x, value);
        }
    }
    best
}

/// Entrywise sample mean and standard error of `f(column)` products.
pub struct Moments {
    pub sum: DMatrix<f64>,
    pub sum_sq: DMatrix<f64>,
    pub count: usize,
}

impl Moments {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { sum: DMatrix::zeros(rows, cols), sum_sq: DMatrix::zeros(rows, cols), count: 0 }
    }

    /// Adds the outer product `u vᵀ` as one sample.
    pub fn push(&mut self, u: &[f64], v: &[f64]) {
        for (i, &ui) in u.iter().enumerate() {
            for (j, &vj) in v.iter().enumerate() {
                let p = ui * vj;
                self.sum[(i, j)] += p;
                self.sum_sq[(i, j)] += p * p;
            }
        }
        self.count += 1;
    }

    pub fn mean(&self, i: usize, j: usize) -> f64 {
        self.sum[(i, j)] / self.count as f64
    }

    pub fn std_err(&self, i: usize, j: usize) -> f64 {
        let n = self.count as f64;
        let mean = self.mean(i, j);
        let var = (self.sum_sq[(i, j)] / n - mean * mean) * n / (n - 1.0);
        (var.max(0.0) / n).sqrt()
    }
}

/// Largest entrywise deviation, in standard errors, of the column
/// covariance of `Â` from `R_Â` and of the `Â`–`Δ` cross-covariance from 0.
pub fn estimate_moment_z_scores(
    config: &SystemConfig,
    stats: &bro_mimo::channel::ChannelStats,
    trials: u64,
    pilot_path: bool,
) -> (f64, f64) {
    use bro_mimo::channel::{sample_realization, sample_realization_direct};
    let m = stats.m();
    let mut cov = Moments::new(m, m);
    let mut cross = Moments::new(m, m);
    for t in 0..trials {
        let real = if pilot_path {
            sample_realization(config, stats, t).unwrap()
        } else {
            sample_realization_direct(config, stats, t).unwrap()
        };
        for j in 0..config.n {
            let a_hat: Vec<f64> = real.a_hat.column(j).iter().copied().collect();
            let delta: Vec<f64> = real.delta.column(j).iter().copied().collect();
            cov.push(&a_hat, &a_hat);
            cross.push(&a_hat, &delta);
        }
    }
    let mut z_cov: f64 = 0.0;
    let mut z_cross: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            z_cov = z_cov.max((cov.mean(i, j) - stats.r_hat[(i, j)]).abs() / cov.std_err(i, j));
            z_cross = z_cross.max(cross.mean(i, j).abs() / cross.std_err(i, j));
        }
    }
    (z_cov, z_cross)
}

/// `R (R + I/(τ_p ρ_p))^{-1} R` by a direct matrix inverse.
pub fn estimate_covariance_by_inverse(r: &DMatrix<f64>, tau_p: f64, rho_p: f64) -> DMatrix<f64> {
    let m = r.nrows();
    let shifted = r + DMatrix::identity(m, m) / (tau_p * rho_p);
    r * shifted.try_inverse().expect("shifted correlation is invertible") * r
}
