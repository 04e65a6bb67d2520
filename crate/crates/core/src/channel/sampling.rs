use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::{ChannelStats, SystemConfig};
use crate::error::{Error, Result};

/// Independent random stream for one trial. Streams are addressed by
/// `(seed, trial_index)`, so trials can run in any order or in parallel.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// Matrix of iid standard normal entries.
pub fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn gaussian_vector<R: Rng>(len: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

fn bpsk_vector<R: Rng>(len: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(len, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 })
}

/// One coherence block: true channel, its estimate, and one data vector.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// True channel, `m × n`.
    pub a: DMatrix<f64>,
    /// LMMSE estimate, `m × n`.
    pub a_hat: DMatrix<f64>,
    /// Estimation error `a_hat − a`.
    pub delta: DMatrix<f64>,
    /// Pilot matrix `n × T_p`; only present on the pilot-simulation path.
    pub x_p: Option<DMatrix<f64>>,
    /// Transmitted BPSK symbols.
    pub x0: DVector<f64>,
    /// Received data vector, `√(ρ_d/n) a x0 + z`.
    pub y: DVector<f64>,
    pub z: DVector<f64>,
}

/// Orthogonal pilots: the first `n` rows of a random `T_p × T_p` orthogonal
/// matrix scaled by `√T_p`, so that `X_p X_pᵀ = T_p I_n`.
pub fn orthogonal_pilots<R: Rng>(n: usize, pilot_len: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if pilot_len < n {
        return Err(Error::Domain(format!("pilot length {pilot_len} must be at least n = {n}")));
    }
    let g = gaussian_matrix(pilot_len, n, rng);
    let q = g.qr().q();
    Ok(q.transpose() * (pilot_len as f64).sqrt())
}

fn data_phase<R: Rng>(
    a: DMatrix<f64>,
    a_hat: DMatrix<f64>,
    x_p: Option<DMatrix<f64>>,
    rho_d: f64,
    rng: &mut R,
) -> ChannelRealization {
    let (m, n) = a.shape();
    let delta = &a_hat - &a;
    let x0 = bpsk_vector(n, rng);
    let z = gaussian_vector(m, rng);
    let y = &a * &x0 * (rho_d / n as f64).sqrt() + &z;
    ChannelRealization { a, a_hat, delta, x_p, x0, y, z }
}

fn check_dims(config: &SystemConfig, stats: &ChannelStats) -> Result<()> {
    config.validate()?;
    if stats.m() != config.m() {
        return Err(Error::Domain(format!(
            "statistics are {}x{} but the configuration has m = {}",
            stats.m(),
            stats.m(),
            config.m()
        )));
    }
    Ok(())
}

/// Simulates the pilot phase and estimates the channel with the LMMSE filter.
///
/// With `X_p X_pᵀ = T_p I`, the matched-filter output
/// `√(n/ρ_p) Y_p X_pᵀ / T_p` equals `A + N` where `N` has iid entries of
/// variance `n/(T_p ρ_p)`; the estimate is `R (R + n/(T_p ρ_p) I)^{-1} (A + N)`.
pub fn sample_realization(config: &SystemConfig, stats: &ChannelStats, trial_index: u64) -> Result<ChannelRealization> {
    check_dims(config, stats)?;
    let rho_d = config.powers()?.rho_d;
    let rho_p = stats.rho_p;
    let (n, m, t_p) = (config.n, config.m(), config.pilot_len());
    let mut rng = trial_rng(config.seed, trial_index);

    let h = gaussian_matrix(m, n, &mut rng);
    let a = &stats.sqrt_r * h;
    let x_p = orthogonal_pilots(n, t_p, &mut rng)?;
    let z_p = gaussian_matrix(m, t_p, &mut rng);
    let y_p = &a * &x_p * (rho_p / n as f64).sqrt() + z_p;
    let matched = y_p * x_p.transpose() * ((n as f64 / rho_p).sqrt() / t_p as f64);
    let a_hat = &stats.lmmse_filter * matched;
    Ok(data_phase(a, a_hat, Some(x_p), rho_d, &mut rng))
}

/// Draws `(Â, Δ)` directly from their Gaussian laws: columns of `Â` from
/// `N(0, R_Â)` and, independently, columns of `Δ` from `N(0, R_Δ)`.
pub fn sample_estimated_pair_direct<R: Rng>(
    stats: &ChannelStats,
    n: usize,
    rng: &mut R,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = stats.m();
    let a_hat = &stats.sqrt_r_hat * gaussian_matrix(m, n, rng);
    let delta = &stats.sqrt_r_delta * gaussian_matrix(m, n, rng);
    (a_hat, delta)
}

/// Same law as [`sample_realization`] without simulating pilots.
pub fn sample_realization_direct(
    config: &SystemConfig,
    stats: &ChannelStats,
    trial_index: u64,
) -> Result<ChannelRealization> {
    check_dims(config, stats)?;
    let rho_d = config.powers()?.rho_d;
    let mut rng = trial_rng(config.seed, trial_index);
    let (a_hat, delta) = sample_estimated_pair_direct(stats, config.n, &mut rng);
    let a = &a_hat - &delta;
    Ok(data_phase(a, a_hat, None, rho_d, &mut rng))
}
