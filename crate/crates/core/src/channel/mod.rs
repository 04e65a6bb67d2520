//! Correlated channel model, pilot-based LMMSE estimation and the
//! covariance algebra of the estimate and its error.

mod config;
mod correlation;
mod sampling;
mod stats;

pub use config::{db_to_linear, SystemConfig, PERFECT_CSI_RHO_P};
pub use correlation::{
    build_correlation, matrix_sqrt_psd, reconstruct, symmetric_eigen_clamped, CorrelationModel, PSD_TOL,
};
pub use sampling::{
    gaussian_matrix, orthogonal_pilots, sample_estimated_pair_direct, sample_realization, sample_realization_direct,
    trial_rng, ChannelRealization,
};
pub use stats::{derive_stats, estimation_spectrum, ChannelStats};
