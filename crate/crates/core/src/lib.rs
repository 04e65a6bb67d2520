//! Box-relaxation detection of BPSK over receive-correlated massive MIMO
//! channels estimated from pilots.
//!
//! The crate has two halves. [`asymptotics`] predicts the large-system mean
//! square error and bit error rate of the box-relaxation detector from the
//! spectrum of the estimated-channel covariance; [`channel`], [`decoder`] and
//! [`montecarlo`] simulate the same system so the predictions can be checked.
//! [`power`] uses the predictions to split a fixed energy budget between
//! pilots and data.

pub mod asymptotics;
pub mod channel;
pub mod cli;
pub mod decoder;
pub mod error;
pub mod montecarlo;
pub mod power;
pub mod search;

pub use error::{Error, Result};
