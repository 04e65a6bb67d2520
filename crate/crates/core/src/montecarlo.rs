//! Seeded Monte Carlo harness: channel realization, detection, metrics,
//! aggregation over trials and parameter sweeps.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{solve_minmax, AsymptoticInput, AsymptoticSolution};
use crate::channel::{
    build_correlation, derive_stats, sample_realization, sample_realization_direct, ChannelStats, SystemConfig,
};
use crate::decoder::{ber_metric, bro_solve, ls_solve, mse_metric, DecodeProblem, SolverOptions};
use crate::error::{Error, Result};

/// Environment variable capping the number of worker threads (0 = automatic).
pub const THREADS_ENV: &str = "BRO_MIMO_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecoderKind {
    #[serde(rename = "BRO")]
    Bro,
    #[serde(rename = "LS")]
    Ls,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bro => "BRO",
            Self::Ls => "LS",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BRO" => Ok(Self::Bro),
            "LS" | "ZF" => Ok(Self::Ls),
            _ => Err(Error::Parse(format!("unknown decoder `{s}` (expected BRO or LS)"))),
        }
    }
}

/// How a trial obtains the channel estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingPath {
    /// Transmit orthogonal pilots and apply the LMMSE filter.
    PilotSimulation,
    /// Draw the estimate and its error from their Gaussian laws.
    #[default]
    DirectStatistical,
}

/// One Monte Carlo experiment point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub trials: usize,
    pub decoders: Vec<DecoderKind>,
    pub sampling_path: SamplingPath,
    pub solver: SolverOptions,
}

impl ExperimentConfig {
    pub fn new(system: SystemConfig) -> Self {
        Self {
            system,
            trials: 100,
            decoders: vec![DecoderKind::Bro],
            sampling_path: SamplingPath::default(),
            solver: SolverOptions::default(),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = self.system.violations();
        if self.trials == 0 {
            v.push("trials must be at least 1".to_string());
        }
        if self.decoders.is_empty() {
            v.push("decoders must name at least one of BRO, LS".to_string());
        }
        if !(self.solver.tol.is_finite() && self.solver.tol > 0.0) {
            v.push(format!("tolerances.tol = {} must be positive", self.solver.tol));
        }
        if self.solver.max_iters == 0 {
            v.push("tolerances.max_iters must be at least 1".to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }
}

/// Metrics of one decoder on one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialMetrics {
    pub decoder: DecoderKind,
    pub mse: f64,
    pub ber: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial_index: u64,
    pub metrics: Vec<TrialMetrics>,
}

/// Trial averages for one decoder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecoderSummary {
    pub decoder: DecoderKind,
    pub mean_mse: f64,
    /// `None` when only one trial was run.
    pub std_err_mse: Option<f64>,
    pub mean_ber: f64,
    pub std_err_ber: Option<f64>,
    pub n_trials: usize,
    pub n_nonconverged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    /// Realized receive antenna count.
    pub m: usize,
    pub rho_p: f64,
    pub rho_d: f64,
    pub decoders: Vec<DecoderSummary>,
    /// Asymptotic prediction for the box-relaxation detector at the realized `m`.
    pub theory: AsymptoticSolution,
}

impl AggregateResult {
    pub fn summary(&self, decoder: DecoderKind) -> Option<&DecoderSummary> {
        self.decoders.iter().find(|d| d.decoder == decoder)
    }
}

/// An experiment with its channel statistics computed once.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub stats: ChannelStats,
    pub rho_d: f64,
}

impl Experiment {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let system = &config.system;
        let rho_d = system.powers()?.rho_d;
        if rho_d <= 0.0 {
            return Err(Error::Domain(format!("alpha = {} leaves no power for data", system.alpha)));
        }
        let r = build_correlation(system.corr_model, system.m(), system.r)?;
        let stats = derive_stats(&r, system.effective_tau_p(), system.estimation_rho_p()?)?;
        Ok(Self { config: config.clone(), stats, rho_d })
    }

    /// Asymptotic prediction from the spectrum of the estimate covariance.
    pub fn theory(&self) -> Result<AsymptoticSolution> {
        let input = AsymptoticInput::new(
            self.stats.lambda.clone(),
            self.stats.delta.clone(),
            self.rho_d,
            self.config.system.n,
        )?;
        solve_minmax(&input)
    }

    pub fn run_trial(&self, trial_index: u64) -> Result<TrialOutcome> {
        let system = &self.config.system;
        let real = match self.config.sampling_path {
            SamplingPath::PilotSimulation => sample_realization(system, &self.stats, trial_index)?,
            SamplingPath::DirectStatistical => sample_realization_direct(system, &self.stats, trial_index)?,
        };
        let problem = DecodeProblem::new(&real.y, &real.a_hat, self.rho_d)?;
        let metrics = self
            .config
            .decoders
            .iter()
            .map(|&decoder| {
                let result = match decoder {
                    DecoderKind::Bro => bro_solve(&problem, self.config.solver.tol, self.config.solver.max_iters)?,
                    DecoderKind::Ls => ls_solve(&problem)?,
                };
                Ok(TrialMetrics {
                    decoder,
                    mse: mse_metric(&result.x_relaxed, &real.x0)?,
                    ber: ber_metric(&result.x_detected, &real.x0)?,
                    converged: result.converged,
                    iterations: result.iterations,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TrialOutcome { trial_index, metrics })
    }

    /// Runs the given trials in parallel and aggregates them.
    pub fn run_trials(&self, indices: &[u64]) -> Result<AggregateResult> {
        let outcomes = indices.par_iter().map(|&i| self.run_trial(i)).collect::<Result<Vec<_>>>()?;
        Ok(AggregateResult {
            m: self.stats.m(),
            rho_p: self.config.system.powers()?.rho_p,
            rho_d: self.rho_d,
            decoders: aggregate(&outcomes, &self.config.decoders),
            theory: self.theory()?,
        })
    }
}

/// Runs one trial of `config`. Deterministic in `(config.system.seed, trial_index)`.
pub fn run_trial(config: &ExperimentConfig, trial_index: u64) -> Result<TrialOutcome> {
    Experiment::prepare(config)?.run_trial(trial_index)
}

/// Runs trials `0..config.trials` and aggregates them.
pub fn run_experiment(config: &ExperimentConfig) -> Result<AggregateResult> {
    let exp = Experiment::prepare(config)?;
    let indices: Vec<u64> = (0..config.trials as u64).collect();
    exp.run_trials(&indices)
}

fn mean_and_std_err(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

/// Per-decoder means and standard errors. The result does not depend on the
/// order of `outcomes`.
pub fn aggregate(outcomes: &[TrialOutcome], decoders: &[DecoderKind]) -> Vec<DecoderSummary> {
    let mut sorted: Vec<&TrialOutcome> = outcomes.iter().collect();
    sorted.sort_by_key(|o| o.trial_index);
    decoders
        .iter()
        .map(|&decoder| {
            let rows: Vec<&TrialMetrics> =
                sorted.iter().filter_map(|o| o.metrics.iter().find(|m| m.decoder == decoder)).collect();
            let mse: Vec<f64> = rows.iter().map(|m| m.mse).collect();
            let ber: Vec<f64> = rows.iter().map(|m| m.ber).collect();
            let (mean_mse, std_err_mse) = mean_and_std_err(&mse);
            let (mean_ber, std_err_ber) = mean_and_std_err(&ber);
            DecoderSummary {
                decoder,
                mean_mse,
                std_err_mse,
                mean_ber,
                std_err_ber,
                n_trials: rows.len(),
                n_nonconverged: rows.iter().filter(|m| !m.converged).count(),
            }
        })
        .collect()
}

/// Parameter varied by [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    RhoDb,
    R,
    Alpha,
    Beta,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::RhoDb => "rho_db",
            Self::R => "r",
            Self::Alpha => "alpha",
            Self::Beta => "beta",
        }
    }

    pub fn apply(self, system: &mut SystemConfig, value: f64) {
        match self {
            Self::RhoDb => system.set_rho_db(value),
            Self::R => system.r = value,
            Self::Alpha => system.alpha = value,
            Self::Beta => system.beta = value,
        }
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho_db" | "rho" => Ok(Self::RhoDb),
            "r" => Ok(Self::R),
            "alpha" => Ok(Self::Alpha),
            "beta" => Ok(Self::Beta),
            _ => Err(Error::Parse(format!("unknown sweep parameter `{s}` (expected rho_db, r, alpha or beta)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub result: Result<AggregateResult>,
}

/// Runs `config` once per value of `parameter`. A failing point is recorded
/// and the sweep moves on.
pub fn sweep(config: &ExperimentConfig, parameter: SweepParameter, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::Validation(vec!["sweep values must not be empty".to_string()]));
    }
    Ok(values
        .iter()
        .map(|&value| {
            let mut point = config.clone();
            parameter.apply(&mut point.system, value);
            SweepPoint { value, result: run_experiment(&point) }
        })
        .collect())
}

/// Sizes the global worker pool from `BRO_MIMO_THREADS`. Calling it more than
/// once, or after the pool exists, has no effect.
pub fn init_thread_pool_from_env() -> Result<()> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("{THREADS_ENV} = `{v}` is not a non-negative integer")))?,
        Err(_) => 0,
    };
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
