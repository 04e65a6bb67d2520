//! C ABI for the `bro-mimo` library.
//!
//! Every fallible function returns a [`BroStatus`]. On failure a description
//! is available from [`bro_last_error_message`] on the same thread. Objects
//! created by the library are opaque handles released with the matching
//! `*_free` function. No panic crosses the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use bro_mimo::asymptotics::{big_f, q_function, upsilon, varphi, AsymptoticSolution};
use bro_mimo::cli::{parse_config_str, read_config};
use bro_mimo::montecarlo::{run_experiment, AggregateResult, DecoderKind, Experiment, ExperimentConfig};
use bro_mimo::power::{optimize_alpha, AllocationCurve, AllocationObjective};
use bro_mimo::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BroStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Solver = 5,
    Io = 6,
    Panic = 7,
    OutOfRange = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BroDecoder {
    Bro = 0,
    Ls = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BroObjective {
    Mse = 0,
    Ber = 1,
}

/// Asymptotic prediction of the box-relaxation detector.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BroPrediction {
    pub mu_star: f64,
    pub gamma_star: f64,
    pub mse: f64,
    pub ber: f64,
    pub objective: f64,
    /// Receive antenna count used for the prediction.
    pub m: u64,
}

/// Monte Carlo averages of one decoder. Standard errors are NaN when only
/// one trial was run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroDecoderStats {
    pub decoder: BroDecoder,
    pub mean_mse: f64,
    pub std_err_mse: f64,
    pub mean_ber: f64,
    pub std_err_ber: f64,
    pub n_trials: u64,
    pub n_nonconverged: u64,
}

/// One grid point of an allocation curve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BroCurvePoint {
    pub alpha: f64,
    pub mu_star: f64,
    pub mse: f64,
    pub ber: f64,
}

/// Parsed and validated experiment configuration.
pub struct BroConfig(ExperimentConfig);

/// Result of [`bro_simulate`].
pub struct BroSimulation(AggregateResult);

/// Result of [`bro_optimize_alpha`].
pub struct BroAllocationCurve(AllocationCurve);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(BroStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match bro_mimo::cli::exit_code(&e) {
            3 => BroStatus::Parse,
            4 => BroStatus::Validation,
            5 => BroStatus::Solver,
            _ => BroStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F>(f: F) -> BroStatus
where
    F: FnOnce() -> Result<(), Failure>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BroStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("internal panic: {text}"));
            BroStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(BroStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(BroStatus::InvalidUtf8, format!("{what} is not UTF-8: {e}")))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bro_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bro_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Gaussian tail probability `Q(x)`.
#[no_mangle]
pub extern "C" fn bro_q_function(x: f64) -> f64 {
    q_function(x)
}

/// Asymptotic MSE as a function of the saddle parameter `μ`.
#[no_mangle]
pub extern "C" fn bro_big_f(mu: f64) -> f64 {
    big_f(mu)
}

#[no_mangle]
pub extern "C" fn bro_upsilon(mu: f64) -> f64 {
    upsilon(mu)
}

/// Second moment of the standard normal truncated to `[0, μ]`.
#[no_mangle]
pub extern "C" fn bro_varphi(mu: f64) -> f64 {
    varphi(mu)
}

/// Parses and validates a JSON configuration held in memory.
///
/// # Safety
/// `json` must be NULL or a NUL-terminated string; `out` must be NULL or
/// point to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn bro_config_parse_json(json: *const c_char, out: *mut *mut BroConfig) -> BroStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let config = parse_config_str(text)?.resolve()?;
        store(out, BroConfig(config))
    })
}

/// Reads, parses and validates a JSON configuration file.
///
/// # Safety
/// As for [`bro_config_parse_json`], with `path` a file path.
#[no_mangle]
pub unsafe extern "C" fn bro_config_load(path: *const c_char, out: *mut *mut BroConfig) -> BroStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        let config = read_config(Path::new(path))?.resolve()?;
        store(out, BroConfig(config))
    })
}

/// Overrides the number of Monte Carlo trials.
///
/// # Safety
/// `config` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bro_config_set_trials(config: *mut BroConfig, trials: u64) -> BroStatus {
    guard(|| {
        let config = config.as_mut().ok_or_else(|| null("config"))?;
        let mut updated = config.0.clone();
        updated.trials = trials as usize;
        updated.validate()?;
        config.0 = updated;
        Ok(())
    })
}

/// # Safety
/// `config` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bro_config_free(config: *mut BroConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

fn prediction(t: &AsymptoticSolution, m: usize) -> BroPrediction {
    BroPrediction {
        mu_star: t.mu_star,
        gamma_star: t.gamma_star,
        mse: t.mse,
        ber: t.ber,
        objective: t.objective,
        m: m as u64,
    }
}

/// Asymptotic MSE and BER for the configured system.
///
/// # Safety
/// `config` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bro_predict(config: *const BroConfig, out: *mut BroPrediction) -> BroStatus {
    guard(|| {
        let config = borrow(config, "config")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let exp = Experiment::prepare(&config.0)?;
        *out = prediction(&exp.theory()?, exp.stats.m());
        Ok(())
    })
}

/// Runs the configured Monte Carlo experiment.
///
/// # Safety
/// `config` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bro_simulate(config: *const BroConfig, out: *mut *mut BroSimulation) -> BroStatus {
    guard(|| {
        let config = borrow(config, "config")?;
        if out.is_null() {
            return Err(null("output handle"));
        }
        let result = run_experiment(&config.0)?;
        store(out, BroSimulation(result))
    })
}

/// Number of decoders in a simulation result; 0 for NULL.
///
/// # Safety
/// `sim` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bro_simulation_count(sim: *const BroSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.0.decoders.len())
}

/// Averages of the `index`-th decoder, in configuration order.
///
/// # Safety
/// `sim` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bro_simulation_get(
    sim: *const BroSimulation,
    index: usize,
    out: *mut BroDecoderStats,
) -> BroStatus {
    guard(|| {
        let sim = borrow(sim, "simulation")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let d = sim.0.decoders.get(index).ok_or_else(|| {
            Failure(BroStatus::OutOfRange, format!("decoder index {index} out of range ({})", sim.0.decoders.len()))
        })?;
        *out = BroDecoderStats {
            decoder: match d.decoder {
                DecoderKind::Bro => BroDecoder::Bro,
                DecoderKind::Ls => BroDecoder::Ls,
            },
            mean_mse: d.mean_mse,
            std_err_mse: d.std_err_mse.unwrap_or(f64::NAN),
            mean_ber: d.mean_ber,
            std_err_ber: d.std_err_ber.unwrap_or(f64::NAN),
            n_trials: d.n_trials as u64,
            n_nonconverged: d.n_nonconverged as u64,
        };
        Ok(())
    })
}

/// Asymptotic prediction attached to a simulation result.
///
/// # Safety
/// `sim` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bro_simulation_theory(sim: *const BroSimulation, out: *mut BroPrediction) -> BroStatus {
    guard(|| {
        let sim = borrow(sim, "simulation")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = prediction(&sim.0.theory, sim.0.m);
        Ok(())
    })
}

/// # Safety
/// `sim` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bro_simulation_free(sim: *mut BroSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Optimizes the data power fraction on a grid of `grid_points` values.
///
/// # Safety
/// `config` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bro_optimize_alpha(
    config: *const BroConfig,
    objective: BroObjective,
    grid_points: usize,
    out: *mut *mut BroAllocationCurve,
) -> BroStatus {
    guard(|| {
        let config = borrow(config, "config")?;
        if out.is_null() {
            return Err(null("output handle"));
        }
        let objective = match objective {
            BroObjective::Mse => AllocationObjective::Mse,
            BroObjective::Ber => AllocationObjective::Ber,
        };
        let curve = optimize_alpha(&config.0.system, objective, grid_points)?;
        store(out, BroAllocationCurve(curve))
    })
}

/// Number of grid points; 0 for NULL.
///
/// # Safety
/// `curve` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bro_curve_len(curve: *const BroAllocationCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.alphas.len())
}

/// # Safety
/// `curve` must be NULL or a live handle; `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn bro_curve_point(
    curve: *const BroAllocationCurve,
    index: usize,
    out: *mut BroCurvePoint,
) -> BroStatus {
    guard(|| {
        let c = &borrow(curve, "curve")?.0;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if index >= c.alphas.len() {
            return Err(Failure(
                BroStatus::OutOfRange,
                format!("grid index {index} out of range ({})", c.alphas.len()),
            ));
        }
        *out = BroCurvePoint {
            alpha: c.alphas[index],
            mu_star: c.mu_values[index],
            mse: c.mse_values[index],
            ber: c.ber_values[index],
        };
        Ok(())
    })
}

/// Refined MSE-optimal data fraction; NaN for NULL.
///
/// # Safety
/// `curve` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bro_curve_alpha_star_mse(curve: *const BroAllocationCurve) -> f64 {
    curve.as_ref().map_or(f64::NAN, |c| c.0.alpha_star_mse)
}

/// Refined BER-optimal data fraction; NaN for NULL.
///
/// # Safety
/// `curve` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bro_curve_alpha_star_ber(curve: *const BroAllocationCurve) -> f64 {
    curve.as_ref().map_or(f64::NAN, |c| c.0.alpha_star_ber)
}

/// # Safety
/// `curve` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bro_curve_free(curve: *mut BroAllocationCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}
