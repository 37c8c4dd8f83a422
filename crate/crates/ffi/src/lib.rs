//! C ABI for the one-switch feedback simulator.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns an [`AwgnStatus`]; on failure the message is
//! available from [`awgn_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use awgn_feedback::exponents::{self, ExponentParams};
use awgn_feedback::harness::Simulator;
use awgn_feedback::{Error, RunConfig, Scheme};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AwgnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Runtime = 4,
    Panic = 5,
}

/// Transmission strategy of a run.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AwgnScheme {
    FeedbackOneSwitch = 0,
    BaselineNoFeedback = 1,
    NaiveFeedback = 2,
}

impl From<AwgnScheme> for Scheme {
    fn from(s: AwgnScheme) -> Self {
        match s {
            AwgnScheme::FeedbackOneSwitch => Scheme::FeedbackOneSwitch,
            AwgnScheme::BaselineNoFeedback => Scheme::BaselineNoFeedback,
            AwgnScheme::NaiveFeedback => Scheme::NaiveFeedback,
        }
    }
}

/// Run configuration under construction.
pub struct AwgnParams {
    config: RunConfig,
}

/// Validated configuration with prebuilt codes.
pub struct AwgnSimulator {
    inner: Simulator,
}

/// Aggregate outcome of a run.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AwgnRunStats {
    pub trials: u64,
    pub errors: u64,
    pub p_hat: f64,
    /// 95% Clopper-Pearson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    /// `-ln(p_hat)/n`, NaN when no errors were observed.
    pub exponent_hat: f64,
    pub k2_freq: f64,
    pub k3_freq: f64,
    pub k4_freq: f64,
    pub coord_fail_freq: f64,
    pub wall_clock_secs: f64,
}

/// Summary of one session.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AwgnSession {
    pub true_message: u64,
    pub decision: u64,
    pub correct: bool,
    /// Selected group size, 0 for the baseline.
    pub group_size: u32,
    pub coordination_failure: bool,
    pub energy: f64,
}

/// Closed-form exponent coefficients; case values are in phase-I energy units.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AwgnExponentReport {
    pub e_k2: f64,
    pub e_k0: f64,
    pub e_s2: f64,
    pub e_s3: f64,
    pub e_s4: f64,
    pub e_k3: f64,
    pub e_k3_floor: f64,
    pub e_k4: f64,
    pub overall: f64,
    pub case_minimum: f64,
    /// Overall exponent per channel use.
    pub overall_per_n: f64,
    pub theorem: f64,
    pub theorem_vacuous: bool,
    pub windows_ok: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> AwgnStatus {
    if e.is_config() {
        AwgnStatus::Config
    } else {
        AwgnStatus::Runtime
    }
}

/// Runs `f`, recording errors and containing panics.
fn guard(f: impl FnOnce() -> Result<(), (AwgnStatus, String)>) -> AwgnStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AwgnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AwgnStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (AwgnStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (AwgnStatus, String) {
    (AwgnStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (AwgnStatus, String) {
    (AwgnStatus::InvalidArgument, msg.into())
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (AwgnStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn awgn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn awgn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Creates a parameter set with default values.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn awgn_params_new(out: *mut *mut AwgnParams) -> AwgnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(AwgnParams { config: RunConfig::default() }));
        Ok(())
    })
}

/// Creates a parameter set from a flat JSON configuration.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn awgn_params_from_json(json: *const c_char, out: *mut *mut AwgnParams) -> AwgnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = RunConfig::from_json_str(c_str(json, "json")?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(AwgnParams { config }));
        Ok(())
    })
}

/// Releases a parameter set; NULL is ignored.
///
/// # Safety
/// `params` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn awgn_params_free(params: *mut AwgnParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Sets one numeric configuration key: `A`, `sigma`, `sigma2`, `n`, `M`,
/// `beta`, `tau2`, `tau3`, `trials`, `seed`, `decoder.samples` or
/// `decoder.oracle_points`. Integer keys require integral values.
///
/// # Safety
/// `params` must be a live handle and `key` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn awgn_params_set(params: *mut AwgnParams, key: *const c_char, value: f64) -> AwgnStatus {
    guard(|| {
        let p = params.as_mut().ok_or_else(|| null("params"))?;
        let key = c_str(key, "key")?;
        let int = || -> Result<u64, (AwgnStatus, String)> {
            if value.fract() == 0.0 && (0.0..=u64::MAX as f64).contains(&value) {
                Ok(value as u64)
            } else {
                Err(invalid(format!("{key} needs a non-negative integer, got {value}")))
            }
        };
        let c = &mut p.config;
        match key {
            "A" => c.params.a = value,
            "sigma" => c.params.sigma = value,
            "sigma2" if value >= 0.0 => c.params.sigma = value.sqrt(),
            "sigma2" => return Err(invalid(format!("sigma2 must be non-negative, got {value}"))),
            "n" => c.params.n = int()? as usize,
            "M" => c.params.m = int()? as usize,
            "beta" => c.params.beta = value,
            "tau2" => c.params.tau2 = value,
            "tau3" => c.params.tau3 = value,
            "trials" => c.trials = int()?,
            "seed" => c.seed = int()?,
            "decoder.samples" => c.decoder.num_samples = int()? as usize,
            "decoder.oracle_points" => c.decoder.oracle_quadrature_points = int()? as usize,
            other => return Err(invalid(format!("unknown key {other:?}"))),
        }
        Ok(())
    })
}

/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn awgn_params_set_scheme(params: *mut AwgnParams, scheme: AwgnScheme) -> AwgnStatus {
    guard(|| {
        params.as_mut().ok_or_else(|| null("params"))?.config.scheme = scheme.into();
        Ok(())
    })
}

/// Validates `params` and builds the codes.
///
/// # Safety
/// `params` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn awgn_simulator_new(params: *const AwgnParams, out: *mut *mut AwgnSimulator) -> AwgnStatus {
    guard(|| {
        let p = params.as_ref().ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = Simulator::new(p.config.clone()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(AwgnSimulator { inner }));
        Ok(())
    })
}

/// Releases a simulator; NULL is ignored.
///
/// # Safety
/// `sim` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn awgn_simulator_free(sim: *mut AwgnSimulator) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs every configured trial.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn awgn_simulator_run(sim: *const AwgnSimulator, out: *mut AwgnRunStats) -> AwgnStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let st = s.inner.run().map_err(lib_err)?;
        let r = &st.row;
        *out = AwgnRunStats {
            trials: r.trials,
            errors: r.errors,
            p_hat: r.p_hat,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            exponent_hat: r.exponent_hat.unwrap_or(f64::NAN),
            k2_freq: r.k2_freq,
            k3_freq: r.k3_freq,
            k4_freq: r.k4_freq,
            coord_fail_freq: r.coord_fail_freq,
            wall_clock_secs: st.wall_clock_secs,
        };
        Ok(())
    })
}

/// Runs trial `trial` of the configured seed schedule.
///
/// # Safety
/// `sim` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn awgn_simulator_run_session(
    sim: *const AwgnSimulator,
    trial: u64,
    out: *mut AwgnSession,
) -> AwgnStatus {
    guard(|| {
        let s = sim.as_ref().ok_or_else(|| null("sim"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let t = s.inner.session(trial).map_err(lib_err)?;
        *out = AwgnSession {
            true_message: t.true_message as u64,
            decision: t.decision as u64,
            correct: t.correct,
            group_size: t.selection.map_or(0, |s| s.k() as u32),
            coordination_failure: t.coordination_failure(),
            energy: t.energy(),
        };
        Ok(())
    })
}

/// Closed-form exponent table for one parameter point.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn awgn_exponents(
    a: f64,
    beta: f64,
    tau2: f64,
    tau3: f64,
    sigma2: f64,
    out: *mut AwgnExponentReport,
) -> AwgnStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = exponents::overall(&ExponentParams { beta, tau2, tau3, sigma2, a }).map_err(lib_err)?;
        *out = AwgnExponentReport {
            e_k2: r.e_k2,
            e_k0: r.e_k0,
            e_s2: r.e_s2,
            e_s3: r.e_s3,
            e_s4: r.e_s4,
            e_k3: r.e_k3,
            e_k3_floor: r.e_k3_floor,
            e_k4: r.e_k4,
            overall: r.overall,
            case_minimum: r.case_minimum,
            overall_per_n: r.overall_per_n,
            theorem: r.theorem.value,
            theorem_vacuous: r.theorem.vacuous,
            windows_ok: r.windows.all(),
        };
        Ok(())
    })
}
