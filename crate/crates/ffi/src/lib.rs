//! C ABI over `maee-core`.
//!
//! Scenarios and results are opaque heap handles released with their
//! `*_free` function. Every fallible call returns a [`MaeeStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`maee_last_error_message`]. Rates are in nats, powers in watts and
//! positions in metres.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use maee_core::ao::{mc_evaluate, run_ao, RunTrace, Scheme};
use maee_core::channel::{sample_scenario, ChannelStatistics};
use maee_core::config::ScenarioConfig;
use maee_core::experiment::{parse_scenario, ScenarioFile};
use maee_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaeeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Infeasible = 4,
    Numerical = 5,
    Panic = 6,
}

/// Optimization scheme.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaeeScheme {
    Ma = 0,
    Tma = 1,
    Rma = 2,
    Dps = 3,
    Upa = 4,
    MaLos = 5,
    SingleUser = 6,
}

impl From<MaeeScheme> for Scheme {
    fn from(s: MaeeScheme) -> Self {
        match s {
            MaeeScheme::Ma => Scheme::Ma,
            MaeeScheme::Tma => Scheme::Tma,
            MaeeScheme::Rma => Scheme::Rma,
            MaeeScheme::Dps => Scheme::Dps,
            MaeeScheme::Upa => Scheme::Upa,
            MaeeScheme::MaLos => Scheme::MaLos,
            MaeeScheme::SingleUser => Scheme::SingleUser,
        }
    }
}

/// Sampled scenario: configuration plus drawn statistics.
pub struct MaeeScenario {
    config: ScenarioConfig,
    stats: ChannelStatistics,
}

/// Outcome of one optimization run.
pub struct MaeeResult {
    trace: RunTrace,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(e: &Error) -> MaeeStatus {
    match e {
        Error::Config { .. } | Error::Parse(_) | Error::Io(_) => MaeeStatus::Config,
        Error::Infeasible(_) => MaeeStatus::Infeasible,
        Error::Dimension(_) => MaeeStatus::InvalidArgument,
        _ => MaeeStatus::Numerical,
    }
}

fn guard<F: FnOnce() -> Result<(), (MaeeStatus, String)>>(f: F) -> MaeeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MaeeStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MaeeStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (MaeeStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (MaeeStatus, String) {
    (MaeeStatus::NullPointer, format!("`{name}` is null"))
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn maee_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn maee_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map(|s| s.as_ptr()).unwrap_or(ptr::null()))
}

/// Creates a scenario from a TOML document with a `[scenario]` table and
/// optional `[knobs]` table, or the reference operating point when `toml`
/// is null, and draws its statistics from `seed`.
///
/// # Safety
/// `toml` must be null or a valid NUL-terminated string; `out` must be a
/// valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn maee_scenario_new(toml: *const c_char, seed: u64, out: *mut *mut MaeeScenario) -> MaeeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let config = if toml.is_null() {
            ScenarioFile::reference().to_config(Default::default()).map_err(core_err)?
        } else {
            let text = CStr::from_ptr(toml).to_str().map_err(|_| (MaeeStatus::InvalidArgument, "configuration is not UTF-8".to_string()))?;
            parse_scenario(text).map_err(core_err)?
        };
        let stats = sample_scenario(&config, seed).map_err(core_err)?;
        *out = Box::into_raw(Box::new(MaeeScenario { config, stats }));
        Ok(())
    })
}

/// Releases a scenario; null is ignored.
///
/// # Safety
/// `scenario` must be null or a handle from [`maee_scenario_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn maee_scenario_free(scenario: *mut MaeeScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Antenna and user counts of a scenario.
///
/// # Safety
/// `scenario` must be a live handle; each output pointer must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn maee_scenario_dims(scenario: *const MaeeScenario, n_tx: *mut usize, n_rx: *mut usize, n_users: *mut usize) -> MaeeStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        for (p, v) in [(n_tx, s.config.n_tx), (n_rx, s.config.n_rx), (n_users, s.config.n_users)] {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Runs the alternating optimization for `scheme`.
///
/// # Safety
/// `scenario` must be a live handle and `out` writable storage for one
/// handle.
#[no_mangle]
pub unsafe extern "C" fn maee_run(scenario: *const MaeeScenario, scheme: MaeeScheme, out: *mut *mut MaeeResult) -> MaeeStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let trace = run_ao(&s.config, &s.stats, scheme.into()).map_err(core_err)?;
        *out = Box::into_raw(Box::new(MaeeResult { trace }));
        Ok(())
    })
}

/// Releases a result; null is ignored.
///
/// # Safety
/// `result` must be null or a handle from [`maee_run`] that has not been
/// freed.
#[no_mangle]
pub unsafe extern "C" fn maee_result_free(result: *mut MaeeResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Final DE energy efficiency (nats/J/Hz), sum rate (nats/s/Hz), transmit
/// power (W) and executed outer iterations. Null outputs are skipped.
///
/// # Safety
/// `result` must be a live handle; each output pointer must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn maee_result_summary(result: *const MaeeResult, ee: *mut f64, sum_rate: *mut f64, tx_power: *mut f64, iterations: *mut usize) -> MaeeStatus {
    guard(|| {
        let r = &result.as_ref().ok_or_else(|| null("result"))?.trace;
        for (p, v) in [(ee, r.result.ee), (sum_rate, r.result.sum_rate), (tx_power, r.result.tx_power)] {
            if !p.is_null() {
                *p = v;
            }
        }
        if !iterations.is_null() {
            *iterations = r.iterations.len();
        }
        Ok(())
    })
}

/// Copies the energy-efficiency trace (initial point first) into `buf`.
/// `written` receives the full trace length even when `len` is too small,
/// in which case nothing is copied and `INVALID_ARGUMENT` is returned.
///
/// # Safety
/// `result` must be a live handle; `buf` must be valid for `len` writes
/// and `written` writable.
#[no_mangle]
pub unsafe extern "C" fn maee_result_ee_trace(result: *const MaeeResult, buf: *mut f64, len: usize, written: *mut usize) -> MaeeStatus {
    guard(|| {
        let r = &result.as_ref().ok_or_else(|| null("result"))?.trace;
        if written.is_null() {
            return Err(null("written"));
        }
        let trace = r.ee_trace();
        *written = trace.len();
        if len < trace.len() {
            return Err((MaeeStatus::InvalidArgument, format!("buffer holds {len} values, trace has {}", trace.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(trace.as_ptr(), buf, trace.len());
        Ok(())
    })
}

unsafe fn copy_positions(x: &[f64], y: &[f64], out_x: *mut f64, out_y: *mut f64, len: usize) -> Result<(), (MaeeStatus, String)> {
    if out_x.is_null() || out_y.is_null() {
        return Err(null("x/y"));
    }
    if len != x.len() {
        return Err((MaeeStatus::InvalidArgument, format!("expected {} positions, got buffer of {len}", x.len())));
    }
    ptr::copy_nonoverlapping(x.as_ptr(), out_x, len);
    ptr::copy_nonoverlapping(y.as_ptr(), out_y, len);
    Ok(())
}

/// Final transmit positions; `len` must equal the transmit antenna count.
///
/// # Safety
/// `result` must be a live handle; `x` and `y` must be valid for `len`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn maee_result_tx_positions(result: *const MaeeResult, x: *mut f64, y: *mut f64, len: usize) -> MaeeStatus {
    guard(|| {
        let t = &result.as_ref().ok_or_else(|| null("result"))?.trace.layout.t;
        copy_positions(&t.x, &t.y, x, y, len)
    })
}

/// Final receive positions of `user`; `len` must equal the receive antenna
/// count.
///
/// # Safety
/// `result` must be a live handle; `x` and `y` must be valid for `len`
/// writes.
#[no_mangle]
pub unsafe extern "C" fn maee_result_rx_positions(result: *const MaeeResult, user: usize, x: *mut f64, y: *mut f64, len: usize) -> MaeeStatus {
    guard(|| {
        let layout = &result.as_ref().ok_or_else(|| null("result"))?.trace.layout;
        let r = layout.r.get(user).ok_or_else(|| (MaeeStatus::InvalidArgument, format!("user {user} out of range")))?;
        copy_positions(&r.x, &r.y, x, y, len)
    })
}

/// Sample-mean energy efficiency (nats/J/Hz) of a result on its scenario.
///
/// # Safety
/// `scenario` and `result` must be live handles, the result produced from
/// that scenario; `ee` must be writable.
#[no_mangle]
pub unsafe extern "C" fn maee_result_mc_ee(scenario: *const MaeeScenario, result: *const MaeeResult, samples: usize, seed: u64, ee: *mut f64) -> MaeeStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let r = &result.as_ref().ok_or_else(|| null("result"))?.trace;
        if ee.is_null() {
            return Err(null("ee"));
        }
        if samples == 0 {
            return Err((MaeeStatus::InvalidArgument, "samples must be positive".into()));
        }
        if r.layout.r.len() != s.config.n_users || r.layout.t.len() != s.config.n_tx {
            return Err((MaeeStatus::InvalidArgument, "result does not belong to this scenario".into()));
        }
        let (sum, _) = mc_evaluate(&s.config, &s.stats, &r.layout, &r.precoder, samples, seed).map_err(core_err)?;
        *ee = sum / s.config.power.total(r.precoder.power());
        Ok(())
    })
}
