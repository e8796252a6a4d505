//! C ABI for the membrane simulator.
//!
//! Conventions: opaque handles with explicit `_new`/`_free` pairs, integer
//! status codes (`MemsimStatusCode`), and a thread-local last-error string
//! readable through [`memsim_last_error`]. All strings are NUL-terminated
//! UTF-8 owned by the library; do not free them from C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use memsim::config::SimulationConfig;
use memsim::error::Error;
use memsim::small_gap::{pullin_threshold, run_small_gap};
use memsim::state::BreakdownKind;
use memsim::stepper::{run_simulation, Trajectory};

/// Status codes mirroring the CLI exit-code contract.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemsimStatusCode {
    Ok = 0,
    NullArgument = 1,
    ConfigError = 2,
    CertificateFailure = 3,
    SolverFailure = 4,
}

/// Terminal classification of a trajectory.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemsimRunStatus {
    Running = 0,
    TimeLimit = 1,
    Touchdown = 2,
    GradientBlowup = 3,
}

/// Opaque simulation configuration handle.
pub struct MemsimConfig(SimulationConfig);

/// Opaque trajectory handle.
pub struct MemsimTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap();
    });
}

fn code_for(err: &Error) -> MemsimStatusCode {
    match err {
        Error::Config { .. } => MemsimStatusCode::ConfigError,
        _ => MemsimStatusCode::SolverFailure,
    }
}

/// Returns the message of the most recent error on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn memsim_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates a configuration populated with the documented defaults.
#[no_mangle]
pub extern "C" fn memsim_config_new() -> *mut MemsimConfig {
    Box::into_raw(Box::new(MemsimConfig(SimulationConfig::default())))
}

/// Parses a flat `key = value` file on top of the defaults.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn memsim_config_from_file(path: *const c_char) -> *mut MemsimConfig {
    if path.is_null() {
        set_error("null path");
        return ptr::null_mut();
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        set_error("path is not UTF-8");
        return ptr::null_mut();
    };
    match SimulationConfig::from_file(Path::new(path)) {
        Ok(cfg) => Box::into_raw(Box::new(MemsimConfig(cfg))),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Applies one `key`/`value` assignment to the configuration.
///
/// # Safety
/// `key` and `value` must be valid NUL-terminated strings; `config` must be
/// a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn memsim_config_set(
    config: *mut MemsimConfig,
    key: *const c_char,
    value: *const c_char,
) -> MemsimStatusCode {
    if config.is_null() || key.is_null() || value.is_null() {
        set_error("null argument");
        return MemsimStatusCode::NullArgument;
    }
    let (Ok(key), Ok(value)) = (CStr::from_ptr(key).to_str(), CStr::from_ptr(value).to_str())
    else {
        set_error("key or value is not UTF-8");
        return MemsimStatusCode::ConfigError;
    };
    match (*config).0.apply(key, value) {
        Ok(()) => MemsimStatusCode::Ok,
        Err(e) => {
            set_error(&e.to_string());
            code_for(&e)
        }
    }
}

/// Frees a configuration handle. Accepts null.
///
/// # Safety
/// `config` must be null or a live handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn memsim_config_free(config: *mut MemsimConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs one trajectory. `small_gap` nonzero forces the reduced model;
/// epsilon = 0 selects it automatically. On success `*out` receives an
/// owned trajectory handle.
///
/// # Safety
/// `config` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn memsim_run(
    config: *const MemsimConfig,
    small_gap: i32,
    out: *mut *mut MemsimTrajectory,
) -> MemsimStatusCode {
    if config.is_null() || out.is_null() {
        set_error("null argument");
        return MemsimStatusCode::NullArgument;
    }
    *out = ptr::null_mut();
    let cfg = &(*config).0;
    let reduced = small_gap != 0 || cfg.epsilon == 0.0;
    let result = if reduced { run_small_gap(cfg) } else { run_simulation(cfg) };
    match result {
        Ok(traj) => {
            let all_pass = traj.all_certificates_pass();
            *out = Box::into_raw(Box::new(MemsimTrajectory(traj)));
            if all_pass {
                MemsimStatusCode::Ok
            } else {
                set_error("one or more certificates failed");
                MemsimStatusCode::CertificateFailure
            }
        }
        Err(e) => {
            set_error(&e.to_string());
            code_for(&e)
        }
    }
}

/// Frees a trajectory handle. Accepts null.
///
/// # Safety
/// `traj` must be null or a live handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn memsim_trajectory_free(traj: *mut MemsimTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Terminal status of the run.
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn memsim_trajectory_status(traj: *const MemsimTrajectory) -> MemsimRunStatus {
    match (*traj).0.status.kind {
        BreakdownKind::Running => MemsimRunStatus::Running,
        BreakdownKind::TimeLimit => MemsimRunStatus::TimeLimit,
        BreakdownKind::Touchdown => MemsimRunStatus::Touchdown,
        BreakdownKind::GradientBlowup => MemsimRunStatus::GradientBlowup,
    }
}

/// Final simulated time.
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn memsim_trajectory_t_end(traj: *const MemsimTrajectory) -> f64 {
    (*traj).0.t_end
}

/// Breakdown time, or NaN when the run hit the time limit cleanly.
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn memsim_trajectory_t_event(traj: *const MemsimTrajectory) -> f64 {
    let t = &(*traj).0;
    if t.status.kind.is_breakdown() {
        t.status.t_event
    } else {
        f64::NAN
    }
}

/// Final minimum of 1 + u.
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn memsim_trajectory_min_gap(traj: *const MemsimTrajectory) -> f64 {
    (*traj).0.final_state.min_gap()
}

/// Total number of evaluated certificates.
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn memsim_trajectory_certificates_total(
    traj: *const MemsimTrajectory,
) -> usize {
    (*traj).0.certificates.len()
}

/// Number of failed certificates.
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn memsim_trajectory_certificates_failed(
    traj: *const MemsimTrajectory,
) -> usize {
    (*traj).0.certificates.iter().filter(|c| !c.pass).count()
}

/// A priori blow-up time bound, or NaN when none applies.
///
/// # Safety
/// `traj` must be a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn memsim_trajectory_blowup_bound(traj: *const MemsimTrajectory) -> f64 {
    match &(*traj).0.bounds {
        Some(b) => b.t_bound,
        None => f64::NAN,
    }
}

/// Pull-in threshold of the small-gap steady problem on an `nx`-node grid.
/// Writes λ* through `out_lambda`.
///
/// # Safety
/// `out_lambda` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn memsim_pullin_threshold(
    nx: usize,
    tol: f64,
    out_lambda: *mut f64,
) -> MemsimStatusCode {
    if out_lambda.is_null() {
        set_error("null argument");
        return MemsimStatusCode::NullArgument;
    }
    match pullin_threshold(nx, tol) {
        Ok((lambda_star, _)) => {
            *out_lambda = lambda_star;
            MemsimStatusCode::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            code_for(&e)
        }
    }
}

/// Library version string.
#[no_mangle]
pub extern "C" fn memsim_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}
