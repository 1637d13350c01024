//! C interface to the superrad simulator.
//!
//! Configurations and results are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an [`SrStatus`]; the message of the last failure on the calling thread is
//! available from [`sr_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use superrad::config::parse_config;
use superrad::experiments::{builtin, khz_to_rad};
use superrad::params::resonance_frequency;
use superrad::{simulate, Error, SimulationConfig, Trajectory};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ValidationError = 4,
    Instability = 5,
    IoError = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Opaque simulation configuration.
pub struct SrConfig {
    inner: SimulationConfig,
}

/// Opaque finished run.
pub struct SrRun {
    inner: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn fail(status: SrStatus, msg: impl Into<String>) -> SrStatus {
    set_error(msg);
    status
}

fn from_error(err: Error) -> SrStatus {
    let status = match err {
        Error::Validation { .. } => SrStatus::ValidationError,
        Error::Parse { .. } => SrStatus::ParseError,
        Error::Instability { .. } => SrStatus::Instability,
        Error::Io { .. } => SrStatus::IoError,
    };
    fail(status, err.to_string())
}

fn guard(f: impl FnOnce() -> SrStatus) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => {
            if status == SrStatus::Ok {
                set_error("");
            }
            status
        }
        Err(_) => fail(SrStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, SrStatus> {
    if p.is_null() {
        return Err(fail(SrStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SrStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

macro_rules! deref {
    ($p:expr, $what:literal) => {
        match $p.as_ref() {
            Some(v) => v,
            None => return fail(SrStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

macro_rules! deref_mut {
    ($p:expr, $what:literal) => {
        match $p.as_mut() {
            Some(v) => v,
            None => return fail(SrStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn sr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// `order · 4ω_r` in rad/s.
///
/// # Safety
/// `out` must point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn sr_resonance_frequency(order: i64, recoil_frequency: f64, out: *mut f64) -> SrStatus {
    guard(|| {
        let out = deref_mut!(out, "out");
        match resonance_frequency(order, recoil_frequency) {
            Ok(v) => {
                *out = v;
                SrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

#[no_mangle]
pub extern "C" fn sr_config_default() -> *mut SrConfig {
    Box::into_raw(Box::new(SrConfig {
        inner: SimulationConfig::default(),
    }))
}

/// Parse a TOML document.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_config_parse(text: *const c_char, out: *mut *mut SrConfig) -> SrStatus {
    guard(|| {
        let out = deref_mut!(out, "out");
        *out = ptr::null_mut();
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match parse_config(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SrConfig { inner }));
                SrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Configuration of a built-in scenario.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_config_builtin(name: *const c_char, out: *mut *mut SrConfig) -> SrStatus {
    guard(|| {
        let out = deref_mut!(out, "out");
        *out = ptr::null_mut();
        let name = match str_arg(name, "name") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match builtin(name) {
            Ok(s) => {
                *out = Box::into_raw(Box::new(SrConfig { inner: s.config() }));
                SrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sr_config_free(cfg: *mut SrConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_config_set_delta_omega_khz(cfg: *mut SrConfig, khz: f64) -> SrStatus {
    guard(|| {
        let cfg = deref_mut!(cfg, "cfg");
        if !(khz.is_finite() && khz >= 0.0) {
            return fail(SrStatus::InvalidArgument, format!("delta_omega_khz must be >= 0, got {khz}"));
        }
        cfg.inner.params.delta_omega = khz_to_rad(khz);
        SrStatus::Ok
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_config_set_coupling_g(cfg: *mut SrConfig, g_per_s: f64) -> SrStatus {
    guard(|| {
        let cfg = deref_mut!(cfg, "cfg");
        if !(g_per_s.is_finite() && g_per_s >= 0.0) {
            return fail(SrStatus::InvalidArgument, format!("g_per_s must be >= 0, got {g_per_s}"));
        }
        cfg.inner.params.coupling_g = g_per_s;
        SrStatus::Ok
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_config_set_phi0(cfg: *mut SrConfig, phi0_rad: f64) -> SrStatus {
    guard(|| {
        let cfg = deref_mut!(cfg, "cfg");
        if !phi0_rad.is_finite() {
            return fail(SrStatus::InvalidArgument, "phi0_rad must be finite");
        }
        cfg.inner.params.phi0 = phi0_rad;
        SrStatus::Ok
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_config_set_pulse_duration_us(cfg: *mut SrConfig, us: f64) -> SrStatus {
    guard(|| {
        let cfg = deref_mut!(cfg, "cfg");
        if !(us.is_finite() && us > 0.0) {
            return fail(SrStatus::InvalidArgument, format!("pulse_duration_us must be positive, got {us}"));
        }
        cfg.inner.params.pulse_duration = us / 1e6;
        SrStatus::Ok
    })
}

/// Set resolution; checked together with the rest of the config by `sr_config_validate`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_config_set_grid(
    cfg: *mut SrConfig,
    num_points: usize,
    dt: f64,
    sample_every: usize,
) -> SrStatus {
    guard(|| {
        let cfg = deref_mut!(cfg, "cfg");
        cfg.inner.grid.num_points = num_points;
        cfg.inner.grid.dt = dt;
        cfg.inner.grid.sample_every = sample_every;
        SrStatus::Ok
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_config_validate(cfg: *const SrConfig) -> SrStatus {
    guard(|| {
        let cfg = deref!(cfg, "cfg");
        match cfg.inner.resolve() {
            Ok(_) => SrStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}

/// Run the simulation described by `cfg`.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_simulate(cfg: *const SrConfig, out: *mut *mut SrRun) -> SrStatus {
    guard(|| {
        let out = deref_mut!(out, "out");
        *out = ptr::null_mut();
        let cfg = deref!(cfg, "cfg");
        match simulate(&cfg.inner) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SrRun { inner }));
                SrStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `run` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sr_run_free(run: *mut SrRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of captures (0 for a null handle).
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_run_capture_count(run: *const SrRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.captures.len())
}

/// Number of lattice modes (0 for a null handle).
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_run_mode_count(run: *const SrRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.lattice.len())
}

/// Label `(n, m)` of mode `index` in lattice order.
///
/// # Safety
/// `run` must be a live handle; `n` and `m` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_run_mode(run: *const SrRun, index: usize, n: *mut i32, m: *mut i32) -> SrStatus {
    guard(|| {
        let run = deref!(run, "run");
        let (n, m) = (deref_mut!(n, "n"), deref_mut!(m, "m"));
        match run.inner.modes().get(index) {
            Some(mode) => {
                *n = mode.n;
                *m = mode.m;
                SrStatus::Ok
            }
            None => fail(SrStatus::OutOfRange, format!("mode index {index} out of range")),
        }
    })
}

/// Dimensionless time and time in microseconds of capture `k`.
///
/// # Safety
/// `run` must be a live handle; `tau` and `t_us` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_run_time(run: *const SrRun, k: usize, tau: *mut f64, t_us: *mut f64) -> SrStatus {
    guard(|| {
        let run = deref!(run, "run");
        let (tau, t_us) = (deref_mut!(tau, "tau"), deref_mut!(t_us, "t_us"));
        match run.inner.captures.get(k) {
            Some(c) => {
                *tau = c.tau;
                *t_us = c.t_us;
                SrStatus::Ok
            }
            None => fail(SrStatus::OutOfRange, format!("capture {k} out of range")),
        }
    })
}

/// Copy the populations of capture `k` (lattice order) into `buf`, which must
/// hold at least `sr_run_mode_count` values.
///
/// # Safety
/// `run` must be a live handle; `buf` must be writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sr_run_populations(run: *const SrRun, k: usize, buf: *mut f64, len: usize) -> SrStatus {
    guard(|| {
        let run = deref!(run, "run");
        if buf.is_null() {
            return fail(SrStatus::NullPointer, "buf is null");
        }
        let Some(c) = run.inner.captures.get(k) else {
            return fail(SrStatus::OutOfRange, format!("capture {k} out of range"));
        };
        if len < c.populations.len() {
            return fail(
                SrStatus::InvalidArgument,
                format!("buffer holds {len} values, need {}", c.populations.len()),
            );
        }
        std::slice::from_raw_parts_mut(buf, c.populations.len()).copy_from_slice(&c.populations);
        SrStatus::Ok
    })
}

/// Probed `|e₊|`, `|e₋|` and the diagonal components `|e₊^(0,0)|`,
/// `|e₊^(1,1)|`, `|e₊^(2,2)|` at capture `k`; `diagonal` receives 3 values
/// (zero for components outside the lattice).
///
/// # Safety
/// `run` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_run_endfire(
    run: *const SrRun,
    k: usize,
    e_plus: *mut f64,
    e_minus: *mut f64,
    diagonal: *mut f64,
) -> SrStatus {
    guard(|| {
        let run = deref!(run, "run");
        let (e_plus, e_minus) = (deref_mut!(e_plus, "e_plus"), deref_mut!(e_minus, "e_minus"));
        if diagonal.is_null() {
            return fail(SrStatus::NullPointer, "diagonal is null");
        }
        let Some(c) = run.inner.captures.get(k) else {
            return fail(SrStatus::OutOfRange, format!("capture {k} out of range"));
        };
        *e_plus = c.e_plus;
        *e_minus = c.e_minus;
        let out = std::slice::from_raw_parts_mut(diagonal, 3);
        for (slot, mode) in out.iter_mut().zip(superrad::dynamics::DIAGONAL_COMPONENTS) {
            *slot = c.diagonal_components.iter().find(|(m, _)| *m == mode).map_or(0.0, |(_, v)| *v);
        }
        SrStatus::Ok
    })
}

/// Largest relative deviation of the total atom number over the run.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_run_number_drift(run: *const SrRun, out: *mut f64) -> SrStatus {
    guard(|| {
        let run = deref!(run, "run");
        *deref_mut!(out, "out") = run.inner.max_number_drift();
        SrStatus::Ok
    })
}
