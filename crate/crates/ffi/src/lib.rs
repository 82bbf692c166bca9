//! C ABI over the solver and the analysis pipeline.
//!
//! Objects cross the boundary as opaque handles. Every fallible call returns
//! an [`SbvpStatus`]; the message of the last failure on the calling thread is
//! available from [`sbvp_last_error`]. Strings returned by the library must be
//! released with [`sbvp_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sbvp::harness::{analyze_solved, solve_scenario, ScenarioConfig, ScenarioReport, Solved};
use sbvp::{Error, Point};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbvpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    NonConvergence = 4,
    NotFound = 5,
    BufferTooSmall = 6,
    Failure = 7,
    Panic = 8,
}

/// A solved scenario.
pub struct SbvpSolution {
    config: ScenarioConfig,
    solved: Solved,
}

/// A diagnostics report.
pub struct SbvpReport {
    report: ScenarioReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> SbvpStatus {
    match e {
        Error::InvalidConfig(_) | Error::InvalidSpec(_) | Error::Json(_) => SbvpStatus::InvalidConfig,
        Error::NonConvergence { .. } | Error::DirichletNonConvergence { .. } => SbvpStatus::NonConvergence,
        _ => SbvpStatus::Failure,
    }
}

fn guard(f: impl FnOnce() -> Result<(), SbvpStatus>) -> SbvpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SbvpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            SbvpStatus::Panic
        }
    }
}

fn fail(e: Error) -> SbvpStatus {
    set_error(e.to_string());
    status_of(&e)
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, SbvpStatus> {
    if p.is_null() {
        set_error("null pointer argument");
        return Err(SbvpStatus::NullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        SbvpStatus::InvalidUtf8
    })
}

unsafe fn ref_arg<'a, T>(p: *const T) -> Result<&'a T, SbvpStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle");
        SbvpStatus::NullPointer
    })
}

fn out_arg<T>(p: *mut T) -> Result<(), SbvpStatus> {
    if p.is_null() {
        set_error("null output pointer");
        Err(SbvpStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn sbvp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sbvp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sbvp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solves the scenario described by a JSON config.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbvp_solve(config_json: *const c_char, out: *mut *mut SbvpSolution) -> SbvpStatus {
    guard(|| {
        out_arg(out)?;
        *out = ptr::null_mut();
        let text = str_arg(config_json)?;
        let config = ScenarioConfig::from_json(text).map_err(fail)?;
        let solved = solve_scenario(&config).map_err(fail)?;
        *out = Box::into_raw(Box::new(SbvpSolution { config, solved }));
        Ok(())
    })
}

/// # Safety
/// `sol` must come from [`sbvp_solve`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sbvp_solution_free(sol: *mut SbvpSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Number of sites, or 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbvp_solution_len(sol: *const SbvpSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.solved.field.u.len())
}

/// Copies the sites as interleaved `x, y` pairs into `buf` (length `2n`).
///
/// # Safety
/// `buf` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sbvp_solution_sites(sol: *const SbvpSolution, buf: *mut f64, len: usize) -> SbvpStatus {
    guard(|| {
        let s = ref_arg(sol)?;
        let flat: Vec<f64> = s.solved.field.u.sites().iter().flat_map(|p| [p.x, p.y]).collect();
        copy_out(&flat, buf, len)
    })
}

/// Copies the dual weights into `buf` (length `n`).
///
/// # Safety
/// `buf` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sbvp_solution_weights(sol: *const SbvpSolution, buf: *mut f64, len: usize) -> SbvpStatus {
    guard(|| {
        let s = ref_arg(sol)?;
        copy_out(s.solved.field.u.weights(), buf, len)
    })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), SbvpStatus> {
    out_arg(buf)?;
    if len < src.len() {
        set_error(format!("buffer holds {len} values, need {}", src.len()));
        return Err(SbvpStatus::BufferTooSmall);
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Evaluates the potential `u` and the transport map at `(x, y)`.
///
/// # Safety
/// `value` and `map` (two doubles) must be valid, or null to skip.
#[no_mangle]
pub unsafe extern "C" fn sbvp_solution_eval(
    sol: *const SbvpSolution,
    x: f64,
    y: f64,
    value: *mut f64,
    map: *mut f64,
) -> SbvpStatus {
    guard(|| {
        let s = ref_arg(sol)?;
        let p = Point::new(x, y);
        if !value.is_null() {
            *value = s.solved.field.u.value(p);
        }
        if !map.is_null() {
            let g = s.solved.field.u.brenier_map(p);
            *map = g.x;
            *map.add(1) = g.y;
        }
        Ok(())
    })
}

/// Runs every diagnostic stage on a solution. Stage failures are recorded in
/// the report, not returned.
///
/// # Safety
/// `sol` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sbvp_analyze(sol: *const SbvpSolution, out: *mut *mut SbvpReport) -> SbvpStatus {
    guard(|| {
        out_arg(out)?;
        *out = ptr::null_mut();
        let s = ref_arg(sol)?;
        let report = analyze_solved(&s.config, &s.solved);
        *out = Box::into_raw(Box::new(SbvpReport { report }));
        Ok(())
    })
}

/// # Safety
/// `rep` must come from [`sbvp_analyze`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sbvp_report_free(rep: *mut SbvpReport) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// The report as JSON; release with [`sbvp_string_free`]. Null on failure.
///
/// # Safety
/// `rep` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbvp_report_json(rep: *const SbvpReport) -> *mut c_char {
    let mut result = ptr::null_mut();
    guard(|| {
        let r = ref_arg(rep)?;
        let json = r.report.to_json().map_err(fail)?;
        result = CString::new(json).map_err(|_| SbvpStatus::Failure)?.into_raw();
        Ok(())
    });
    result
}

/// Looks up a summary metric such as `"map_rms"` or `"area_slope@0"`.
///
/// # Safety
/// `key` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sbvp_report_summary(rep: *const SbvpReport, key: *const c_char, out: *mut f64) -> SbvpStatus {
    guard(|| {
        let r = ref_arg(rep)?;
        let k = str_arg(key)?;
        out_arg(out)?;
        match r.report.summary.get(k) {
            Some(v) => {
                *out = *v;
                Ok(())
            }
            None => {
                set_error(format!("no summary metric {k:?}"));
                Err(SbvpStatus::NotFound)
            }
        }
    })
}

/// Number of stages that failed while building the report.
///
/// # Safety
/// `rep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sbvp_report_failure_count(rep: *const SbvpReport) -> usize {
    rep.as_ref().map_or(0, |r| r.report.failures.len())
}
