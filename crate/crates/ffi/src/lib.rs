//! C ABI over `subreg`.
//!
//! Handles are opaque and owned by the caller once returned; each has a
//! matching `_free`. Every fallible call returns a [`SubregStatus`] and, on
//! failure, records a message readable through [`subreg_last_error`] on the
//! same thread. Strings returned by the library are freed with
//! [`subreg_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};

use subreg::cli::{self, Report, RunOptions};
use subreg::expr::{parse_problem, ProblemSpec};
use subreg::mappings::SingleMap;
use subreg::moduli::{certify_sms, DEFAULT_TAU};
use subreg::rates::SamplingSchedule;
use subreg::Error;

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubregStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Evaluation = 4,
    UnknownExample = 5,
    Panic = 6,
}

/// Verdict of a certificate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubregVerdict {
    Certified = 0,
    Refuted = 1,
    Inconclusive = 2,
}

/// A parsed problem document.
pub struct SubregProblem {
    text: String,
    spec: ProblemSpec,
}

/// The report of a run.
pub struct SubregReport {
    report: Report,
}

/// Run settings. `has_seed == false` keeps the document seed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SubregRunOptions {
    pub has_seed: bool,
    pub seed: u64,
    pub skip_eval_errors: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("nul bytes were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SubregStatus {
    if matches!(e, Error::UnknownExample(_)) {
        SubregStatus::UnknownExample
    } else if e.is_evaluation() {
        SubregStatus::Evaluation
    } else {
        SubregStatus::Parse
    }
}

fn fail(status: SubregStatus, msg: impl Into<String>) -> SubregStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), SubregStatus>) -> SubregStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SubregStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(SubregStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: subreg::Result<T>) -> Result<T, SubregStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, SubregStatus> {
    if p.is_null() {
        return Err(fail(SubregStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SubregStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn null_out<T>(out: *mut T, what: &str) -> Result<(), SubregStatus> {
    if out.is_null() {
        Err(fail(SubregStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn options(opts: *const SubregRunOptions) -> RunOptions {
    // SAFETY: callers pass null or a valid pointer.
    match unsafe { opts.as_ref() } {
        None => RunOptions::default(),
        Some(o) => RunOptions {
            seed: o.has_seed.then_some(o.seed),
            skip_eval_errors: o.skip_eval_errors,
            ..RunOptions::default()
        },
    }
}

fn boxed_report(r: Report, out: *mut *mut SubregReport) {
    // SAFETY: `out` was checked non-null by the caller.
    unsafe { *out = Box::into_raw(Box::new(SubregReport { report: r })) };
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn subreg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a problem document.
///
/// # Safety
/// `text` is a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn subreg_problem_parse(text: *const c_char, out: *mut *mut SubregProblem) -> SubregStatus {
    guard(|| {
        null_out(out, "out")?;
        let text = read_str(text, "text")?.to_string();
        let spec = lift(parse_problem(&text))?;
        *out = Box::into_raw(Box::new(SubregProblem { text, spec }));
        Ok(())
    })
}

/// Number of tasks in a parsed problem; 0 for null.
///
/// # Safety
/// `p` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn subreg_problem_task_count(p: *const SubregProblem) -> size_t {
    p.as_ref().map_or(0, |p| p.spec.tasks.len())
}

/// Runs every task of a problem. `opts` may be null for defaults.
///
/// # Safety
/// `p` is a live handle, `opts` null or valid, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn subreg_problem_run(
    p: *const SubregProblem,
    opts: *const SubregRunOptions,
    out: *mut *mut SubregReport,
) -> SubregStatus {
    guard(|| {
        null_out(out, "out")?;
        let p = p.as_ref().ok_or_else(|| fail(SubregStatus::NullArgument, "problem is null"))?;
        let r = lift(cli::run_document(&p.text, &options(opts)))?;
        boxed_report(r, out);
        Ok(())
    })
}

/// # Safety
/// `p` is null or a handle from [`subreg_problem_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn subreg_problem_free(p: *mut SubregProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Runs a catalog example by id.
///
/// # Safety
/// `id` is a NUL-terminated string, `opts` null or valid, `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn subreg_reproduce(
    id: *const c_char,
    opts: *const SubregRunOptions,
    out: *mut *mut SubregReport,
) -> SubregStatus {
    guard(|| {
        null_out(out, "out")?;
        let id = read_str(id, "id")?;
        let r = lift(cli::reproduce(id, &options(opts)))?;
        boxed_report(r, out);
        Ok(())
    })
}

/// The process exit code the command line would return for this report;
/// -1 for null.
///
/// # Safety
/// `r` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn subreg_report_exit_code(r: *const SubregReport) -> i32 {
    r.as_ref().map_or(-1, |r| r.report.exit_code)
}

/// The report as JSON, without timings when `canonical`. Null on a null
/// handle. Free with [`subreg_string_free`].
///
/// # Safety
/// `r` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn subreg_report_json(r: *const SubregReport, canonical: bool) -> *mut c_char {
    let Some(r) = r.as_ref() else {
        set_error("report is null");
        return ptr::null_mut();
    };
    let json = if canonical {
        r.report.canonical_json()
    } else {
        r.report.to_json()
    };
    CString::new(json).map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `r` is null or a handle returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn subreg_report_free(r: *mut SubregReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `s` is null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn subreg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Certifies strong metric subregularity of a single-valued expression at
/// `(xbar, ybar)` with the default schedule and threshold, writing the
/// modulus estimate and verdict.
///
/// # Safety
/// `expr` is a NUL-terminated string; `xbar` and `ybar` point to `n` and
/// `m` doubles; `modulus` and `verdict` are valid pointers.
#[no_mangle]
pub unsafe extern "C" fn subreg_certify_sms_expr(
    expr: *const c_char,
    xbar: *const f64,
    n: size_t,
    ybar: *const f64,
    m: size_t,
    modulus: *mut f64,
    verdict: *mut SubregVerdict,
) -> SubregStatus {
    guard(|| {
        null_out(modulus, "modulus")?;
        null_out(verdict, "verdict")?;
        if xbar.is_null() || ybar.is_null() {
            return Err(fail(SubregStatus::NullArgument, "anchor is null"));
        }
        let f = lift(SingleMap::parse(read_str(expr, "expr")?))?;
        let x = std::slice::from_raw_parts(xbar, n);
        let y = std::slice::from_raw_parts(ybar, m);
        let c = lift(certify_sms(&f, x, y, &SamplingSchedule::default(), DEFAULT_TAU))?;
        *modulus = c.modulus;
        *verdict = if c.is_certified() {
            SubregVerdict::Certified
        } else if c.witnesses.is_empty() {
            SubregVerdict::Inconclusive
        } else {
            SubregVerdict::Refuted
        };
        Ok(())
    })
}
