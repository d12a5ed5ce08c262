//! C interface to the safebb solver.
//!
//! Problems and reports are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns an
//! [`SbbError`]; on failure a message is available from [`sbb_last_error`]
//! on the same thread. Out-parameters are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use safebb::expr::{parse_problem, Problem};
use safebb::proof::replay;
use safebb::report::RunReport;
use safebb::solver::{branch_and_bound, SolveReport, SolverConfig, Status, Strategy};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SbbError {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidOptions = 4,
    IndexOutOfRange = 5,
    BufferTooSmall = 6,
    InvalidReport = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SbbStrategy {
    S1 = 1,
    S2 = 2,
    S3 = 3,
    S4 = 4,
    S5 = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SbbStatus {
    Optimal = 0,
    Infeasible = 1,
    BudgetExhausted = 2,
}

/// Solver options; start from [`sbb_options_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SbbOptions {
    /// One of the `SbbStrategy` values.
    pub strategy: u32,
    /// Absolute gap at which the search stops.
    pub eps: f64,
    pub nb_starts: usize,
    pub max_nodes: usize,
    pub max_seconds: f64,
    pub seed: u64,
}

/// Parsed problem.
pub struct SbbProblem {
    problem: Problem,
}

/// Result of one solver run.
pub struct SbbReport {
    report: SolveReport,
    config: SolverConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|&b| b != 0);
    let c = CString::new(bytes).expect("interior nul bytes were removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `f`, turning `Err` and panics into error codes.
fn guard(f: impl FnOnce() -> Result<(), (SbbError, String)>) -> SbbError {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SbbError::Ok,
        Ok(Err((code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            SbbError::Panic
        }
    }
}

fn null(what: &str) -> (SbbError, String) {
    (SbbError::NullArgument, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (SbbError, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (SbbError, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SbbError, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| (SbbError::InvalidUtf8, format!("{what}: {e}")))
}

fn strategy(s: u32) -> Result<Strategy, (SbbError, String)> {
    Ok(match s {
        x if x == SbbStrategy::S1 as u32 => Strategy::S1,
        x if x == SbbStrategy::S2 as u32 => Strategy::S2,
        x if x == SbbStrategy::S3 as u32 => Strategy::S3,
        x if x == SbbStrategy::S4 as u32 => Strategy::S4,
        x if x == SbbStrategy::S5 as u32 => Strategy::S5,
        _ => return Err((SbbError::InvalidOptions, format!("unknown strategy {s}"))),
    })
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON text has no nul bytes").into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sbb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a problem in the text format read by `safebb solve`.
///
/// # Safety
/// `source` must be a nul-terminated string; `out_problem` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sbb_problem_parse(source: *const c_char, out_problem: *mut *mut SbbProblem) -> SbbError {
    guard(|| {
        let slot = out(out_problem, "out_problem")?;
        let src = text(source, "source")?;
        let problem = parse_problem(src).map_err(|e| (SbbError::Parse, e.to_string()))?;
        *slot = Box::into_raw(Box::new(SbbProblem { problem }));
        Ok(())
    })
}

/// Releases a problem. Null is accepted.
///
/// # Safety
/// `problem` must come from [`sbb_problem_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sbb_problem_free(problem: *mut SbbProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of variables of a problem.
///
/// # Safety
/// `problem` must be a live handle; `out_n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sbb_problem_num_vars(problem: *const SbbProblem, out_n: *mut usize) -> SbbError {
    guard(|| {
        let p = deref(problem, "problem")?;
        *out(out_n, "out_n")? = p.problem.n();
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn sbb_options_default() -> SbbOptions {
    let c = SolverConfig::default();
    SbbOptions {
        strategy: SbbStrategy::S3 as u32,
        eps: c.eps,
        nb_starts: c.nb_starts,
        max_nodes: c.max_nodes,
        max_seconds: c.max_seconds,
        seed: c.seed,
    }
}

/// Runs the branch and bound. A null `options` means the defaults.
///
/// # Safety
/// `problem` must be a live handle, `options` null or readable, `out_report`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sbb_solve(
    problem: *const SbbProblem,
    options: *const SbbOptions,
    out_report: *mut *mut SbbReport,
) -> SbbError {
    guard(|| {
        let p = deref(problem, "problem")?;
        let slot = out(out_report, "out_report")?;
        let o = options.as_ref().copied().unwrap_or_else(|| sbb_options_default());
        let config = SolverConfig {
            eps: o.eps,
            nb_starts: o.nb_starts,
            max_nodes: o.max_nodes,
            max_seconds: o.max_seconds,
            seed: o.seed,
            ..SolverConfig::default()
        };
        let strategy = strategy(o.strategy)?;
        config.validate().map_err(|e| (SbbError::InvalidOptions, e.to_string()))?;
        let report = branch_and_bound(&p.problem, strategy, &config);
        *slot = Box::into_raw(Box::new(SbbReport { report, config }));
        Ok(())
    })
}

/// Releases a report. Null is accepted.
///
/// # Safety
/// `report` must come from [`sbb_solve`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sbb_report_free(report: *mut SbbReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle; `out_status` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sbb_report_status(report: *const SbbReport, out_status: *mut SbbStatus) -> SbbError {
    guard(|| {
        let r = &deref(report, "report")?.report;
        *out(out_status, "out_status")? = match r.status {
            Status::Optimal => SbbStatus::Optimal,
            Status::Infeasible => SbbStatus::Infeasible,
            Status::BudgetExhausted => SbbStatus::BudgetExhausted,
        };
        Ok(())
    })
}

/// Final bounds `L` and `U`. Infeasible problems give `L = +inf`, `U = -inf`.
/// `out_unsafe` is set when `U` is not backed by a proof (strategy S1).
///
/// # Safety
/// `report` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sbb_report_bounds(
    report: *const SbbReport,
    out_lower: *mut f64,
    out_upper: *mut f64,
    out_unsafe: *mut bool,
) -> SbbError {
    guard(|| {
        let r = &deref(report, "report")?.report;
        let (l, u, s) = (out(out_lower, "out_lower")?, out(out_upper, "out_upper")?, out(out_unsafe, "out_unsafe")?);
        *l = r.lower;
        *u = r.upper;
        *s = r.unsafe_run;
        Ok(())
    })
}

/// Nodes processed, existence tests run and existence tests that succeeded.
///
/// # Safety
/// `report` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sbb_report_counts(
    report: *const SbbReport,
    out_nodes: *mut usize,
    out_attempts: *mut usize,
    out_successes: *mut usize,
) -> SbbError {
    guard(|| {
        let r = &deref(report, "report")?.report;
        let (n, a, s) = (out(out_nodes, "out_nodes")?, out(out_attempts, "out_attempts")?, out(out_successes, "out_successes")?);
        *n = r.nodes;
        *a = r.proof_attempts;
        *s = r.proof_successes;
        Ok(())
    })
}

/// Copies proven box `index` into `lo[0..len]` and `hi[0..len]`. `len` must
/// be at least the number of variables.
///
/// # Safety
/// `report` must be a live handle; `lo` and `hi` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sbb_report_proven_box(
    report: *const SbbReport,
    index: usize,
    lo: *mut f64,
    hi: *mut f64,
    len: usize,
) -> SbbError {
    guard(|| {
        let r = &deref(report, "report")?.report;
        let pb = r.proven.get(index).ok_or_else(|| {
            (SbbError::IndexOutOfRange, format!("index {index} but only {} proven boxes", r.proven.len()))
        })?;
        if lo.is_null() || hi.is_null() {
            return Err(null("lo or hi"));
        }
        let n = pb.bx.len();
        if len < n {
            return Err((SbbError::BufferTooSmall, format!("box has {n} components, buffer holds {len}")));
        }
        let (lo, hi) = (std::slice::from_raw_parts_mut(lo, n), std::slice::from_raw_parts_mut(hi, n));
        for (i, c) in pb.bx.iter().enumerate() {
            lo[i] = c.lo();
            hi[i] = c.hi();
        }
        Ok(())
    })
}

/// Serializes the run report (the layout written by `safebb solve --out`).
/// The string must be released with [`sbb_string_free`].
///
/// # Safety
/// `report` must be a live handle, `name` null or a nul-terminated string,
/// `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn sbb_report_to_json(
    report: *const SbbReport,
    name: *const c_char,
    out_json: *mut *mut c_char,
) -> SbbError {
    guard(|| {
        let r = deref(report, "report")?;
        let slot = out(out_json, "out_json")?;
        let name = if name.is_null() { "" } else { text(name, "name")? };
        *slot = into_c_string(RunReport::new(name, &r.report, &r.config).to_json());
        Ok(())
    })
}

/// Reruns the existence test of every certificate in a JSON run report and
/// stores how many fail.
///
/// # Safety
/// `problem` must be a live handle, `json` a nul-terminated string,
/// `out_failed` writable.
#[no_mangle]
pub unsafe extern "C" fn sbb_replay_json(
    problem: *const SbbProblem,
    json: *const c_char,
    out_failed: *mut usize,
) -> SbbError {
    guard(|| {
        let p = deref(problem, "problem")?;
        let slot = out(out_failed, "out_failed")?;
        let rep = RunReport::from_json(text(json, "json")?).map_err(|e| (SbbError::InvalidReport, e.to_string()))?;
        *slot = rep.proven.iter().filter(|pb| replay(&p.problem, &pb.certificate).is_err()).count();
        Ok(())
    })
}

/// Releases a string returned by this library. Null is accepted.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sbb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
