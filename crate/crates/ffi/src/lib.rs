//! C interface to the divplan planner.
//!
//! Handles are opaque pointers created by `divplan_task_load` and
//! `divplan_solve` and released with the matching `*_free` function. Every
//! entry point returns a [`DivplanStatus`]; on failure the message is
//! available from [`divplan_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::time::Duration;

use divplan::pddl::CostBoundSource;
use divplan::rational::Rational;
use divplan::report::{load_task, run_solve, DiversityReport, ErrorKind, ReportStatus, RunConfig};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivplanStatus {
    /// `k` plans found, or the task loaded.
    Ok = 0,
    /// Fewer than `k` plans exist within the cost bound.
    Exhausted = 1,
    /// The solver ran out of time or memory.
    Budget = 2,
    /// Unreadable, malformed or unsupported input.
    InputError = 3,
    /// Solver failure or other internal error.
    InternalError = 4,
    /// A required pointer argument was null.
    NullArgument = 5,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// A loaded planning task.
pub struct DivplanTask {
    config: RunConfig,
}

/// Result of one solve.
pub struct DivplanReport {
    report: DiversityReport,
}

/// Solve options. Zero fields take the defaults noted below.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DivplanSolveOptions {
    /// Number of plans; 0 = the feature file's `k`, else until exhausted.
    pub k: usize,
    /// Wall-clock budget in milliseconds; 0 = none.
    pub timeout_ms: u64,
    /// Solver memory limit in MB; 0 = none.
    pub memory_mb: u64,
    /// Quality multiplier `q = num / den`; `den = 0` = from the feature file.
    pub quality_num: i64,
    pub quality_den: i64,
    /// Explicit cost bound; 0 = derive from `q`.
    pub cost_bound: u32,
    /// Run the plan-forbidding baseline instead.
    pub naive: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> DivplanStatus) -> DivplanStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            DivplanStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, DivplanStatus> {
    if p.is_null() {
        set_error(format!("{what} is null"));
        return Err(DivplanStatus::NullArgument);
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error(format!("{what} is not valid UTF-8"));
            Err(DivplanStatus::InvalidUtf8)
        }
    }
}

/// Parse and ground a task. `features` may be null.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be a valid
/// pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn divplan_task_load(
    domain: *const c_char,
    problem: *const c_char,
    features: *const c_char,
    out: *mut *mut DivplanTask,
) -> DivplanStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return DivplanStatus::NullArgument;
        }
        *out = ptr::null_mut();
        let domain = match path_arg(domain, "domain") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let problem = match path_arg(problem, "problem") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let features = if features.is_null() {
            None
        } else {
            match path_arg(features, "features") {
                Ok(p) => Some(p),
                Err(s) => return s,
            }
        };
        if let Err(e) = load_task(&domain, &problem, features.as_deref()) {
            set_error(e.0);
            return DivplanStatus::InputError;
        }
        let mut config = RunConfig::new(domain, problem);
        config.features = features;
        *out = Box::into_raw(Box::new(DivplanTask { config }));
        DivplanStatus::Ok
    })
}

/// Release a task; null is ignored.
///
/// # Safety
/// `task` must be null or a pointer from `divplan_task_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn divplan_task_free(task: *mut DivplanTask) {
    if !task.is_null() {
        drop(Box::from_raw(task));
    }
}

/// Generate a diverse plan set. `opts` may be null for defaults. A report
/// is stored in `out` whenever the status is `Ok`, `Exhausted` or `Budget`.
///
/// # Safety
/// `task` must come from `divplan_task_load`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn divplan_solve(
    task: *const DivplanTask,
    opts: *const DivplanSolveOptions,
    out: *mut *mut DivplanReport,
) -> DivplanStatus {
    guard(|| {
        if task.is_null() || out.is_null() {
            set_error("task or out is null");
            return DivplanStatus::NullArgument;
        }
        *out = ptr::null_mut();
        let o = if opts.is_null() { DivplanSolveOptions::default() } else { *opts };
        let mut cfg = (*task).config.clone();
        cfg.k = (o.k > 0).then_some(o.k);
        cfg.timeout = (o.timeout_ms > 0).then(|| Duration::from_millis(o.timeout_ms));
        cfg.memory_mb = (o.memory_mb > 0).then_some(o.memory_mb);
        cfg.naive = o.naive;
        if o.cost_bound > 0 {
            cfg.bound = Some(CostBoundSource::Explicit(o.cost_bound));
        } else if o.quality_den != 0 {
            if o.quality_num < 0 || o.quality_den < 0 {
                set_error("quality must be non-negative");
                return DivplanStatus::InputError;
            }
            cfg.bound = Some(CostBoundSource::Quality(Rational::new(o.quality_num, o.quality_den)));
        }
        let report = run_solve(&cfg);
        let status = match (report.status, report.error.as_ref().map(|e| e.kind)) {
            (ReportStatus::Solved, _) => DivplanStatus::Ok,
            (ReportStatus::Exhausted, _) => DivplanStatus::Exhausted,
            (ReportStatus::Budget, _) => DivplanStatus::Budget,
            (ReportStatus::Error, Some(ErrorKind::Input)) => DivplanStatus::InputError,
            (ReportStatus::Error, _) => DivplanStatus::InternalError,
        };
        if let Some(e) = &report.error {
            set_error(e.message.clone());
            return status;
        }
        if let Some(r) = &report.budget_reason {
            set_error(r.clone());
        }
        *out = Box::into_raw(Box::new(DivplanReport { report }));
        status
    })
}

/// The report as a JSON document; free with `divplan_string_free`.
/// Returns null if `report` is null.
///
/// # Safety
/// `report` must be null or a live pointer from `divplan_solve`.
#[no_mangle]
pub unsafe extern "C" fn divplan_report_json(report: *const DivplanReport) -> *mut c_char {
    if report.is_null() {
        return ptr::null_mut();
    }
    let json = (*report).report.to_json().replace('\0', " ");
    CString::new(json).map_or(ptr::null_mut(), CString::into_raw)
}

/// Number of distinct behaviours among the reported plans.
///
/// # Safety
/// `report` must be null or a live pointer from `divplan_solve`.
#[no_mangle]
pub unsafe extern "C" fn divplan_report_behaviour_count(report: *const DivplanReport) -> usize {
    if report.is_null() {
        return 0;
    }
    (*report).report.behaviour_count
}

/// Number of reported plans.
///
/// # Safety
/// `report` must be null or a live pointer from `divplan_solve`.
#[no_mangle]
pub unsafe extern "C" fn divplan_report_plan_count(report: *const DivplanReport) -> usize {
    if report.is_null() {
        return 0;
    }
    (*report).report.plans.len()
}

/// Release a report; null is ignored.
///
/// # Safety
/// `report` must be null or a pointer from `divplan_solve` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn divplan_report_free(report: *mut DivplanReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Release a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must be null or a string from `divplan_report_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn divplan_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn divplan_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}
