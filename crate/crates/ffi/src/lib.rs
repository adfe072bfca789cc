//! C interface to the quadavg solvers.
//!
//! Problems and traces are opaque handles created by `qa_problem_new` and
//! `qa_solve` and released with the matching `*_free`. Every fallible call
//! returns a [`QaStatus`]; on failure `qa_last_error` describes the cause.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use quadavg::harness::{build_problem, execute, write_csv_trace, HarnessError, Problem, ProblemSpec, SolverKind};
use quadavg::solvers::{SolverConfig, SolverOutput, StopReason};

/// Result of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// A data file could not be read.
    NoInput = 3,
    /// The solver stopped on an error; a partial trace may still be returned.
    SolverFailed = 4,
    /// Writing an output file failed.
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QaStopReason {
    /// The run has not stopped normally (solver error).
    None = 0,
    GradientZero = 1,
    GapTolerance = 2,
    MaxIterations = 3,
}

/// Solver settings; start from `qa_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QaConfig {
    pub max_iterations: u64,
    pub gap_tolerance: f64,
    pub line_search_tol: f64,
    pub memory: u64,
    /// Record wall-clock seconds in each record.
    pub timing: bool,
}

/// One iteration of a trace.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QaRecord {
    pub k: u64,
    pub f_plus: f64,
    /// Lower bound (or estimate-sequence value for the accelerated solvers).
    pub v: f64,
    pub gap: f64,
    pub g_classical: f64,
    pub grad_norm: f64,
    pub elapsed_s: f64,
}

/// Opaque problem handle.
pub struct QaProblem {
    inner: Problem,
}

/// Opaque handle to a finished (or failed) run.
pub struct QaTrace {
    records: Vec<QaRecord>,
    inner: quadavg::solvers::SolverTrace,
    final_iterate: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: QaStatus, msg: impl Into<String>) -> QaStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> QaStatus) -> QaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == QaStatus::Ok {
                set_error("");
            }
            s
        }
        Err(_) => fail(QaStatus::Panic, "internal panic"),
    }
}

fn harness_status(e: &HarnessError) -> QaStatus {
    match e {
        HarnessError::Usage(_) => QaStatus::InvalidArgument,
        HarnessError::Input { .. } => QaStatus::NoInput,
        HarnessError::Output { .. } => QaStatus::Io,
        HarnessError::Solver(_) => QaStatus::SolverFailed,
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, QaStatus> {
    if s.is_null() {
        return Err(fail(QaStatus::NullPointer, "string argument is null"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(QaStatus::InvalidArgument, "string argument is not UTF-8"))
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qa_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn qa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn qa_config_default() -> QaConfig {
    let d = SolverConfig::default();
    QaConfig {
        max_iterations: d.max_iterations as u64,
        gap_tolerance: d.gap_tolerance,
        line_search_tol: d.line_search_tol,
        memory: d.memory as u64,
        timing: d.timing,
    }
}

/// Builds a problem from a spec such as `worst:b=100,n=50`,
/// `quadratic:n=20,alpha=1,beta=100` or `logistic:path=FILE,alpha=1e-4`.
/// `l1 > 0` adds `l1 * ||x||_1` (usable with `prox-geo-sub` only).
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qa_problem_new(spec: *const c_char, seed: u64, l1: f64, out: *mut *mut QaProblem) -> QaStatus {
    guard(|| {
        if out.is_null() {
            return fail(QaStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let text = match read_str(spec) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let parsed: ProblemSpec = match text.parse() {
            Ok(p) => p,
            Err(e) => return fail(QaStatus::InvalidArgument, e.to_string()),
        };
        if !(l1 >= 0.0 && l1.is_finite()) {
            return fail(
                QaStatus::InvalidArgument,
                format!("l1 weight must be nonnegative, got {l1}"),
            );
        }
        match build_problem(&parsed, seed, (l1 > 0.0).then_some(l1)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(QaProblem { inner }));
                QaStatus::Ok
            }
            Err(e) => fail(harness_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `p` must come from `qa_problem_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qa_problem_free(p: *mut QaProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Dimension of the problem, 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qa_problem_dimension(p: *const QaProblem) -> usize {
    p.as_ref().map_or(0, |p| p.inner.smooth.dimension())
}

/// Strong convexity and smoothness constants of the smooth part.
///
/// # Safety
/// `p` must be a live handle; `alpha` and `beta` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn qa_problem_constants(p: *const QaProblem, alpha: *mut f64, beta: *mut f64) -> QaStatus {
    guard(|| {
        let (Some(p), false, false) = (p.as_ref(), alpha.is_null(), beta.is_null()) else {
            return fail(QaStatus::NullPointer, "null argument");
        };
        *alpha = p.inner.smooth.alpha();
        *beta = p.inner.smooth.beta();
        QaStatus::Ok
    })
}

/// Value of the smooth part at `x`; the gradient is written to `grad` when
/// it is not null. Both arrays have length `n`.
///
/// # Safety
/// `x` must point to `n` doubles, `grad` to `n` writable doubles or be null.
#[no_mangle]
pub unsafe extern "C" fn qa_problem_eval(
    p: *const QaProblem,
    x: *const f64,
    n: usize,
    value: *mut f64,
    grad: *mut f64,
) -> QaStatus {
    guard(|| {
        let (Some(p), false, false) = (p.as_ref(), x.is_null(), value.is_null()) else {
            return fail(QaStatus::NullPointer, "null argument");
        };
        let f = &p.inner.smooth;
        if n != f.dimension() {
            return fail(
                QaStatus::InvalidArgument,
                format!("x has length {n}, problem has dimension {}", f.dimension()),
            );
        }
        let x = std::slice::from_raw_parts(x, n);
        if grad.is_null() {
            *value = f.value(x);
        } else {
            let (v, g) = f.value_and_gradient(x);
            *value = v;
            std::slice::from_raw_parts_mut(grad, n).copy_from_slice(&g);
        }
        QaStatus::Ok
    })
}

fn to_records(out: &quadavg::solvers::SolverTrace) -> Vec<QaRecord> {
    out.records
        .iter()
        .map(|r| QaRecord {
            k: r.k as u64,
            f_plus: r.f_plus,
            v: r.v,
            gap: r.gap,
            g_classical: r.g_classical,
            grad_norm: r.grad_norm,
            elapsed_s: r.elapsed,
        })
        .collect()
}

fn trace_handle(inner: quadavg::solvers::SolverTrace, final_iterate: Vec<f64>) -> *mut QaTrace {
    Box::into_raw(Box::new(QaTrace {
        records: to_records(&inner),
        inner,
        final_iterate,
    }))
}

/// Runs `solver` (`oqa`, `oqa-mem`, `geo`, `geo-sub`, `nesterov`,
/// `nesterov-ls`, `gd`, `prox-geo-sub`) from `x0`, or from the origin when
/// `x0` is null. A null `cfg` means the defaults.
///
/// On `QA_STATUS_SOLVER_FAILED` `*out` still receives the records produced
/// before the error and must be freed.
///
/// # Safety
/// Pointers must be valid; `x0` must point to `n` doubles when not null.
#[no_mangle]
pub unsafe extern "C" fn qa_solve(
    p: *const QaProblem,
    solver: *const c_char,
    cfg: *const QaConfig,
    x0: *const f64,
    n: usize,
    out: *mut *mut QaTrace,
) -> QaStatus {
    guard(|| {
        if out.is_null() {
            return fail(QaStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let Some(p) = p.as_ref() else {
            return fail(QaStatus::NullPointer, "problem is null");
        };
        let kind: SolverKind = match read_str(solver).map(str::parse) {
            Ok(Ok(k)) => k,
            Ok(Err(e)) => return fail(QaStatus::InvalidArgument, e.to_string()),
            Err(s) => return s,
        };
        let c = cfg.as_ref().copied().unwrap_or_else(|| qa_config_default());
        let config = SolverConfig {
            max_iterations: c.max_iterations as usize,
            gap_tolerance: c.gap_tolerance,
            line_search_tol: c.line_search_tol,
            memory: c.memory as usize,
            timing: c.timing,
            ..SolverConfig::default()
        };
        if let Err(e) = config.validate() {
            return fail(QaStatus::InvalidArgument, e.to_string());
        }
        let dim = p.inner.smooth.dimension();
        let start = if x0.is_null() {
            vec![0.0; dim]
        } else {
            if n != dim {
                return fail(
                    QaStatus::InvalidArgument,
                    format!("x0 has length {n}, problem has dimension {dim}"),
                );
            }
            std::slice::from_raw_parts(x0, n).to_vec()
        };
        match execute(kind, &p.inner, &start, &config) {
            Err(e) => fail(harness_status(&e), e.to_string()),
            Ok(Ok(SolverOutput {
                trace, final_iterate, ..
            })) => {
                *out = trace_handle(trace, final_iterate);
                QaStatus::Ok
            }
            Ok(Err(failure)) => {
                let msg = failure.to_string();
                *out = trace_handle(failure.partial, Vec::new());
                fail(QaStatus::SolverFailed, msg)
            }
        }
    })
}

/// # Safety
/// `t` must come from `qa_solve` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qa_trace_free(t: *mut QaTrace) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of records (iterations plus one), 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qa_trace_len(t: *const QaTrace) -> usize {
    t.as_ref().map_or(0, |t| t.records.len())
}

/// # Safety
/// `t` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qa_trace_record(t: *const QaTrace, index: usize, out: *mut QaRecord) -> QaStatus {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null()) else {
            return fail(QaStatus::NullPointer, "null argument");
        };
        match t.records.get(index) {
            Some(r) => {
                *out = *r;
                QaStatus::Ok
            }
            None => fail(
                QaStatus::InvalidArgument,
                format!("record {index} out of range ({} records)", t.records.len()),
            ),
        }
    })
}

/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qa_trace_stop_reason(t: *const QaTrace) -> QaStopReason {
    match t.as_ref().and_then(|t| t.inner.stop_reason) {
        None => QaStopReason::None,
        Some(StopReason::GradientZero) => QaStopReason::GradientZero,
        Some(StopReason::GapTolerance) => QaStopReason::GapTolerance,
        Some(StopReason::MaxIterations) => QaStopReason::MaxIterations,
    }
}

/// Copies the best point found into `out` (length `n`, the problem
/// dimension). Unavailable after a solver failure.
///
/// # Safety
/// `out` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qa_trace_final_iterate(t: *const QaTrace, out: *mut f64, n: usize) -> QaStatus {
    guard(|| {
        let (Some(t), false) = (t.as_ref(), out.is_null()) else {
            return fail(QaStatus::NullPointer, "null argument");
        };
        if t.final_iterate.is_empty() {
            return fail(QaStatus::InvalidArgument, "run failed; no final iterate");
        }
        if n != t.final_iterate.len() {
            return fail(
                QaStatus::InvalidArgument,
                format!("buffer has length {n}, iterate has {}", t.final_iterate.len()),
            );
        }
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&t.final_iterate);
        QaStatus::Ok
    })
}

/// Writes the trace as CSV.
///
/// # Safety
/// `t` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn qa_trace_write_csv(t: *const QaTrace, path: *const c_char) -> QaStatus {
    guard(|| {
        let Some(t) = t.as_ref() else {
            return fail(QaStatus::NullPointer, "trace is null");
        };
        let path = match read_str(path) {
            Ok(p) => Path::new(p),
            Err(s) => return s,
        };
        let written = std::fs::File::create(path).and_then(|f| {
            let mut w = std::io::BufWriter::new(f);
            write_csv_trace(&t.inner, &mut w)?;
            std::io::Write::flush(&mut w)
        });
        match written {
            Ok(()) => QaStatus::Ok,
            Err(e) => fail(QaStatus::Io, format!("{}: {e}", path.display())),
        }
    })
}
