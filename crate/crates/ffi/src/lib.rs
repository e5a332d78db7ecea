//! C ABI over the qap-admm solver.
//!
//! Conventions: instances and results are opaque handles created and
//! destroyed by this library; every entry point returns a `QapStatus` and
//! writes outputs through pointers; panics are caught at the boundary and
//! surfaced as `QAP_STATUS_INTERNAL_PANIC`.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use qap_admm::admm::{DataScaling, Polytope, RankMode};
use qap_admm::qap::{parse_qaplib, QapInstance};
use qap_admm::relaxation::BasisVariant;
use qap_admm::report::{run_parsed_detailed, BoundReport, RunConfig};
use qap_admm::Error;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QapStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    DimensionError = 4,
    ConfigError = 5,
    NumericalError = 6,
    Divergence = 7,
    IoError = 8,
    BufferTooSmall = 9,
    InternalPanic = 10,
}

fn status_of(err: &Error) -> QapStatus {
    match err {
        Error::Parse(_) => QapStatus::ParseError,
        Error::Dimension(_) => QapStatus::DimensionError,
        Error::Config(_) => QapStatus::ConfigError,
        Error::Numerical(_) => QapStatus::NumericalError,
        Error::Divergence(_) => QapStatus::Divergence,
        Error::Io(_) => QapStatus::IoError,
    }
}

/// Opaque parsed instance.
pub struct QapInstanceHandle {
    inner: QapInstance,
}

/// Opaque solve outcome.
pub struct QapResultHandle {
    report: BoundReport,
    permutation: Vec<usize>,
}

/// Y-step polyhedron selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QapPolytope {
    GangsterManifold = 1,
    GangsterBox = 2,
}

/// Basis construction selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QapBasis {
    Dense = 0,
    Sparse = 1,
}

/// Plain-struct solver options; obtain defaults from
/// `qap_solve_options_default` and override fields as needed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QapSolveOptions {
    /// Stopping tolerance on the max ADMM residual.
    pub tol: f64,
    pub max_iters: u64,
    /// Penalty parameter; non-positive selects the default n/3.
    pub beta: f64,
    /// Dual step scale in (0, 1.618035].
    pub gamma: f64,
    pub polytope: QapPolytope,
    /// 0 for the full-rank R-step, r > 0 for the rank-r restriction.
    pub rank: u32,
    pub basis: QapBasis,
    /// Wall-clock limit in seconds; non-positive disables.
    pub time_limit_secs: f64,
}

/// Default solver options (tol 1e-5, 50000 iterations, box polytope,
/// full-rank, dense basis).
#[no_mangle]
pub extern "C" fn qap_solve_options_default() -> QapSolveOptions {
    QapSolveOptions {
        tol: 1e-5,
        max_iters: 50_000,
        beta: 0.0,
        gamma: 1.618,
        polytope: QapPolytope::GangsterBox,
        rank: 0,
        basis: QapBasis::Dense,
        time_limit_secs: 0.0,
    }
}

/// Static human-readable description of a status code.
#[no_mangle]
pub extern "C" fn qap_status_message(status: QapStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        QapStatus::Ok => b"ok\0",
        QapStatus::NullArgument => b"a required pointer argument was null\0",
        QapStatus::InvalidUtf8 => b"string argument was not valid UTF-8\0",
        QapStatus::ParseError => b"instance text could not be parsed\0",
        QapStatus::DimensionError => b"dimension mismatch\0",
        QapStatus::ConfigError => b"invalid solver configuration\0",
        QapStatus::NumericalError => b"numerical failure\0",
        QapStatus::Divergence => b"solver diverged\0",
        QapStatus::IoError => b"io error\0",
        QapStatus::BufferTooSmall => b"output buffer too small\0",
        QapStatus::InternalPanic => b"internal panic caught at the boundary\0",
    };
    msg.as_ptr() as *const c_char
}

fn guard<F: FnOnce() -> QapStatus>(f: F) -> QapStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => QapStatus::InternalPanic,
    }
}

/// Parses QAPLIB text (order, then A and B row-major) into an instance.
///
/// # Safety
/// `text` and `name` must be valid NUL-terminated strings; `out` must be a
/// valid pointer. On success `*out` owns the instance and must be released
/// with `qap_instance_free`.
#[no_mangle]
pub unsafe extern "C" fn qap_instance_parse(
    text: *const c_char,
    name: *const c_char,
    out: *mut *mut QapInstanceHandle,
) -> QapStatus {
    guard(|| {
        if text.is_null() || name.is_null() || out.is_null() {
            return QapStatus::NullArgument;
        }
        let text = match unsafe { CStr::from_ptr(text) }.to_str() {
            Ok(s) => s,
            Err(_) => return QapStatus::InvalidUtf8,
        };
        let name = match unsafe { CStr::from_ptr(name) }.to_str() {
            Ok(s) => s,
            Err(_) => return QapStatus::InvalidUtf8,
        };
        match parse_qaplib(text, name) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(QapInstanceHandle { inner })) };
                QapStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Builds an instance from row-major n×n arrays; `c` may be null for zero
/// linear costs.
///
/// # Safety
/// `a` and `b` (and `c` when non-null) must point to n·n doubles; `name`
/// must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qap_instance_from_arrays(
    n: u64,
    a: *const f64,
    b: *const f64,
    c: *const f64,
    name: *const c_char,
    out: *mut *mut QapInstanceHandle,
) -> QapStatus {
    guard(|| {
        if a.is_null() || b.is_null() || name.is_null() || out.is_null() {
            return QapStatus::NullArgument;
        }
        let n = n as usize;
        if n < 2 {
            return QapStatus::DimensionError;
        }
        let name = match unsafe { CStr::from_ptr(name) }.to_str() {
            Ok(s) => s,
            Err(_) => return QapStatus::InvalidUtf8,
        };
        let read = |p: *const f64| -> ndarray::Array2<f64> {
            let slice = unsafe { std::slice::from_raw_parts(p, n * n) };
            ndarray::Array2::from_shape_vec((n, n), slice.to_vec()).expect("length checked")
        };
        let am = read(a);
        let bm = read(b);
        let cm = if c.is_null() {
            ndarray::Array2::zeros((n, n))
        } else {
            read(c)
        };
        match QapInstance::new(name, am, bm, cm) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(QapInstanceHandle { inner })) };
                QapStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Problem order of an instance, or 0 when the handle is null.
///
/// # Safety
/// `inst` must be a handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn qap_instance_order(inst: *const QapInstanceHandle) -> u64 {
    if inst.is_null() {
        return 0;
    }
    unsafe { &*inst }.inner.order() as u64
}

/// Releases an instance handle; null is a no-op.
///
/// # Safety
/// `inst` must be a handle from this library (or null) and not used after.
#[no_mangle]
pub unsafe extern "C" fn qap_instance_free(inst: *mut QapInstanceHandle) {
    if !inst.is_null() {
        drop(unsafe { Box::from_raw(inst) });
    }
}

fn run_config_from(opts: &QapSolveOptions) -> RunConfig {
    RunConfig {
        tol: opts.tol,
        max_iters: opts.max_iters as usize,
        beta: (opts.beta > 0.0).then_some(opts.beta),
        gamma: opts.gamma,
        polytope: match opts.polytope {
            QapPolytope::GangsterManifold => Polytope::GangsterManifold,
            QapPolytope::GangsterBox => Polytope::GangsterBox,
        },
        rank_mode: if opts.rank == 0 {
            RankMode::Full
        } else {
            RankMode::Low(opts.rank as usize)
        },
        basis: match opts.basis {
            QapBasis::Dense => BasisVariant::DenseQr,
            QapBasis::Sparse => BasisVariant::SparseKronecker,
        },
        scaling: DataScaling::NormalizedObjective,
        time_limit: (opts.time_limit_secs > 0.0)
            .then(|| Duration::from_secs_f64(opts.time_limit_secs)),
    }
}

/// Runs the full solve/bound pipeline. `opts` may be null for defaults.
///
/// # Safety
/// `inst` must be a live instance handle; `out` must be valid. On success
/// `*out` owns the result and must be released with `qap_result_free`.
#[no_mangle]
pub unsafe extern "C" fn qap_solve(
    inst: *const QapInstanceHandle,
    opts: *const QapSolveOptions,
    out: *mut *mut QapResultHandle,
) -> QapStatus {
    guard(|| {
        if inst.is_null() || out.is_null() {
            return QapStatus::NullArgument;
        }
        let inst = &unsafe { &*inst }.inner;
        let opts = if opts.is_null() {
            qap_solve_options_default()
        } else {
            unsafe { *opts }
        };
        let config = run_config_from(&opts);
        match run_parsed_detailed(inst, &config, &[]) {
            Ok((report, permutation)) => {
                let handle = QapResultHandle {
                    report,
                    permutation,
                };
                unsafe { *out = Box::into_raw(Box::new(handle)) };
                QapStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Certified real lower bound.
///
/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn qap_result_lower_bound(res: *const QapResultHandle) -> f64 {
    if res.is_null() {
        return f64::NAN;
    }
    unsafe { &*res }.report.lb_real
}

/// Integer-strengthened lower bound (equals the real bound for non-integer
/// data).
///
/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn qap_result_lower_bound_int(res: *const QapResultHandle) -> f64 {
    if res.is_null() {
        return f64::NAN;
    }
    unsafe { &*res }.report.lb_int
}

/// Upper bound from the rounded permutation.
///
/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn qap_result_upper_bound(res: *const QapResultHandle) -> f64 {
    if res.is_null() {
        return f64::NAN;
    }
    unsafe { &*res }.report.ub
}

/// Iterations performed.
///
/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn qap_result_iterations(res: *const QapResultHandle) -> u64 {
    if res.is_null() {
        return 0;
    }
    unsafe { &*res }.report.iters as u64
}

/// Nonzero when the solver reached its tolerance.
///
/// # Safety
/// `res` must be a live result handle.
#[no_mangle]
pub unsafe extern "C" fn qap_result_converged(res: *const QapResultHandle) -> i32 {
    if res.is_null() {
        return 0;
    }
    unsafe { &*res }.report.converged as i32
}

/// Copies the rounded permutation (0-based images) into `buf`.
///
/// # Safety
/// `res` must be a live result handle; `buf` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn qap_result_permutation(
    res: *const QapResultHandle,
    buf: *mut u64,
    len: u64,
) -> QapStatus {
    guard(|| {
        if res.is_null() || buf.is_null() {
            return QapStatus::NullArgument;
        }
        let perm = &unsafe { &*res }.permutation;
        if (len as usize) < perm.len() {
            return QapStatus::BufferTooSmall;
        }
        let out = unsafe { std::slice::from_raw_parts_mut(buf, perm.len()) };
        for (dst, &src) in out.iter_mut().zip(perm.iter()) {
            *dst = src as u64;
        }
        QapStatus::Ok
    })
}

/// Releases a result handle; null is a no-op.
///
/// # Safety
/// `res` must be a handle from this library (or null) and not used after.
#[no_mangle]
pub unsafe extern "C" fn qap_result_free(res: *mut QapResultHandle) {
    if !res.is_null() {
        drop(unsafe { Box::from_raw(res) });
    }
}
