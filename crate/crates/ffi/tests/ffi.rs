//! Exercises the C ABI through the extern "C" entry points.

use std::ffi::{CStr, CString};
use std::ptr;

use qap_admm_ffi::*;

fn solve_small(opts: *const QapSolveOptions) -> (*mut QapResultHandle, u64) {
    let a = [0.0, 3.0, 1.0, 2.0, 3.0, 0.0, 4.0, 1.0, 1.0, 4.0, 0.0, 2.0, 2.0, 1.0, 2.0, 0.0];
    let b = [0.0, 1.0, 2.0, 3.0, 1.0, 0.0, 1.0, 2.0, 2.0, 1.0, 0.0, 1.0, 3.0, 2.0, 1.0, 0.0];
    let name = CString::new("ffi4").unwrap();
    let mut inst: *mut QapInstanceHandle = ptr::null_mut();
    let status = unsafe {
        qap_instance_from_arrays(4, a.as_ptr(), b.as_ptr(), ptr::null(), name.as_ptr(), &mut inst)
    };
    assert_eq!(status, QapStatus::Ok);
    let n = unsafe { qap_instance_order(inst) };
    assert_eq!(n, 4);

    let mut res: *mut QapResultHandle = ptr::null_mut();
    let status = unsafe { qap_solve(inst, opts, &mut res) };
    assert_eq!(status, QapStatus::Ok);
    unsafe { qap_instance_free(inst) };
    (res, n)
}

#[test]
fn solve_from_arrays_produces_consistent_bounds() {
    let (res, n) = solve_small(ptr::null());
    let lb = unsafe { qap_result_lower_bound(res) };
    let lb_int = unsafe { qap_result_lower_bound_int(res) };
    let ub = unsafe { qap_result_upper_bound(res) };
    assert!(lb.is_finite() && ub.is_finite());
    assert!(lb <= ub + 1e-9);
    assert!(lb_int <= ub);
    assert!(unsafe { qap_result_iterations(res) } > 0);
    assert_eq!(unsafe { qap_result_converged(res) }, 1);

    let mut perm = [u64::MAX; 4];
    let status = unsafe { qap_result_permutation(res, perm.as_mut_ptr(), n) };
    assert_eq!(status, QapStatus::Ok);
    let mut seen = [false; 4];
    for &p in &perm {
        assert!((p as usize) < 4);
        seen[p as usize] = true;
    }
    assert!(seen.iter().all(|&s| s));

    let mut short = [0u64; 2];
    let status = unsafe { qap_result_permutation(res, short.as_mut_ptr(), 2) };
    assert_eq!(status, QapStatus::BufferTooSmall);
    unsafe { qap_result_free(res) };
}

#[test]
fn custom_options_are_honored() {
    let mut opts = qap_solve_options_default();
    opts.max_iters = 3;
    opts.tol = 1e-300;
    let (res, _) = solve_small(&opts);
    assert_eq!(unsafe { qap_result_iterations(res) }, 3);
    assert_eq!(unsafe { qap_result_converged(res) }, 0);
    unsafe { qap_result_free(res) };

    let mut bad = qap_solve_options_default();
    bad.gamma = 99.0;
    let a = [0.0, 1.0, 1.0, 0.0];
    let name = CString::new("ffi2").unwrap();
    let mut inst: *mut QapInstanceHandle = ptr::null_mut();
    let status = unsafe {
        qap_instance_from_arrays(2, a.as_ptr(), a.as_ptr(), ptr::null(), name.as_ptr(), &mut inst)
    };
    assert_eq!(status, QapStatus::Ok);
    let mut res: *mut QapResultHandle = ptr::null_mut();
    let status = unsafe { qap_solve(inst, &bad, &mut res) };
    assert_eq!(status, QapStatus::ConfigError);
    unsafe { qap_instance_free(inst) };
}

#[test]
fn parse_entry_point_and_error_paths() {
    let text = CString::new("3\n0 1 2\n1 0 1\n2 1 0\n0 2 1\n2 0 2\n1 2 0\n").unwrap();
    let name = CString::new("tiny3").unwrap();
    let mut inst: *mut QapInstanceHandle = ptr::null_mut();
    let status = unsafe { qap_instance_parse(text.as_ptr(), name.as_ptr(), &mut inst) };
    assert_eq!(status, QapStatus::Ok);
    assert_eq!(unsafe { qap_instance_order(inst) }, 3);
    unsafe { qap_instance_free(inst) };

    let truncated = CString::new("3\n0 1 2\n1 0").unwrap();
    let mut bad: *mut QapInstanceHandle = ptr::null_mut();
    let status = unsafe { qap_instance_parse(truncated.as_ptr(), name.as_ptr(), &mut bad) };
    assert_eq!(status, QapStatus::ParseError);
    assert!(bad.is_null());

    let status = unsafe { qap_instance_parse(ptr::null(), name.as_ptr(), &mut bad) };
    assert_eq!(status, QapStatus::NullArgument);
}

#[test]
fn status_messages_are_static_c_strings() {
    for status in [
        QapStatus::Ok,
        QapStatus::NullArgument,
        QapStatus::ParseError,
        QapStatus::Divergence,
        QapStatus::BufferTooSmall,
        QapStatus::InternalPanic,
    ] {
        let ptr = qap_status_message(status);
        assert!(!ptr.is_null());
        let msg = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap();
        assert!(!msg.is_empty());
    }
}

#[test]
fn null_result_accessors_are_safe() {
    assert!(unsafe { qap_result_lower_bound(ptr::null()) }.is_nan());
    assert!(unsafe { qap_result_upper_bound(ptr::null()) }.is_nan());
    assert_eq!(unsafe { qap_result_iterations(ptr::null()) }, 0);
    assert_eq!(unsafe { qap_result_converged(ptr::null()) }, 0);
    assert_eq!(unsafe { qap_instance_order(ptr::null()) }, 0);
    unsafe { qap_result_free(ptr::null_mut()) };
    unsafe { qap_instance_free(ptr::null_mut()) };
}
