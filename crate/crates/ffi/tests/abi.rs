use std::ffi::CStr;
use std::ptr;

use countfact_ffi::*;

fn new(method: CfMethod, n: usize) -> *mut CfFactorization {
    let mut h = ptr::null_mut();
    assert_eq!(
        unsafe { cf_factorization_new(method as u32, n, &mut h) },
        CfStatus::Ok
    );
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(cf_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn nsr_n2_through_handle() {
    let h = new(CfMethod::Nsr, 2);
    let (mut n, mut m, mut mx, mut mn, mut err) = (0usize, 0usize, 0.0, 0.0, 1.0);
    unsafe {
        assert_eq!(cf_factorization_n(h, &mut n), CfStatus::Ok);
        assert_eq!(cf_factorization_inner_dim(h, &mut m), CfStatus::Ok);
        assert_eq!(cf_factorization_maxse(h, &mut mx), CfStatus::Ok);
        assert_eq!(cf_factorization_meanse(h, &mut mn), CfStatus::Ok);
        assert_eq!(cf_factorization_verify(h, &mut err), CfStatus::Ok);
    }
    assert_eq!((n, m), (2, 2));
    assert!((mx - 1.17557).abs() < 1e-5);
    assert!((mn - 1.14717).abs() < 1e-5);
    assert!(err < 1e-12);

    let mut right = [0.0; 4];
    let mut cols = [0.0; 2];
    unsafe {
        assert_eq!(
            cf_factorization_dense_right(h, right.as_mut_ptr(), 4),
            CfStatus::Ok
        );
        assert_eq!(
            cf_factorization_col_norms_sq_right(h, cols.as_mut_ptr(), 2),
            CfStatus::Ok
        );
        cf_factorization_free(h);
    }
    let s5 = 5f64.sqrt();
    let expect = [2.0 / s5, 0.0, 1.0 / s5, 1.0];
    for (a, b) in right.iter().zip(expect) {
        assert!((a - b).abs() < 1e-15);
    }
    assert!(cols.iter().all(|c| (c - 1.0).abs() < 1e-12));
}

#[test]
fn group_algebra_has_doubled_inner_dim() {
    let h = new(CfMethod::GroupAlgebra, 8);
    let mut m = 0;
    let mut left = vec![0.0; 8 * 16];
    let mut rows = [0.0; 8];
    unsafe {
        assert_eq!(cf_factorization_inner_dim(h, &mut m), CfStatus::Ok);
        assert_eq!(
            cf_factorization_dense_left(h, left.as_mut_ptr(), left.len()),
            CfStatus::Ok
        );
        assert_eq!(
            cf_factorization_row_norms_sq_left(h, rows.as_mut_ptr(), 8),
            CfStatus::Ok
        );
        cf_factorization_free(h);
    }
    assert_eq!(m, 16);
    for (j, r) in rows.iter().enumerate() {
        let direct: f64 = left[j * 16..(j + 1) * 16].iter().map(|v| v * v).sum();
        assert!((direct - r).abs() < 1e-12 * r);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut h = ptr::null_mut();
    let mut x = 0.0;
    unsafe {
        assert_eq!(
            cf_factorization_new(3, 4, &mut h),
            CfStatus::InvalidArgument
        );
        assert!(last_error().contains("method"));
        assert_eq!(
            cf_factorization_new(0, 0, &mut h),
            CfStatus::InvalidArgument
        );
        assert_eq!(
            cf_factorization_new(0, 4, ptr::null_mut()),
            CfStatus::NullPointer
        );
        assert_eq!(
            cf_factorization_maxse(ptr::null(), &mut x),
            CfStatus::NullPointer
        );
        assert_eq!(cf_landau_alpha(0, &mut x), CfStatus::InvalidArgument);
        assert_eq!(
            cf_predicted_residual(0, 9, &mut x),
            CfStatus::InvalidArgument
        );
        assert_eq!(cf_landau_alpha(2, &mut x), CfStatus::Ok);
    }
    assert!(last_error().is_empty());
    assert!((x - (1.25 - 2f64.ln() / std::f64::consts::PI)).abs() < 1e-14);

    let big = new(CfMethod::Sqrt, 5000);
    let mut one = [0.0; 1];
    unsafe {
        assert_eq!(
            cf_factorization_dense_left(big, one.as_mut_ptr(), 1),
            CfStatus::DenseBudgetExceeded
        );
        let mut rows = [0.0; 10];
        assert_eq!(
            cf_factorization_row_norms_sq_left(big, rows.as_mut_ptr(), 10),
            CfStatus::BufferTooSmall
        );
        cf_factorization_free(big);
        cf_factorization_free(ptr::null_mut());
    }
    let msg = unsafe { CStr::from_ptr(cf_status_message(CfStatus::BufferTooSmall as u32)) };
    assert_eq!(msg.to_str().unwrap(), "output buffer too small");
    let msg = unsafe { CStr::from_ptr(cf_status_message(99)) };
    assert_eq!(msg.to_str().unwrap(), "unknown status");
}

#[test]
fn scalar_functions() {
    let mut r = [0.0; 4];
    let (mut nuc, mut mat, mut pred) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(cf_wallis_coeffs(4, r.as_mut_ptr(), 4), CfStatus::Ok);
        assert_eq!(cf_nuclear_lower_bound(2, &mut nuc), CfStatus::Ok);
        assert_eq!(cf_mathias_lower_bound(2, &mut mat), CfStatus::Ok);
        assert_eq!(
            cf_predicted_residual(CfMethod::Nsr as u32, CfMetric::MaxSe as u32, &mut pred),
            CfStatus::Ok
        );
    }
    assert_eq!(r, [1.0, 0.5, 0.375, 0.3125]);
    assert!((nuc - 5f64.sqrt() / 2.0).abs() < 1e-15);
    assert!((mat - 3.0 * 2f64.sqrt() / 4.0).abs() < 1e-15);
    assert!((pred - 0.8456).abs() < 1e-4);
}

#[test]
fn simulate_is_deterministic_and_scales() {
    let h = new(CfMethod::Nsr, 16);
    let x = [1.0; 16];
    let run = |mu: f64| {
        let mut out = CfSimulation::default();
        assert_eq!(
            unsafe { cf_simulate(h, mu, 500, 11, x.as_ptr(), x.len(), &mut out) },
            CfStatus::Ok
        );
        out
    };
    let (a, b, half) = (run(1.0), run(1.0), run(2.0));
    assert_eq!(a, b);
    assert_eq!(2.0 * half.empirical_err_inf, a.empirical_err_inf);
    assert_eq!(2.0 * half.empirical_err_2, a.empirical_err_2);
    let mut out = CfSimulation::default();
    unsafe {
        assert_eq!(
            cf_simulate(h, 1.0, 10, 0, x.as_ptr(), 3, &mut out),
            CfStatus::InvalidArgument
        );
        assert_eq!(
            cf_simulate(h, 0.0, 10, 0, x.as_ptr(), 16, &mut out),
            CfStatus::InvalidArgument
        );
        assert_eq!(
            cf_simulate(h, 1.0, 10, 0, ptr::null(), 16, &mut out),
            CfStatus::NullPointer
        );
        cf_factorization_free(h);
    }
}
