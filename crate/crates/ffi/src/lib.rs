//! C ABI over `countfact`.
//!
//! Every function returns a [`CfStatus`]; results come back through out
//! pointers. Factorizations are opaque handles created with
//! [`cf_factorization_new`] and released with [`cf_factorization_free`].
//! After a non-OK status, [`cf_last_error_message`] describes the failure on
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use countfact::bounds::{mathias_lower_bound, nuclear_lower_bound};
use countfact::mechanism::{estimate_errors, MechanismConfig};
use countfact::metrics::{maxse, meanse, predicted_residual};
use countfact::sequences::{landau_alpha, wallis_coeffs};
use countfact::{factorize, verify_reconstruction, Error, Factorization, Method, Metric};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    DenseBudgetExceeded = 4,
    Internal = 5,
}

/// Values accepted by the `method` parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfMethod {
    Sqrt = 0,
    Nsr = 1,
    GroupAlgebra = 2,
}

/// Values accepted by the `metric` parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfMetric {
    MaxSe = 0,
    MeanSe = 1,
}

/// Opaque factorization handle.
pub struct CfFactorization {
    inner: Factorization,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CfSimulation {
    pub sigma: f64,
    pub empirical_err_inf: f64,
    pub empirical_err_2: f64,
    pub theory_err_inf: f64,
    pub theory_err_2: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(CfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::DenseBudgetExceeded { .. } => CfStatus::DenseBudgetExceeded,
            Error::Io(_) | Error::Csv(_) => CfStatus::Internal,
            _ => CfStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            CfStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            CfStatus::Internal
        }
    }
}

fn method_from(code: u32) -> Result<Method, Fail> {
    match code {
        0 => Ok(Method::SquareRoot),
        1 => Ok(Method::Nsr),
        2 => Ok(Method::GroupAlgebra),
        _ => Err(Fail(
            CfStatus::InvalidArgument,
            format!("unknown method code {code}"),
        )),
    }
}

fn metric_from(code: u32) -> Result<Metric, Fail> {
    match code {
        0 => Ok(Metric::MaxSe),
        1 => Ok(Metric::MeanSe),
        _ => Err(Fail(
            CfStatus::InvalidArgument,
            format!("unknown metric code {code}"),
        )),
    }
}

fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    // SAFETY: caller promises `p` is null or valid for writes.
    unsafe { p.as_mut() }.ok_or_else(|| Fail(CfStatus::NullPointer, format!("`{name}` is null")))
}

fn handle<'a>(h: *const CfFactorization) -> Result<&'a Factorization, Fail> {
    // SAFETY: caller promises `h` is null or a live handle.
    unsafe { h.as_ref() }
        .map(|h| &h.inner)
        .ok_or_else(|| Fail(CfStatus::NullPointer, "factorization handle is null".into()))
}

fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(CfStatus::NullPointer, "output buffer is null".into()));
    }
    if len < src.len() {
        return Err(Fail(
            CfStatus::BufferTooSmall,
            format!("buffer holds {len}, need {}", src.len()),
        ));
    }
    // SAFETY: `out` is valid for `len >= src.len()` writes per the caller contract.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), out, src.len()) };
    Ok(())
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn cf_status_message(status: u32) -> *const c_char {
    let s: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer argument\0",
        2 => b"invalid argument\0",
        3 => b"output buffer too small\0",
        4 => b"matrix too large to materialize\0",
        5 => b"internal error\0",
        _ => b"unknown status\0",
    };
    s.as_ptr().cast()
}

/// Detail for the last failed call on this thread; empty after a success.
/// Valid until the next `cf_` call on the same thread.
#[no_mangle]
pub extern "C" fn cf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a factorization of the `n x n` counting matrix.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn cf_factorization_new(
    method: u32,
    n: usize,
    out: *mut *mut CfFactorization,
) -> CfStatus {
    guard(|| {
        let slot = out_ref(out, "out")?;
        *slot = ptr::null_mut();
        let inner = factorize(method_from(method)?, n)?;
        *slot = Box::into_raw(Box::new(CfFactorization { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `h` must be null or a handle from `cf_factorization_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cf_factorization_free(h: *mut CfFactorization) {
    if !h.is_null() {
        // SAFETY: ownership returns from `Box::into_raw` in `cf_factorization_new`.
        drop(unsafe { Box::from_raw(h) });
    }
}

/// # Safety
/// `h` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cf_factorization_n(
    h: *const CfFactorization,
    out: *mut usize,
) -> CfStatus {
    guard(|| {
        *out_ref(out, "out")? = handle(h)?.n();
        Ok(())
    })
}

/// Inner dimension `m`: `n` for sqrt and NSR, `2n` for group algebra.
///
/// # Safety
/// `h` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cf_factorization_inner_dim(
    h: *const CfFactorization,
    out: *mut usize,
) -> CfStatus {
    guard(|| {
        *out_ref(out, "out")? = handle(h)?.inner_dim();
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cf_factorization_maxse(
    h: *const CfFactorization,
    out: *mut f64,
) -> CfStatus {
    guard(|| {
        *out_ref(out, "out")? = maxse(handle(h)?);
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cf_factorization_meanse(
    h: *const CfFactorization,
    out: *mut f64,
) -> CfStatus {
    guard(|| {
        *out_ref(out, "out")? = meanse(handle(h)?);
        Ok(())
    })
}

/// Max-abs entrywise deviation of `L R` from the counting matrix.
///
/// # Safety
/// `h` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cf_factorization_verify(
    h: *const CfFactorization,
    out: *mut f64,
) -> CfStatus {
    guard(|| {
        *out_ref(out, "out")? = verify_reconstruction(handle(h)?)?;
        Ok(())
    })
}

/// Squared row norms of `L` (`n` values).
///
/// # Safety
/// `h` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cf_factorization_row_norms_sq_left(
    h: *const CfFactorization,
    out: *mut f64,
    len: usize,
) -> CfStatus {
    guard(|| copy_out(handle(h)?.row_norms_sq_left(), out, len))
}

/// Squared column norms of `R` (`n` values).
///
/// # Safety
/// `h` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cf_factorization_col_norms_sq_right(
    h: *const CfFactorization,
    out: *mut f64,
    len: usize,
) -> CfStatus {
    guard(|| copy_out(handle(h)?.col_norms_sq_right(), out, len))
}

/// `L` as an `n x m` row-major array.
///
/// # Safety
/// `h` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cf_factorization_dense_left(
    h: *const CfFactorization,
    out: *mut f64,
    len: usize,
) -> CfStatus {
    guard(|| copy_out(handle(h)?.dense_left()?.entries(), out, len))
}

/// `R` as an `m x n` row-major array.
///
/// # Safety
/// `h` must be a live handle; `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cf_factorization_dense_right(
    h: *const CfFactorization,
    out: *mut f64,
    len: usize,
) -> CfStatus {
    guard(|| copy_out(handle(h)?.dense_right()?.entries(), out, len))
}

/// First `n` Wallis coefficients into `out`.
///
/// # Safety
/// `out` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cf_wallis_coeffs(n: usize, out: *mut f64, len: usize) -> CfStatus {
    guard(|| copy_out(&wallis_coeffs(n)?, out, len))
}

/// # Safety
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cf_landau_alpha(n: usize, out: *mut f64) -> CfStatus {
    guard(|| {
        *out_ref(out, "out")? = landau_alpha(n)?;
        Ok(())
    })
}

/// # Safety
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cf_nuclear_lower_bound(n: usize, out: *mut f64) -> CfStatus {
    guard(|| {
        *out_ref(out, "out")? = nuclear_lower_bound(n)?;
        Ok(())
    })
}

/// # Safety
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cf_mathias_lower_bound(n: usize, out: *mut f64) -> CfStatus {
    guard(|| {
        *out_ref(out, "out")? = mathias_lower_bound(n)?;
        Ok(())
    })
}

/// Limiting value of `metric - log(n)/pi` for `method`.
///
/// # Safety
/// `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn cf_predicted_residual(
    method: u32,
    metric: u32,
    out: *mut f64,
) -> CfStatus {
    guard(|| {
        *out_ref(out, "out")? = predicted_residual(method_from(method)?, metric_from(metric)?);
        Ok(())
    })
}

/// Monte Carlo run of the Gaussian matrix mechanism on input `x` (length `n`).
///
/// # Safety
/// `h` must be a live handle; `x` valid for `x_len` reads; `out` valid for one
/// write.
#[no_mangle]
pub unsafe extern "C" fn cf_simulate(
    h: *const CfFactorization,
    mu: f64,
    trials: u64,
    seed: u64,
    x: *const f64,
    x_len: usize,
    out: *mut CfSimulation,
) -> CfStatus {
    guard(|| {
        let f = handle(h)?;
        let out = out_ref(out, "out")?;
        if x.is_null() {
            return Err(Fail(CfStatus::NullPointer, "`x` is null".into()));
        }
        // SAFETY: caller promises `x` is valid for `x_len` reads.
        let input = unsafe { std::slice::from_raw_parts(x, x_len) }.to_vec();
        let r = estimate_errors(&MechanismConfig::new(f, mu, trials, seed, input))?;
        *out = CfSimulation {
            sigma: r.sigma,
            empirical_err_inf: r.empirical_err_inf,
            empirical_err_2: r.empirical_err_2,
            theory_err_inf: r.theory_err_inf,
            theory_err_2: r.theory_err_2,
        };
        Ok(())
    })
}
