//! C ABI for the stablesup library.
//!
//! Conventions:
//! - All functions return an `SsupStatus` code; `SSUP_STATUS_OK` is 0.
//! - Parameter sets are opaque handles created with `ssup_params_new` and
//!   released with `ssup_params_free`.
//! - On any non-zero status, `ssup_last_error_message` returns a
//!   human-readable description of the most recent error on the calling
//!   thread.
//!
//! The header `include/stablesup.h` is generated by cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use stablesup::contfrac;
use stablesup::hp::HpReal;
use stablesup::params::{ParamOptions, StableParams};
use stablesup::series::{self, Side};
use stablesup::Error;

/// Status codes returned by every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsupStatus {
    Ok = 0,
    /// Null pointer or otherwise invalid argument.
    InvalidArgument = 1,
    /// Parameters outside the admissible (alpha, rho) region.
    Admissibility = 2,
    /// alpha classified as numerically rational.
    RationalAlpha = 3,
    /// rho falls in a Doney class of alpha.
    DoneyClass = 4,
    /// Evaluation point outside the supported range.
    OutOfRange = 5,
    /// The summation stopped before reaching the requested tolerance;
    /// the output value is the best available estimate.
    NotConverged = 6,
    /// Any other library error; see `ssup_last_error_message`.
    Internal = 7,
    /// A panic crossed the FFI boundary (a bug; please report).
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &Error) -> SsupStatus {
    match err {
        Error::Admissibility(_) | Error::NonPositiveInput(_) => SsupStatus::Admissibility,
        Error::RationalAlpha { .. } => SsupStatus::RationalAlpha,
        Error::DoneyClass { .. } => SsupStatus::DoneyClass,
        Error::OutOfRange { .. } => SsupStatus::OutOfRange,
        Error::ShellBudgetExhausted { .. } | Error::CutoffUnderflow { .. } => {
            SsupStatus::NotConverged
        }
        Error::InvalidConfig(_) | Error::Unsupported(_) => SsupStatus::InvalidArgument,
        _ => SsupStatus::Internal,
    }
}

fn guard<F: FnOnce() -> SsupStatus>(f: F) -> SsupStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("panic inside stablesup");
            SsupStatus::Panic
        }
    }
}

/// Opaque parameter handle.
pub struct SsupParams {
    inner: StableParams,
}

/// Create a parameter handle.
///
/// `alpha_decimal` is a NUL-terminated decimal string (e.g. "1.4142135623");
/// keeping it textual lets the rationality gate see the exact input. Set
/// `assume_irrational` nonzero to treat the decimal as a truncation of an
/// irrational target. On success `*out` owns the handle; free it with
/// `ssup_params_free`.
#[no_mangle]
pub unsafe extern "C" fn ssup_params_new(
    alpha_decimal: *const c_char,
    rho: c_double,
    assume_irrational: c_int,
    out: *mut *mut SsupParams,
) -> SsupStatus {
    guard(|| {
        if alpha_decimal.is_null() || out.is_null() {
            set_error("null pointer argument");
            return SsupStatus::InvalidArgument;
        }
        let s = match unsafe { CStr::from_ptr(alpha_decimal) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("alpha_decimal is not valid UTF-8");
                return SsupStatus::InvalidArgument;
            }
        };
        let alpha = match HpReal::from_decimal_str(s) {
            Ok(a) => a,
            Err(e) => {
                set_error(&e.to_string());
                return SsupStatus::InvalidArgument;
            }
        };
        let mut opts = ParamOptions::default();
        opts.assume_irrational = assume_irrational != 0;
        let alpha = if opts.assume_irrational {
            HpReal::approx_or_exact(alpha.value().clone(), Some(opts.precision_bits))
        } else {
            alpha
        };
        match StableParams::new(alpha, rho, opts) {
            Ok(p) => {
                unsafe { *out = Box::into_raw(Box::new(SsupParams { inner: p })) };
                SsupStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Release a handle created by `ssup_params_new`. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ssup_params_free(params: *mut SsupParams) {
    if !params.is_null() {
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Supremum density p(x) by triangular summation along the continued-fraction
/// cutoffs of 2/alpha. On `SSUP_STATUS_NOT_CONVERGED` the best available
/// estimate is still stored in `*out`.
#[no_mangle]
pub unsafe extern "C" fn ssup_density(
    params: *const SsupParams,
    x: c_double,
    tol: c_double,
    out: *mut c_double,
) -> SsupStatus {
    guard(|| {
        let Some(p) = (unsafe { params.as_ref() }) else {
            set_error("null params");
            return SsupStatus::InvalidArgument;
        };
        if out.is_null() {
            set_error("null out pointer");
            return SsupStatus::InvalidArgument;
        }
        let cutoffs = match contfrac::cutoff_sequence(&p.inner, series::DEFAULT_Q_MAX) {
            Ok(c) => c,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        match series::density_triangular(&p.inner, x, &cutoffs, tol) {
            Ok(r) => {
                unsafe { *out = r.value };
                let converged = r
                    .trace
                    .as_ref()
                    .map_or(true, |t| t.verdict == series::Verdict::Converged);
                if converged {
                    SsupStatus::Ok
                } else {
                    set_error("triangular summation exhausted its cutoffs");
                    SsupStatus::NotConverged
                }
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Leading asymptotic coefficient of p(x) as x -> 0 (`side` = 0) or
/// x -> infinity (`side` = 1): the constant c in p(x) ~ c x^(alpha rho - 1)
/// respectively p(x) ~ c x^(-1 - alpha).
///
/// Only the side covered by the convergent expansion of the branch is
/// available: side 0 for alpha > 1, side 1 for alpha < 1. The other side
/// returns `SSUP_STATUS_INVALID_ARGUMENT`.
#[no_mangle]
pub unsafe extern "C" fn ssup_leading_asymptotic(
    params: *const SsupParams,
    side: c_int,
    out: *mut c_double,
) -> SsupStatus {
    guard(|| {
        let Some(p) = (unsafe { params.as_ref() }) else {
            set_error("null params");
            return SsupStatus::InvalidArgument;
        };
        if out.is_null() {
            set_error("null out pointer");
            return SsupStatus::InvalidArgument;
        }
        let side = match side {
            0 => Side::Zero,
            1 => Side::Infinity,
            _ => {
                set_error("side must be 0 (x -> 0) or 1 (x -> infinity)");
                return SsupStatus::InvalidArgument;
            }
        };
        match series::leading_asymptotic(&p.inner, side) {
            Ok((_, coeff)) => {
                unsafe { *out = coeff.to_f64() };
                SsupStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Total mass of the computed density (a self-check; should be 1).
#[no_mangle]
pub unsafe extern "C" fn ssup_total_mass(
    params: *const SsupParams,
    tol: c_double,
    out: *mut c_double,
) -> SsupStatus {
    guard(|| {
        let Some(p) = (unsafe { params.as_ref() }) else {
            set_error("null params");
            return SsupStatus::InvalidArgument;
        };
        if out.is_null() {
            set_error("null out pointer");
            return SsupStatus::InvalidArgument;
        }
        match series::total_mass(&p.inner, tol) {
            Ok(m) => {
                unsafe { *out = m.total };
                SsupStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Copy the last error message on this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes, excluding
/// the NUL.
#[no_mangle]
pub unsafe extern "C" fn ssup_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}
