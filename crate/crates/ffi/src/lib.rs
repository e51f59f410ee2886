//! C ABI over the dipeps library. Every call returns a `DipepsStatus`; results go through out-pointers.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dipeps::conditions::check_di;
use dipeps::error::Error;
use dipeps::families::{random_di, toric_code};
use dipeps::geometry::{count_di_params, count_normal_peps_params, count_state_params};
use dipeps::tensors::TensorFile;
use dipeps::transfer::{block_spectrum, build_transfer, Flux, Parity, WTilde};
use dipeps::PepsTensor;

/// cbindgen:prefix-with-name
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DipepsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NumericalFailure = 3,
    Panic = 4,
}

/// Opaque tensor handle; release with `dipeps_tensor_free`.
pub struct DipepsTensor(PepsTensor);

fn status_of(e: &Error) -> DipepsStatus {
    match e {
        Error::Numerical(_) | Error::ConditionFailed { .. } | Error::ZeroProbability { .. } => {
            DipepsStatus::NumericalFailure
        }
        _ => DipepsStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> DipepsStatus) -> DipepsStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(DipepsStatus::Panic)
}

unsafe fn emit_tensor(r: dipeps::Result<PepsTensor>, out: *mut *mut DipepsTensor) -> DipepsStatus {
    if out.is_null() {
        return DipepsStatus::NullPointer;
    }
    match r {
        Ok(t) => {
            *out = Box::into_raw(Box::new(DipepsTensor(t)));
            DipepsStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Random DI tensor (chi = 1 or 2), deterministic in `seed`.
///
/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn dipeps_random_di(d: usize, chi: usize, seed: u64, out: *mut *mut DipepsTensor) -> DipepsStatus {
    guard(|| emit_tensor(random_di(d, chi, seed), out))
}

/// # Safety
/// `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn dipeps_toric_code(out: *mut *mut DipepsTensor) -> DipepsStatus {
    guard(|| emit_tensor(Ok(toric_code()), out))
}

/// Parse a tensor from the JSON file format `{"d", "chi", "data": [[re, im], ...]}`.
///
/// # Safety
/// `json` must be null or a NUL-terminated string; `out` must be null or valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn dipeps_tensor_from_json(json: *const c_char, out: *mut *mut DipepsTensor) -> DipepsStatus {
    guard(|| {
        if json.is_null() {
            return DipepsStatus::NullPointer;
        }
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return DipepsStatus::InvalidInput;
        };
        let parsed = serde_json::from_str::<TensorFile>(text)
            .map_err(|e| Error::InvalidParameter(e.to_string()))
            .and_then(|f| PepsTensor::from_file(&f));
        emit_tensor(parsed, out)
    })
}

/// # Safety
/// `t` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn dipeps_tensor_free(t: *mut DipepsTensor) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// All pointers must be non-null and valid; `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dipeps_tensor_dims(t: *const DipepsTensor, d: *mut usize, chi: *mut usize) -> DipepsStatus {
    guard(|| {
        if t.is_null() || d.is_null() || chi.is_null() {
            return DipepsStatus::NullPointer;
        }
        *d = (*t).0.d();
        *chi = (*t).0.chi();
        DipepsStatus::Ok
    })
}

/// Isometric and dual-isometric residuals; `pass` is set when both are within `tol`.
///
/// # Safety
/// All pointers must be non-null and valid; `t` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dipeps_check_di(
    t: *const DipepsTensor,
    tol: f64,
    residual_iso: *mut f64,
    residual_dual: *mut f64,
    pass: *mut bool,
) -> DipepsStatus {
    guard(|| {
        if t.is_null() || residual_iso.is_null() || residual_dual.is_null() || pass.is_null() {
            return DipepsStatus::NullPointer;
        }
        if !(tol >= 0.0) {
            return DipepsStatus::InvalidInput;
        }
        let rep = check_di(&(*t).0, tol);
        *residual_iso = rep.residual_iso;
        *residual_dual = rep.residual_dual;
        *pass = rep.pass;
        DipepsStatus::Ok
    })
}

/// Real parameter counts of the DI manifold, normal PEPS tensors and the physical state.
///
/// # Safety
/// Out-pointers must be non-null and valid.
#[no_mangle]
pub unsafe extern "C" fn dipeps_param_counts(
    d: u64,
    chi: u64,
    di: *mut u64,
    normal_peps: *mut u64,
    state: *mut u64,
) -> DipepsStatus {
    guard(|| {
        if di.is_null() || normal_peps.is_null() || state.is_null() {
            return DipepsStatus::NullPointer;
        }
        if d == 0 || chi == 0 {
            return DipepsStatus::InvalidInput;
        }
        *di = count_di_params(d, chi);
        *normal_peps = count_normal_peps_params(d, chi);
        *state = count_state_params(d, chi);
        DipepsStatus::Ok
    })
}

/// Leading eigenvalue modulus of the Z2 transfer operator on a ring of `m` sites, restricted to one parity block.
///
/// # Safety
/// `out` must be non-null and valid.
#[no_mangle]
pub unsafe extern "C" fn dipeps_transfer_leading(
    alpha: f64,
    beta: f64,
    m: usize,
    flux_pi: bool,
    odd_parity: bool,
    out: *mut f64,
) -> DipepsStatus {
    guard(|| {
        if out.is_null() {
            return DipepsStatus::NullPointer;
        }
        let flux = if flux_pi { Flux::Pi } else { Flux::Zero };
        let parity = if odd_parity { Parity::Odd } else { Parity::Even };
        let r = WTilde::new(alpha, beta)
            .and_then(|wt| build_transfer(&wt, m, flux))
            .and_then(|op| block_spectrum(&op, parity, m));
        match r {
            Ok(s) => {
                *out = s.leading;
                DipepsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}
