//! C ABI over `cocomp`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`CocompStatus`]; on failure a message is available from
//! [`cocomp_last_error`] on the same thread. Matrices are row-major with
//! separate real and imaginary arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cocomp::delta::{common_complement, ComplementCertificate};
use cocomp::grassmann::{buckholtz_report, Subspace};
use cocomp::{CMatrix, Error, Tolerances, TriState};

/// Status codes returned by every fallible entry point.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CocompStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    NotInDelta = 4,
    NumericalFailure = 5,
    Panic = 6,
}

/// `1` true, `0` false, `-1` indeterminate.
pub type CocompTri = i32;

/// Verdicts of the three complementarity tests for a pair.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CocompCheck {
    pub diff_invertible: CocompTri,
    pub norm_lt_one: CocompTri,
    pub direct_sum: CocompTri,
    /// `‖P_S + P_T − 1‖`.
    pub norm_value: f64,
    /// `1 − norm_value`.
    pub margin: f64,
}

/// Opaque subspace handle.
pub struct CocompSubspace(Subspace);

/// Opaque common-complement certificate handle.
pub struct CocompCertificate(ComplementCertificate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CocompStatus, message: impl Into<String>) -> CocompStatus {
    set_error(message.into());
    status
}

fn status_of(e: &Error) -> CocompStatus {
    let status = match e {
        Error::DimensionMismatch { .. } | Error::NotSquare { .. } => {
            CocompStatus::DimensionMismatch
        }
        Error::InvalidInput(_) => CocompStatus::InvalidInput,
        Error::NotInDelta { .. } => CocompStatus::NotInDelta,
        _ => CocompStatus::NumericalFailure,
    };
    fail(status, e.to_string())
}

/// Runs `body`, turning a panic into [`CocompStatus::Panic`].
fn guarded(body: impl FnOnce() -> CocompStatus) -> CocompStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(CocompStatus::Panic, "internal panic"),
    }
}

fn tri(t: TriState) -> CocompTri {
    match t {
        TriState::True => 1,
        TriState::False => 0,
        TriState::Indeterminate => -1,
    }
}

/// Builds `span` of the `cols` columns of the `n x cols` row-major matrix
/// `re + i im`. `im` may be null for a real matrix. The result may have
/// smaller dimension than `cols` when the columns are dependent.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `n * cols` doubles and `out`
/// to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn cocomp_subspace_span(
    n: usize,
    cols: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut CocompSubspace,
) -> CocompStatus {
    guarded(|| {
        if out.is_null() || (re.is_null() && n * cols > 0) {
            return fail(CocompStatus::NullPointer, "null argument");
        }
        let len = n * cols;
        let re = if len == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(re, len)
        };
        let im = if im.is_null() || len == 0 {
            vec![0.0; len]
        } else {
            std::slice::from_raw_parts(im, len).to_vec()
        };
        let m = match CMatrix::from_parts(n, cols, re, &im) {
            Ok(m) => m,
            Err(e) => return status_of(&e),
        };
        let s = Subspace::span(&m, &Tolerances::default());
        *out = Box::into_raw(Box::new(CocompSubspace(s)));
        CocompStatus::Ok
    })
}

/// # Safety
/// `s` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cocomp_subspace_free(s: *mut CocompSubspace) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Ambient dimension, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cocomp_subspace_ambient_dim(s: *const CocompSubspace) -> usize {
    s.as_ref().map_or(0, |s| s.0.ambient_dim())
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cocomp_subspace_dim(s: *const CocompSubspace) -> usize {
    s.as_ref().map_or(0, |s| s.0.dim())
}

/// Copies the orthonormal basis (`ambient_dim x dim`, row-major) into `re`
/// and `im`, each of capacity `len`.
///
/// # Safety
/// `s` must be a live handle; `re` and `im` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cocomp_subspace_basis(
    s: *const CocompSubspace,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> CocompStatus {
    guarded(|| {
        let Some(s) = s.as_ref() else {
            return fail(CocompStatus::NullPointer, "null subspace");
        };
        let (r, i) = s.0.basis().to_parts();
        if len < r.len() {
            return fail(
                CocompStatus::DimensionMismatch,
                format!("buffer holds {len} entries, basis needs {}", r.len()),
            );
        }
        if r.is_empty() {
            return CocompStatus::Ok;
        }
        if re.is_null() || im.is_null() {
            return fail(CocompStatus::NullPointer, "null buffer");
        }
        ptr::copy_nonoverlapping(r.as_ptr(), re, r.len());
        ptr::copy_nonoverlapping(i.as_ptr(), im, i.len());
        CocompStatus::Ok
    })
}

/// Runs the three complementarity tests on `(s, t)`.
///
/// # Safety
/// `s`, `t` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cocomp_check(
    s: *const CocompSubspace,
    t: *const CocompSubspace,
    out: *mut CocompCheck,
) -> CocompStatus {
    guarded(|| {
        let (Some(s), Some(t)) = (s.as_ref(), t.as_ref()) else {
            return fail(CocompStatus::NullPointer, "null subspace");
        };
        if out.is_null() {
            return fail(CocompStatus::NullPointer, "null output");
        }
        match buckholtz_report(&s.0, &t.0, &Tolerances::default()) {
            Ok(r) => {
                *out = CocompCheck {
                    diff_invertible: tri(r.diff_invertible),
                    norm_lt_one: tri(r.norm_lt_one),
                    direct_sum: tri(r.direct_sum),
                    norm_value: r.norm_value,
                    margin: r.margin(),
                };
                CocompStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Finds a common complement of two subspaces of equal dimension.
///
/// # Safety
/// `s`, `t` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cocomp_common_complement(
    s: *const CocompSubspace,
    t: *const CocompSubspace,
    seed: u64,
    out: *mut *mut CocompCertificate,
) -> CocompStatus {
    guarded(|| {
        let (Some(s), Some(t)) = (s.as_ref(), t.as_ref()) else {
            return fail(CocompStatus::NullPointer, "null subspace");
        };
        if out.is_null() {
            return fail(CocompStatus::NullPointer, "null output");
        }
        match common_complement(&s.0, &t.0, &Tolerances::default(), seed) {
            Ok(cert) => {
                *out = Box::into_raw(Box::new(CocompCertificate(cert)));
                CocompStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// New subspace handle holding the certified complement.
///
/// # Safety
/// `cert` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cocomp_certificate_complement(
    cert: *const CocompCertificate,
    out: *mut *mut CocompSubspace,
) -> CocompStatus {
    guarded(|| {
        let Some(cert) = cert.as_ref() else {
            return fail(CocompStatus::NullPointer, "null certificate");
        };
        if out.is_null() {
            return fail(CocompStatus::NullPointer, "null output");
        }
        *out = Box::into_raw(Box::new(CocompSubspace(cert.0.z.clone())));
        CocompStatus::Ok
    })
}

/// Writes the margins against `S` and `T`.
///
/// # Safety
/// `cert` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn cocomp_certificate_margins(
    cert: *const CocompCertificate,
    margin_s: *mut f64,
    margin_t: *mut f64,
) -> CocompStatus {
    guarded(|| {
        let Some(cert) = cert.as_ref() else {
            return fail(CocompStatus::NullPointer, "null certificate");
        };
        if margin_s.is_null() || margin_t.is_null() {
            return fail(CocompStatus::NullPointer, "null output");
        }
        *margin_s = cert.0.margin_s;
        *margin_t = cert.0.margin_t;
        CocompStatus::Ok
    })
}

/// # Safety
/// `cert` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cocomp_certificate_free(cert: *mut CocompCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn cocomp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
