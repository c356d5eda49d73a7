//! C ABI over `spectree`.
//!
//! Operators live behind an opaque `SpectreeOperator*` created by one of the
//! `spectree_operator_*` constructors and released with
//! `spectree_operator_free`. Every call returns a `SpectreeStatus`; on
//! failure `spectree_last_error_message` describes the error for the
//! calling thread. Array results go to caller buffers: the required length
//! is always written to `out_len`, and `BufferTooSmall` is returned when
//! `capacity` is short.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use spectree::compop::{self, CompactnessConfig, OperatorSpec};
use spectree::document::Scenario;
use spectree::lpspace::Exponent;
use spectree::oracle;
use spectree::schatten;
use spectree::selfmap::SelfMap;
use spectree::tree::Tree;
use spectree::weight::Weight;
use spectree::Error;

/// Opaque operator handle.
pub struct SpectreeOperator {
    spec: OperatorSpec,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectreeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    /// Malformed spec document or inconsistent tree, weight or map.
    Validation = 4,
    /// The operation needs p = 2.
    RequiresHilbert = 5,
    BufferTooSmall = 6,
    /// Dense oracle over its size cap or not converged.
    Oracle = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectreeWeightFamily {
    /// `param` is the constant.
    Constant = 0,
    /// `1 / (1 + depth)`; `param` ignored.
    ReciprocalDepth = 1,
    /// `param^depth`.
    Geometric = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectreeMapKind {
    Identity = 0,
    Parent = 1,
    /// `param` levels up, clamped at the root.
    LevelShift = 2,
    /// Level n to level n^2 on the largest supported domain; `param` ignored.
    DepthSquare = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> SpectreeStatus {
    match err {
        Error::RequiresHilbert(_) => SpectreeStatus::RequiresHilbert,
        Error::DenseCapExceeded { .. } | Error::SvdNotConverged { .. } | Error::NonFiniteEntry { .. } => {
            SpectreeStatus::Oracle
        }
        Error::InvalidExponent(_)
        | Error::InvalidSchattenExponent(_)
        | Error::InvalidParameter { .. }
        | Error::TailDefectRegime { .. } => SpectreeStatus::InvalidArgument,
        _ => SpectreeStatus::Validation,
    }
}

struct Failure(SpectreeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SpectreeStatus::NullPointer, format!("`{what}` is null"))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SpectreeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SpectreeStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SpectreeStatus::Panic
        }
    }
}

unsafe fn operator<'a>(op: *const SpectreeOperator) -> Result<&'a OperatorSpec, Failure> {
    op.as_ref().map(|o| &o.spec).ok_or_else(|| null("op"))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

unsafe fn fill(values: &[f64], buf: *mut f64, capacity: usize, out_len: *mut usize) -> Result<(), Failure> {
    write(out_len, values.len(), "out_len")?;
    if capacity < values.len() {
        return Err(Failure(
            SpectreeStatus::BufferTooSmall,
            format!("buffer holds {capacity} values, {} needed", values.len()),
        ));
    }
    if !values.is_empty() {
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    Ok(())
}

unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(SpectreeStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

fn hand_out(spec: OperatorSpec, out: *mut *mut SpectreeOperator) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let handle = Box::into_raw(Box::new(SpectreeOperator { spec }));
    // SAFETY: checked non-null; the caller provides a writable slot.
    unsafe { out.write(handle) };
    Ok(())
}

/// Builds an operator on the complete `branching`-ary tree of depth `depth`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn spectree_operator_new_bary(
    branching: usize,
    depth: usize,
    weight: SpectreeWeightFamily,
    weight_param: f64,
    map: SpectreeMapKind,
    map_param: usize,
    p: f64,
    out: *mut *mut SpectreeOperator,
) -> SpectreeStatus {
    guard(|| {
        let tree = Tree::build_bary(branching, depth)?;
        let w = match weight {
            SpectreeWeightFamily::Constant => Weight::constant(&tree, weight_param)?,
            SpectreeWeightFamily::ReciprocalDepth => Weight::reciprocal_depth(&tree),
            SpectreeWeightFamily::Geometric => Weight::geometric(&tree, weight_param)?,
        };
        let m = match map {
            SpectreeMapKind::Identity => SelfMap::identity(&tree),
            SpectreeMapKind::Parent => SelfMap::parent(&tree),
            SpectreeMapKind::LevelShift => SelfMap::level_shift(&tree, map_param),
            SpectreeMapKind::DepthSquare => SelfMap::depth_square(&tree)?,
        };
        hand_out(OperatorSpec::new(tree, w, m, Exponent::new(p)?)?, out)
    })
}

/// Builds the operator a spec document describes at truncation depth
/// `depth`. Relative file references resolve against `base_dir`, or the
/// working directory when it is null.
///
/// # Safety
/// `json` must be a NUL-terminated string, `base_dir` null or
/// NUL-terminated, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spectree_operator_from_spec_json(
    json: *const c_char,
    base_dir: *const c_char,
    depth: usize,
    out: *mut *mut SpectreeOperator,
) -> SpectreeStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let base = if base_dir.is_null() {
            "."
        } else {
            str_arg(base_dir, "base_dir")?
        };
        let scenario = Scenario::parse(text, Path::new(base), Path::new("<ffi>"))?;
        hand_out(scenario.instance(depth)?, out)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `op` must come from a constructor above and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn spectree_operator_free(op: *mut SpectreeOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spectree_operator_vertex_count(
    op: *const SpectreeOperator,
    out: *mut usize,
) -> SpectreeStatus {
    guard(|| write(out, operator(op)?.tree().len(), "out"))
}

/// `max_v weight(v) / weight(map(v))`.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spectree_beta(op: *const SpectreeOperator, out: *mut f64) -> SpectreeStatus {
    guard(|| write(out, compop::beta(operator(op)?).value, "out"))
}

/// Exact operator norm on the truncation.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spectree_norm_exact(op: *const SpectreeOperator, out: *mut f64) -> SpectreeStatus {
    guard(|| write(out, compop::norm_exact(operator(op)?).value, "out"))
}

/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spectree_is_isometry(
    op: *const SpectreeOperator,
    ratio_tol: f64,
    out: *mut bool,
) -> SpectreeStatus {
    guard(|| write(out, compop::isometry_check(operator(op)?, ratio_tol).is_isometry, "out"))
}

/// Hilbert-Schmidt norm (p = 2 only).
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spectree_hs_norm(op: *const SpectreeOperator, out: *mut f64) -> SpectreeStatus {
    guard(|| write(out, schatten::hs_norm(operator(op)?)?, "out"))
}

/// `sum mu_n^q` (p = 2, q >= 1).
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn spectree_schatten_sum(op: *const SpectreeOperator, q: f64, out: *mut f64) -> SpectreeStatus {
    guard(|| write(out, schatten::schatten_sum(operator(op)?, q)?.diagonal_sum, "out"))
}

/// # Safety
/// `op` must be a live handle; `out_trace` and `out_fixed_points` writable.
#[no_mangle]
pub unsafe extern "C" fn spectree_trace(
    op: *const SpectreeOperator,
    out_trace: *mut f64,
    out_fixed_points: *mut usize,
) -> SpectreeStatus {
    guard(|| {
        let t = schatten::trace_diagonal(operator(op)?);
        write(out_trace, t.trace_diagonal, "out_trace")?;
        write(out_fixed_points, t.fixed_point_count, "out_fixed_points")
    })
}

/// Analytic singular values, descending, one per vertex (p = 2).
///
/// # Safety
/// `op` must be a live handle, `buf` valid for `capacity` doubles, `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn spectree_singular_values(
    op: *const SpectreeOperator,
    buf: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> SpectreeStatus {
    guard(|| {
        fill(
            &schatten::singular_values_analytic(operator(op)?)?,
            buf,
            capacity,
            out_len,
        )
    })
}

/// Dense-SVD singular values, descending (p = 2, at most `dense_cap` vertices).
///
/// # Safety
/// As for [`spectree_singular_values`].
#[no_mangle]
pub unsafe extern "C" fn spectree_oracle_singular_values(
    op: *const SpectreeOperator,
    dense_cap: usize,
    buf: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> SpectreeStatus {
    guard(|| {
        let m = oracle::matrix_of(operator(op)?, dense_cap)?;
        fill(&oracle::svd_values(&m)?, buf, capacity, out_len)
    })
}

/// Compactness tail `s_N` for `N = 0..=D`.
///
/// # Safety
/// As for [`spectree_singular_values`].
#[no_mangle]
pub unsafe extern "C" fn spectree_compactness_tail(
    op: *const SpectreeOperator,
    buf: *mut f64,
    capacity: usize,
    out_len: *mut usize,
) -> SpectreeStatus {
    guard(|| {
        let profile = compop::compactness_profile(operator(op)?, &CompactnessConfig::default());
        fill(&profile.s, buf, capacity, out_len)
    })
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn spectree_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status_codes() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, SpectreeStatus::Panic);
        let msg = unsafe { CStr::from_ptr(spectree_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "panic: boom");
        assert_eq!(guard(|| Ok(())), SpectreeStatus::Ok);
        assert!(spectree_last_error_message().is_null());
    }

    #[test]
    fn fill_checks_capacity_before_writing() {
        let mut buf = [7.0; 2];
        let mut len = 0;
        let r = unsafe { fill(&[1.0, 2.0, 3.0], buf.as_mut_ptr(), 2, &mut len) };
        assert!(matches!(r, Err(Failure(SpectreeStatus::BufferTooSmall, _))));
        assert_eq!((len, buf), (3, [7.0, 7.0]));
    }
}
