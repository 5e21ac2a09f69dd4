//! C ABI for the diffprop interval library.
//!
//! Every fallible function returns a [`DiffpropStatus`] and writes results
//! through out-pointers. On failure a message for the calling thread is
//! available from [`diffprop_last_error`]. Designs and coverage curves are
//! opaque handles that must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use diffprop::classical::{classical_interval, Counts};
use diffprop::coverage::{coverage_curve, CoverageCurve};
use diffprop::design::mixture_variance;
use diffprop::{
    enumerate_support, exact_interval, truncate, ConfidenceLevel, Design, Diagnostic, DiffSupport,
    Error, IntervalEstimate, MethodId, MixtureDistribution, QuadratureSpec, RootSpec,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffpropStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside its domain.
    Domain = 2,
    /// Quadrature or root-finding did not converge.
    Numerical = 3,
    /// Unknown or unsupported method tag.
    Method = 4,
    /// Counts for which the requested method is undefined.
    Degenerate = 5,
    /// Output buffer has the wrong length.
    BufferSize = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffpropDiagnostic {
    None = 0,
    RadicandClipped = 1,
    CubicLimit = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffpropInterval {
    pub lower: f64,
    pub upper: f64,
    pub gamma: f64,
    pub truncated: bool,
    pub diagnostic: DiffpropDiagnostic,
}

/// Opaque sample-size pair with its cached support.
pub struct DiffpropDesign {
    design: Design,
    support: DiffSupport,
}

/// Opaque coverage curve.
pub struct DiffpropCurve {
    curve: CoverageCurve,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> DiffpropStatus {
    match e {
        Error::Domain(_) | Error::DegenerateModel(_) => DiffpropStatus::Domain,
        Error::DegenerateCounts { .. } => DiffpropStatus::Degenerate,
        Error::Quadrature(_) | Error::NoBracket { .. } => DiffpropStatus::Numerical,
        Error::Method(_) => DiffpropStatus::Method,
    }
}

/// Runs `f`, recording any error or panic for [`diffprop_last_error`].
fn guard<F>(f: F) -> DiffpropStatus
where
    F: FnOnce() -> Result<(), (DiffpropStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DiffpropStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DiffpropStatus::Panic
        }
    }
}

fn lib<T>(r: diffprop::Result<T>) -> Result<T, (DiffpropStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (DiffpropStatus, String) {
    (DiffpropStatus::NullPointer, format!("{name} is null"))
}

unsafe fn method_arg(tag: *const c_char) -> Result<MethodId, (DiffpropStatus, String)> {
    if tag.is_null() {
        return Err(null("method"));
    }
    let s = CStr::from_ptr(tag).to_str().map_err(|_| {
        (
            DiffpropStatus::Method,
            "method tag is not UTF-8".to_string(),
        )
    })?;
    lib(s.parse())
}

fn to_c(iv: &IntervalEstimate) -> DiffpropInterval {
    DiffpropInterval {
        lower: iv.lower,
        upper: iv.upper,
        gamma: iv.gamma,
        truncated: iv.truncated,
        diagnostic: match iv.diagnostic {
            None => DiffpropDiagnostic::None,
            Some(Diagnostic::RadicandClipped) => DiffpropDiagnostic::RadicandClipped,
            Some(Diagnostic::CubicLimit) => DiffpropDiagnostic::CubicLimit,
        },
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn diffprop_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn diffprop_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a design; release it with [`diffprop_design_free`].
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn diffprop_design_new(
    n1: u32,
    n2: u32,
    out: *mut *mut DiffpropDesign,
) -> DiffpropStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let design = lib(Design::new(n1, n2))?;
        let handle = Box::new(DiffpropDesign {
            design,
            support: enumerate_support(design),
        });
        *out = Box::into_raw(handle);
        Ok(())
    })
}

/// # Safety
/// `design` must be null or a handle from [`diffprop_design_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn diffprop_design_free(design: *mut DiffpropDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// Number of attainable observed differences; 0 for a null handle.
///
/// # Safety
/// `design` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn diffprop_design_support_len(design: *const DiffpropDesign) -> usize {
    design.as_ref().map_or(0, |d| d.support.len())
}

/// Writes the attainable differences in increasing order.
///
/// # Safety
/// `design` must be a live handle and `values` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn diffprop_design_support(
    design: *const DiffpropDesign,
    values: *mut f64,
    len: usize,
) -> DiffpropStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        if values.is_null() {
            return Err(null("values"));
        }
        if len != d.support.len() {
            return Err((
                DiffpropStatus::BufferSize,
                format!("buffer holds {len} values, support has {}", d.support.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(values, len);
        for (slot, v) in out.iter_mut().zip(d.support.values()) {
            *slot = v;
        }
        Ok(())
    })
}

/// Probability of every support point at true difference `theta_diff`,
/// in support order.
///
/// # Safety
/// `design` must be a live handle and `pmf` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn diffprop_pmf(
    design: *const DiffpropDesign,
    theta_diff: f64,
    pmf: *mut f64,
    len: usize,
) -> DiffpropStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        if pmf.is_null() {
            return Err(null("pmf"));
        }
        if len != d.support.len() {
            return Err((
                DiffpropStatus::BufferSize,
                format!("buffer holds {len} values, support has {}", d.support.len()),
            ));
        }
        let dist = lib(MixtureDistribution::new(
            d.design,
            theta_diff,
            QuadratureSpec::default(),
        ))?;
        let values = lib(dist.pmf_all(&d.support))?;
        std::slice::from_raw_parts_mut(pmf, len).copy_from_slice(&values);
        Ok(())
    })
}

/// Exact interval for observed difference `u` with default tolerances.
///
/// # Safety
/// `design` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diffprop_exact_interval(
    design: *const DiffpropDesign,
    u: f64,
    gamma: f64,
    out: *mut DiffpropInterval,
) -> DiffpropStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let level = lib(ConfidenceLevel::new(gamma))?;
        let iv = lib(exact_interval(
            d.design,
            u,
            level,
            &QuadratureSpec::default(),
            &RootSpec::default(),
        ))?;
        *out = to_c(&iv);
        Ok(())
    })
}

/// Classical interval for counts `(x1, x2)`; `method` is a tag such as
/// `"k1"` or `"k5cc"`.
///
/// # Safety
/// `design` must be a live handle, `method` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diffprop_classical_interval(
    design: *const DiffpropDesign,
    x1: u32,
    x2: u32,
    gamma: f64,
    method: *const c_char,
    truncated: bool,
    out: *mut DiffpropInterval,
) -> DiffpropStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let method = method_arg(method)?;
        let level = lib(ConfidenceLevel::new(gamma))?;
        let counts = lib(Counts::new(x1, x2, d.design))?;
        let iv = lib(classical_interval(&counts, level, method))?;
        *out = to_c(&if truncated { truncate(iv) } else { iv });
        Ok(())
    })
}

/// Coverage over the grid `-1, -1 + step, …, 1`; release the result with
/// [`diffprop_curve_free`].
///
/// # Safety
/// `design` must be a live handle, `method` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diffprop_coverage_curve(
    design: *const DiffpropDesign,
    method: *const c_char,
    gamma: f64,
    step: f64,
    truncated: bool,
    out: *mut *mut DiffpropCurve,
) -> DiffpropStatus {
    guard(|| {
        let d = design.as_ref().ok_or_else(|| null("design"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let method = method_arg(method)?;
        let level = lib(ConfidenceLevel::new(gamma))?;
        let curve = lib(coverage_curve(
            d.design,
            level,
            method,
            step,
            truncated,
            &QuadratureSpec::default(),
            &RootSpec::default(),
        ))?;
        *out = Box::into_raw(Box::new(DiffpropCurve { curve }));
        Ok(())
    })
}

/// Number of grid points; 0 for a null handle.
///
/// # Safety
/// `curve` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn diffprop_curve_len(curve: *const DiffpropCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.curve.points.len())
}

/// # Safety
/// `curve` must be a live handle; `theta_diff` and `coverage` writable.
#[no_mangle]
pub unsafe extern "C" fn diffprop_curve_point(
    curve: *const DiffpropCurve,
    index: usize,
    theta_diff: *mut f64,
    coverage: *mut f64,
) -> DiffpropStatus {
    guard(|| {
        let c = curve.as_ref().ok_or_else(|| null("curve"))?;
        let theta_diff = theta_diff.as_mut().ok_or_else(|| null("theta_diff"))?;
        let coverage = coverage.as_mut().ok_or_else(|| null("coverage"))?;
        let p = c.curve.points.get(index).ok_or_else(|| {
            (
                DiffpropStatus::Domain,
                format!(
                    "index {index} out of range for {} points",
                    c.curve.points.len()
                ),
            )
        })?;
        *theta_diff = p.theta_diff;
        *coverage = p.coverage;
        Ok(())
    })
}

/// # Safety
/// `curve` must be null or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn diffprop_curve_free(curve: *mut DiffpropCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Variance of the observed difference for `n_total` trials with fraction
/// `f` in the first group.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn diffprop_mixture_variance(
    n_total: u32,
    f: f64,
    theta_diff: f64,
    out: *mut f64,
) -> DiffpropStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lib(mixture_variance(n_total, f, theta_diff))?;
        Ok(())
    })
}
