//! Bracketing bisection for monotone tail equations.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootSpec {
    /// Bracket width at which bisection stops.
    pub x_tol: f64,
    /// Residual small enough to accept a midpoint early.
    pub f_tol: f64,
    pub max_iter: usize,
    /// Distance kept from the degenerate endpoints `ϑ = ±1`.
    pub edge_eps: f64,
}

impl Default for RootSpec {
    fn default() -> Self {
        Self {
            x_tol: 1e-8,
            f_tol: 1e-9,
            max_iter: 200,
            edge_eps: 1e-9,
        }
    }
}

impl RootSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_tol > 0.0 && self.f_tol > 0.0 && self.max_iter > 0 && self.edge_eps > 0.0) {
            return Err(Error::domain("root-finding tolerances must be positive"));
        }
        if self.edge_eps >= 0.5 {
            return Err(Error::domain("edge_eps must be below 0.5"));
        }
        Ok(())
    }
}

/// Solves `f(x) = target` on `[lo, hi]` for a non-increasing `f`.
///
/// Requires `f(lo) ≥ target ≥ f(hi)`; otherwise returns [`Error::NoBracket`].
pub fn solve_decreasing<F>(mut f: F, lo: f64, hi: f64, target: f64, spec: &RootSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut lo = lo;
    let mut hi = hi;
    let r_lo = f(lo)? - target;
    let r_hi = f(hi)? - target;
    if r_lo < 0.0 || r_hi > 0.0 {
        return Err(Error::NoBracket {
            lo,
            hi,
            f_lo: r_lo,
            f_hi: r_hi,
        });
    }
    if r_lo == 0.0 {
        return Ok(lo);
    }
    if r_hi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..spec.max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= spec.x_tol {
            return Ok(mid);
        }
        let r = f(mid)? - target;
        if r.abs() <= spec.f_tol {
            return Ok(mid);
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
