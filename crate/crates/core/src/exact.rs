//! The exact interval: endpoints solve the two tail equations of the mixture
//! law of the observed difference.
//!
//! For an observed `u`:
//!
//! * the lower endpoint is the `ϑ` with `P_ϑ{ϑ̂ < u} = (1 + γ)/2` (and `−1`
//!   when `u = −1`);
//! * the upper endpoint is the `ϑ` with `P_ϑ{ϑ̂ ≤ u} = (1 − γ)/2` (and `+1`
//!   when `u = 1`).
//!
//! Both tail probabilities are non-increasing in `ϑ`, so each endpoint is found
//! by bisection. Only `u ≥ 0` is ever solved; negative `u` are answered by
//! reflecting the interval at `−u`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interval::{IntervalEstimate, MethodId};
use crate::kernel::ConfidenceLevel;
use crate::model::{Design, DiffSupport, MixtureDistribution, QuadratureSpec};
use crate::root::{solve_decreasing, RootSpec};

pub fn exact_interval(
    design: Design,
    u: f64,
    level: ConfidenceLevel,
    quad: &QuadratureSpec,
    root: &RootSpec,
) -> Result<IntervalEstimate> {
    if !(-1.0..=1.0).contains(&u) {
        return Err(Error::domain(format!(
            "observed difference {u} is outside [-1, 1]"
        )));
    }
    quad.validate()?;
    root.validate()?;
    if u < 0.0 {
        return Ok(exact_interval(design, -u, level, quad, root)?.reflected());
    }

    let tail = |theta: f64, strict: bool| -> Result<f64> {
        MixtureDistribution::new(design, theta, *quad)?.cdf(u, strict)
    };
    let lo_edge = -1.0 + root.edge_eps;
    let hi_edge = 1.0 - root.edge_eps;

    let upper = if u == 1.0 {
        1.0
    } else {
        solve_bracketed(
            |t| tail(t, false),
            (u, hi_edge),
            (lo_edge, hi_edge),
            level.lower_tail_order(),
            root,
        )?
    };
    let lower = if u == 0.0 {
        // The law at −ϑ is the reflection of the law at ϑ.
        -upper
    } else {
        solve_bracketed(
            |t| tail(t, true),
            (lo_edge, u.min(hi_edge)),
            (lo_edge, hi_edge),
            level.upper_tail_order(),
            root,
        )?
    };
    Ok(IntervalEstimate::new(lower, upper, level, MethodId::M))
}

/// Tries the natural bracket first and widens to the whole open range only
/// when it does not straddle the target.
fn solve_bracketed<F>(
    mut f: F,
    natural: (f64, f64),
    full: (f64, f64),
    target: f64,
    root: &RootSpec,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if natural.0 < natural.1 {
        match solve_decreasing(&mut f, natural.0, natural.1, target, root) {
            Err(Error::NoBracket { .. }) => {}
            other => return other,
        }
    }
    solve_decreasing(f, full.0, full.1, target, root)
}

/// Exact intervals for every support point, in support order.
///
/// Non-negative points are solved in parallel; negative points reuse their
/// mirror image.
pub fn exact_intervals(
    support: &DiffSupport,
    level: ConfidenceLevel,
    quad: &QuadratureSpec,
    root: &RootSpec,
) -> Result<Vec<IntervalEstimate>> {
    let design = support.design;
    let nonneg: Vec<(i64, f64)> = support
        .points
        .iter()
        .filter(|p| p.numerator >= 0)
        .map(|p| (p.numerator, p.value))
        .collect();
    let solved: Vec<IntervalEstimate> = nonneg
        .par_iter()
        .map(|&(_, u)| exact_interval(design, u, level, quad, root))
        .collect::<Result<_>>()?;

    support
        .points
        .iter()
        .map(|p| {
            let key = p.numerator.abs();
            let pos = nonneg
                .binary_search_by_key(&key, |&(n, _)| n)
                .map_err(|_| Error::domain("support is not symmetric"))?;
            let iv = solved[pos];
            Ok(if p.numerator < 0 { iv.reflected() } else { iv })
        })
        .collect()
}
