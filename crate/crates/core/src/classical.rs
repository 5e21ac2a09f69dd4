//! Normal-approximation intervals computed from the two success counts.
//!
//! Endpoints are returned untruncated, so they may leave `[-1, 1]`; use
//! [`truncate`](crate::interval::truncate) to clamp.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{Diagnostic, IntervalEstimate, MethodId};
use crate::kernel::ConfidenceLevel;
use crate::model::Design;

/// Observed successes `(ξ₁, ξ₂)` in a design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Counts {
    x1: u32,
    x2: u32,
    design: Design,
}

impl Counts {
    pub fn new(x1: u32, x2: u32, design: Design) -> Result<Self> {
        if x1 > design.n1() || x2 > design.n2() {
            return Err(Error::domain(format!(
                "counts ({x1}, {x2}) exceed sample sizes ({}, {})",
                design.n1(),
                design.n2()
            )));
        }
        Ok(Self { x1, x2, design })
    }

    pub fn x1(&self) -> u32 {
        self.x1
    }

    pub fn x2(&self) -> u32 {
        self.x2
    }

    pub fn design(&self) -> Design {
        self.design
    }

    pub fn p1(&self) -> f64 {
        self.x1 as f64 / self.design.n1() as f64
    }

    pub fn p2(&self) -> f64 {
        self.x2 as f64 / self.design.n2() as f64
    }

    /// Observed difference `ξ₁/n₁ − ξ₂/n₂`.
    pub fn difference(&self) -> f64 {
        self.p1() - self.p2()
    }

    /// Same experiment with the groups relabelled.
    pub fn swapped(&self) -> Self {
        Self {
            x1: self.x2,
            x2: self.x1,
            design: self.design.swapped(),
        }
    }

    fn sizes(&self) -> (f64, f64) {
        (self.design.n1() as f64, self.design.n2() as f64)
    }
}

fn symmetric(
    center: f64,
    radius: f64,
    level: ConfidenceLevel,
    method: MethodId,
) -> IntervalEstimate {
    IntervalEstimate::new(center - radius, center + radius, level, method)
}

/// Pooled-variance interval.
pub fn ci_k1(c: &Counts, level: ConfidenceLevel) -> IntervalEstimate {
    let (n1, n2) = c.sizes();
    let pooled = (c.x1 + c.x2) as f64 / (n1 + n2);
    let radius = level.z() * (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    symmetric(c.difference(), radius, level, MethodId::K1)
}

/// Wald interval.
pub fn ci_k2(c: &Counts, level: ConfidenceLevel) -> IntervalEstimate {
    let (n1, n2) = c.sizes();
    let (p1, p2) = (c.p1(), c.p2());
    let radius = level.z() * (p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2).sqrt();
    symmetric(c.difference(), radius, level, MethodId::K2)
}

fn mee_anbar_variance(c: &Counts) -> f64 {
    let (n1, n2) = c.sizes();
    let psi = 0.5 * (c.p1() + c.p2());
    let half = 0.5 * c.difference();
    (psi + half) * (1.0 - psi - half) / n1 + (psi - half) * (1.0 - psi + half) / n2
}

/// The Wald interval written in terms of the mean proportion and the
/// difference; algebraically identical to [`ci_k2`].
pub fn ci_mee_anbar(c: &Counts, level: ConfidenceLevel) -> IntervalEstimate {
    let radius = level.z() * mee_anbar_variance(c).max(0.0).sqrt();
    symmetric(c.difference(), radius, level, MethodId::MeeAnbar)
}

/// Mee–Anbar variance inflated by `(n₁+n₂)/(n₁+n₂−1)`.
pub fn ci_k2_prime(c: &Counts, level: ConfidenceLevel) -> IntervalEstimate {
    let (n1, n2) = c.sizes();
    let inflation = (n1 + n2) / (n1 + n2 - 1.0);
    let radius = level.z() * (inflation * mee_anbar_variance(c).max(0.0)).sqrt();
    symmetric(c.difference(), radius, level, MethodId::K2p)
}

/// Continuity-corrected Wald interval; the correction `(1/n₁ + 1/n₂)/2` sits
/// under the square root.
pub fn ci_k3(c: &Counts, level: ConfidenceLevel) -> IntervalEstimate {
    let (n1, n2) = c.sizes();
    let (x1, x2) = (c.x1 as f64, c.x2 as f64);
    let var =
        x1 * (n1 - x1) / n1.powi(3) + x2 * (n2 - x2) / n2.powi(3) + 0.5 * (1.0 / n1 + 1.0 / n2);
    symmetric(c.difference(), level.z() * var.sqrt(), level, MethodId::K3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BealVariant {
    Haldane,
    JeffreysPerks,
}

struct Beal {
    psi: f64,
    u_b: f64,
    nu: f64,
}

impl Beal {
    fn new(c: &Counts, variant: BealVariant) -> Self {
        let (n1, n2) = c.sizes();
        let psi = match variant {
            BealVariant::Haldane => 0.5 * (c.p1() + c.p2()),
            BealVariant::JeffreysPerks => {
                0.5 * ((c.x1 as f64 + 0.5) / (n1 + 1.0) + (c.x2 as f64 + 0.5) / (n2 + 1.0))
            }
        };
        Self {
            psi,
            u_b: 0.25 * (1.0 / n1 + 1.0 / n2),
            nu: 0.25 * (1.0 / n1 - 1.0 / n2),
        }
    }
}

/// Beal's shrunken centre `ϑ* = (ϑ̂ + z²ν(1−2ψ̃)) / (1 + z²u)`.
pub fn beal_adjusted_center(c: &Counts, level: ConfidenceLevel, variant: BealVariant) -> f64 {
    let Beal { psi, u_b, nu } = Beal::new(c, variant);
    let z2 = level.z() * level.z();
    (c.difference() + z2 * nu * (1.0 - 2.0 * psi)) / (1.0 + z2 * u_b)
}

/// Beal's interval with Haldane or Jeffreys–Perks `ψ̃`.
///
/// The half-width is Beal's `w`. The interval is centred at the observed
/// difference `ϑ̂`, which is the centring behind the published reference
/// values; the shrunken centre is available from [`beal_adjusted_center`].
pub fn ci_k4(c: &Counts, level: ConfidenceLevel, variant: BealVariant) -> IntervalEstimate {
    let Beal { psi, u_b, nu } = Beal::new(c, variant);
    let z = level.z();
    let z2 = z * z;
    let d = c.difference();
    let skew = 1.0 - 2.0 * psi;
    let radicand = u_b * (4.0 * psi * (1.0 - psi) - d * d)
        + 2.0 * nu * skew * d
        + 4.0 * z2 * u_b * u_b * (1.0 - psi) * psi
        + z2 * nu * nu * skew * skew;
    let (radicand, diag) = if radicand < 0.0 {
        (0.0, Some(Diagnostic::RadicandClipped))
    } else {
        (radicand, None)
    };
    let w = z / (1.0 + z2 * u_b) * radicand.sqrt();
    let method = match variant {
        BealVariant::Haldane => MethodId::K4Haldane,
        BealVariant::JeffreysPerks => MethodId::K4JeffreysPerks,
    };
    symmetric(d, w, level, method).with_diagnostic(diag)
}

/// Roots of `(p − θ)² = z²θ(1−θ)/n`, ascending.
fn score_roots(p: f64, n: f64, z: f64) -> (f64, f64) {
    let z2n = z * z / n;
    let a = 1.0 + z2n;
    let b = 2.0 * p + z2n;
    let disc = (z2n * (4.0 * p * (1.0 - p) + z2n)).max(0.0);
    ((b - disc.sqrt()) / (2.0 * a), (b + disc.sqrt()) / (2.0 * a))
}

/// Single-proportion score bounds `(l, u)` for `x` successes in `n` trials,
/// optionally with the `1/(2n)` continuity correction.
pub fn score_bounds(x: u32, n: u32, z: f64, corrected: bool) -> (f64, f64) {
    let nf = n as f64;
    let p = x as f64 / nf;
    let (mut lo, mut hi) = if corrected {
        let shift = 0.5 / nf;
        (
            score_roots(p - shift, nf, z).0,
            score_roots(p + shift, nf, z).1,
        )
    } else {
        score_roots(p, nf, z)
    };
    if x == 0 {
        lo = 0.0;
    }
    if x == n {
        hi = 1.0;
    }
    (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0))
}

/// Newcombe's hybrid score interval built from per-group score bounds.
pub fn ci_k5(c: &Counts, level: ConfidenceLevel, corrected: bool) -> IntervalEstimate {
    let (n1, n2) = c.sizes();
    let z = level.z();
    let (l1, u1) = score_bounds(c.x1, c.design.n1(), z, corrected);
    let (l2, u2) = score_bounds(c.x2, c.design.n2(), z, corrected);
    let delta_12 = z * (l1 * (1.0 - l1) / n1 + u2 * (1.0 - u2) / n2).sqrt();
    let delta_21 = z * (u1 * (1.0 - u1) / n1 + l2 * (1.0 - l2) / n2).sqrt();
    let d = c.difference();
    let method = if corrected {
        MethodId::K5Fleiss
    } else {
        MethodId::K5Wilson
    };
    IntervalEstimate::new(d - delta_12, d + delta_21, level, method)
}

/// Coefficients of the Edgeworth correction for the studentized difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edgeworth {
    pub n: f64,
    pub sigma: f64,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
}

impl Edgeworth {
    pub fn new(c: &Counts) -> Result<Self> {
        let (n1, n2) = c.sizes();
        let (x1, x2) = (c.x1 as f64, c.x2 as f64);
        let n = n1 + n2;
        let sigma = n.sqrt() * (x1 * (n1 - x1) / n1.powi(3) + x2 * (n2 - x2) / n2.powi(3)).sqrt();
        if sigma <= 0.0 {
            return Err(Error::DegenerateCounts { x1: c.x1, x2: c.x2 });
        }
        let delta = (n / n1).powi(2) * x1 * (n1 - x1) * (n1 - 2.0 * x1) / n1.powi(3)
            - (n / n2).powi(2) * x2 * (n2 - x2) * (n2 - 2.0 * x2) / n2.powi(3);
        let a = delta / (6.0 * sigma * sigma);
        let b = n * (n1 - 2.0 * x1) / (2.0 * n1 * n1) - a;
        Ok(Self {
            n,
            sigma,
            a,
            b,
            delta,
        })
    }

    /// `Q̂(t) = (â + b̂t²) / σ̂`.
    pub fn q(&self, t: f64) -> f64 {
        (self.a + self.b * t * t) / self.sigma
    }

    /// Limit of [`Self::g_inv`] as `b̂σ̂ → 0`.
    pub fn g_inv_limit(&self, u: f64) -> f64 {
        u - self.a * self.sigma / self.n.sqrt()
    }

    /// Inverse of the cubic transform, with the real cube root.
    pub fn g_inv(&self, u: f64) -> f64 {
        let bs = self.b * self.sigma;
        let rn = self.n.sqrt();
        rn / bs * ((1.0 + 3.0 * bs * (u / rn - self.a * self.sigma / self.n)).cbrt() - 1.0)
    }
}

/// `|b̂σ̂|` below which the cubic transform is replaced by its limit.
pub const CUBIC_LIMIT_THRESHOLD: f64 = 1e-8;

/// First Edgeworth interval.
pub fn ci_k6(c: &Counts, level: ConfidenceLevel) -> Result<IntervalEstimate> {
    let e = Edgeworth::new(c)?;
    let z = level.z();
    let rn = e.n.sqrt();
    let scale = e.sigma / rn;
    let d = c.difference();
    let q = e.q(z);
    Ok(IntervalEstimate::new(
        d - scale * (z - q / rn),
        d + scale * (z + q / rn),
        level,
        MethodId::K6,
    ))
}

/// Second Edgeworth interval, through the inverse cubic transform.
pub fn ci_k7(c: &Counts, level: ConfidenceLevel) -> Result<IntervalEstimate> {
    let e = Edgeworth::new(c)?;
    let z = level.z();
    let scale = e.sigma / e.n.sqrt();
    let d = c.difference();
    let (g_hi, g_lo, diag) = if (e.b * e.sigma).abs() < CUBIC_LIMIT_THRESHOLD {
        (
            e.g_inv_limit(z),
            e.g_inv_limit(-z),
            Some(Diagnostic::CubicLimit),
        )
    } else {
        (e.g_inv(z), e.g_inv(-z), None)
    };
    Ok(
        IntervalEstimate::new(d - scale * g_hi, d - scale * g_lo, level, MethodId::K7)
            .with_diagnostic(diag),
    )
}

/// Dispatches to the classical method named by `method`.
pub fn classical_interval(
    c: &Counts,
    level: ConfidenceLevel,
    method: MethodId,
) -> Result<IntervalEstimate> {
    Ok(match method {
        MethodId::M => {
            return Err(Error::Method(
                "the exact method depends on the observed difference only; use exact_interval"
                    .into(),
            ))
        }
        MethodId::K1 => ci_k1(c, level),
        MethodId::K2 => ci_k2(c, level),
        MethodId::MeeAnbar => ci_mee_anbar(c, level),
        MethodId::K2p => ci_k2_prime(c, level),
        MethodId::K3 => ci_k3(c, level),
        MethodId::K4Haldane => ci_k4(c, level, BealVariant::Haldane),
        MethodId::K4JeffreysPerks => ci_k4(c, level, BealVariant::JeffreysPerks),
        MethodId::K5Wilson => ci_k5(c, level, false),
        MethodId::K5Fleiss => ci_k5(c, level, true),
        MethodId::K6 => ci_k6(c, level)?,
        MethodId::K7 => ci_k7(c, level)?,
    })
}
