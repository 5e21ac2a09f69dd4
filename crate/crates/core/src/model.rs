//! The model for the observed difference `ϑ̂ = ξ₁/n₁ − ξ₂/n₂` indexed by the
//! true difference `ϑ` alone.
//!
//! For a given `ϑ` the nuisance success probability `θ₁` ranges over
//! `(a(ϑ), b(ϑ)) = (max{0, ϑ}, min{1, 1 + ϑ})` and `θ₂ = θ₁ − ϑ`. The law of
//! `ϑ̂` is the average over that range of the product-binomial law, which is
//! what [`MixtureDistribution`] integrates.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{fuzzed_floor, LnFactorials};
pub use crate::quadrature::QuadratureSpec;
use crate::quadrature::{integrate, integrate_vec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Design {
    n1: u32,
    n2: u32,
}

impl Design {
    pub fn new(n1: u32, n2: u32) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::domain(format!(
                "sample sizes must be positive, got n1={n1}, n2={n2}"
            )));
        }
        Ok(Self { n1, n2 })
    }

    pub fn n1(&self) -> u32 {
        self.n1
    }

    pub fn n2(&self) -> u32 {
        self.n2
    }

    /// Common denominator `n₁n₂` of every support value.
    pub fn denominator(&self) -> i64 {
        self.n1 as i64 * self.n2 as i64
    }

    /// Observed difference for counts `(k₁, k₂)`.
    pub fn difference(&self, k1: u32, k2: u32) -> f64 {
        self.numerator(k1, k2) as f64 / self.denominator() as f64
    }

    pub fn numerator(&self, k1: u32, k2: u32) -> i64 {
        k1 as i64 * self.n2 as i64 - k2 as i64 * self.n1 as i64
    }

    /// Swaps the roles of the two groups.
    pub fn swapped(&self) -> Self {
        Self {
            n1: self.n2,
            n2: self.n1,
        }
    }
}

/// One attainable value `d / (n₁n₂)` of the observed difference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportPoint {
    pub numerator: i64,
    pub denominator: i64,
    pub value: f64,
    /// Lattice pairs `(k₁, k₂)` with `k₁n₂ − k₂n₁ = numerator`.
    pub witnesses: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffSupport {
    pub design: Design,
    pub points: Vec<SupportPoint>,
}

impl DiffSupport {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.value)
    }

    /// Support point whose value is within `tol` of `u`.
    pub fn find(&self, u: f64, tol: f64) -> Option<&SupportPoint> {
        let p = self.nearest(u)?;
        ((p.value - u).abs() <= tol).then_some(p)
    }

    /// Support point closest to `u` (ties resolved toward the smaller value).
    pub fn nearest(&self, u: f64) -> Option<&SupportPoint> {
        let idx = self.points.partition_point(|p| p.value < u);
        let right = self.points.get(idx);
        let left = idx.checked_sub(1).and_then(|i| self.points.get(i));
        match (left, right) {
            (Some(l), Some(r)) => Some(if u - l.value <= r.value - u { l } else { r }),
            (l, r) => l.or(r),
        }
    }

    /// Position of the point with the given numerator.
    pub fn index_of(&self, numerator: i64) -> Option<usize> {
        self.points
            .binary_search_by_key(&numerator, |p| p.numerator)
            .ok()
    }
}

/// Scans all `(n₁+1)(n₂+1)` lattice pairs and groups them by exact numerator.
pub fn enumerate_support(design: Design) -> DiffSupport {
    let mut groups: BTreeMap<i64, Vec<(u32, u32)>> = BTreeMap::new();
    for k1 in 0..=design.n1 {
        for k2 in 0..=design.n2 {
            groups
                .entry(design.numerator(k1, k2))
                .or_default()
                .push((k1, k2));
        }
    }
    let denominator = design.denominator();
    let points = groups
        .into_iter()
        .map(|(numerator, witnesses)| SupportPoint {
            numerator,
            denominator,
            value: numerator as f64 / denominator as f64,
            witnesses,
        })
        .collect();
    DiffSupport { design, points }
}

/// Law of `ϑ̂` at a fixed true difference `ϑ`.
#[derive(Debug, Clone)]
pub struct MixtureDistribution {
    design: Design,
    theta_diff: f64,
    quad: QuadratureSpec,
    ln_fact: LnFactorials,
}

impl MixtureDistribution {
    pub fn new(design: Design, theta_diff: f64, quad: QuadratureSpec) -> Result<Self> {
        if !(-1.0..=1.0).contains(&theta_diff) {
            return Err(Error::domain(format!(
                "theta_diff {theta_diff} is outside [-1, 1]"
            )));
        }
        quad.validate()?;
        Ok(Self {
            design,
            theta_diff,
            quad,
            ln_fact: LnFactorials::new(design.n1.max(design.n2) as u64),
        })
    }

    pub fn design(&self) -> Design {
        self.design
    }

    pub fn theta_diff(&self) -> f64 {
        self.theta_diff
    }

    pub fn quad(&self) -> &QuadratureSpec {
        &self.quad
    }

    /// `(a(ϑ), b(ϑ))`, the admissible range of `θ₁`.
    pub fn nuisance_range(&self) -> (f64, f64) {
        (self.theta_diff.max(0.0), (1.0 + self.theta_diff).min(1.0))
    }

    /// `L(ϑ) = b(ϑ) − a(ϑ) = 1 − |ϑ|`.
    pub fn nuisance_length(&self) -> f64 {
        let (a, b) = self.nuisance_range();
        b - a
    }

    fn ensure_nondegenerate(&self) -> Result<()> {
        if self.theta_diff.abs() >= 1.0 {
            return Err(Error::DegenerateModel(self.theta_diff));
        }
        Ok(())
    }

    /// `P_ϑ{ϑ̂ ≤ u}`, or `P_ϑ{ϑ̂ < u}` when `strict`.
    ///
    /// The integrand is `Σ_k P(ξ₁ ≤ cut_k) P(ξ₂ = k)`; see [`tail_cuts`] for
    /// how the cuts are chosen, including for `u` off the lattice.
    pub fn cdf(&self, u: f64, strict: bool) -> Result<f64> {
        self.ensure_nondegenerate()?;
        let n1 = self.design.n1 as usize;
        let n2 = self.design.n2 as usize;
        // Last ξ₁ counted for each ξ₂ = k; independent of θ₁.
        let cut = tail_cuts(self.design, u, strict);
        if cut.iter().all(|&j| j < 0) {
            return Ok(0.0);
        }
        if cut.iter().all(|&j| j >= n1 as i64) {
            return Ok(1.0);
        }

        let (a, b) = self.nuisance_range();
        let theta_diff = self.theta_diff;
        let ln_fact = &self.ln_fact;
        let mut row1 = vec![0.0; n1 + 1];
        let mut row2 = vec![0.0; n2 + 1];
        let integrand = |theta1: f64| {
            ln_fact.pmf_row(n1, theta1, &mut row1);
            ln_fact.pmf_row(n2, theta1 - theta_diff, &mut row2);
            let mut acc = 0.0;
            for i in 1..=n1 {
                row1[i] += row1[i - 1];
            }
            for (k, &w) in row2.iter().enumerate() {
                let j = cut[k];
                if j < 0 || w == 0.0 {
                    continue;
                }
                let tail = if j as usize >= n1 {
                    1.0
                } else {
                    row1[j as usize]
                };
                acc += tail.min(1.0) * w;
            }
            acc
        };
        let r = integrate(integrand, a, b, &self.quad)?;
        Ok((r.value / (b - a)).clamp(0.0, 1.0))
    }

    /// `P_ϑ{ϑ̂ = u}` for a support point, as a difference of the two CDFs.
    pub fn pmf(&self, point: &SupportPoint) -> Result<f64> {
        self.check_point(point)?;
        let hi = self.cdf(point.value, false)?;
        let lo = self.cdf(point.value, true)?;
        Ok((hi - lo).max(0.0))
    }

    /// `P_ϑ{ϑ̂ = u}` for a support point by integrating the witness sum
    /// `Σ Q(ξ₁ = k₁) Q(ξ₂ = k₂)` directly.
    pub fn pmf_direct(&self, point: &SupportPoint) -> Result<f64> {
        self.check_point(point)?;
        self.ensure_nondegenerate()?;
        let (a, b) = self.nuisance_range();
        let n1 = self.design.n1 as usize;
        let n2 = self.design.n2 as usize;
        let mut row1 = vec![0.0; n1 + 1];
        let mut row2 = vec![0.0; n2 + 1];
        let integrand = |theta1: f64| {
            self.ln_fact.pmf_row(n1, theta1, &mut row1);
            self.ln_fact
                .pmf_row(n2, theta1 - self.theta_diff, &mut row2);
            point
                .witnesses
                .iter()
                .map(|&(k1, k2)| row1[k1 as usize] * row2[k2 as usize])
                .sum::<f64>()
        };
        let r = integrate(integrand, a, b, &self.quad)?;
        Ok(r.value / (b - a))
    }

    /// Probabilities of every support point, in support order, from a single
    /// vector-valued integration of the witness sums.
    pub fn pmf_all(&self, support: &DiffSupport) -> Result<Vec<f64>> {
        if support.design != self.design {
            return Err(Error::domain("support belongs to a different design"));
        }
        self.ensure_nondegenerate()?;
        let (a, b) = self.nuisance_range();
        let n1 = self.design.n1 as usize;
        let n2 = self.design.n2 as usize;
        let mut slot = vec![0usize; (n1 + 1) * (n2 + 1)];
        for (idx, p) in support.points.iter().enumerate() {
            for &(k1, k2) in &p.witnesses {
                slot[k1 as usize * (n2 + 1) + k2 as usize] = idx;
            }
        }
        let mut row1 = vec![0.0; n1 + 1];
        let mut row2 = vec![0.0; n2 + 1];
        let integrand = |theta1: f64, out: &mut [f64]| {
            self.ln_fact.pmf_row(n1, theta1, &mut row1);
            self.ln_fact
                .pmf_row(n2, theta1 - self.theta_diff, &mut row2);
            out.fill(0.0);
            for (k1, &p1) in row1.iter().enumerate() {
                if p1 == 0.0 {
                    continue;
                }
                let base = k1 * (n2 + 1);
                for (k2, &p2) in row2.iter().enumerate() {
                    out[slot[base + k2]] += p1 * p2;
                }
            }
        };
        let r = integrate_vec(integrand, a, b, support.len(), &self.quad)?;
        let len = b - a;
        Ok(r.values.into_iter().map(|v| (v / len).max(0.0)).collect())
    }

    fn check_point(&self, point: &SupportPoint) -> Result<()> {
        if point.denominator != self.design.denominator() || point.witnesses.is_empty() {
            return Err(Error::domain(format!(
                "{} is not a support point of design ({}, {})",
                point.value, self.design.n1, self.design.n2
            )));
        }
        Ok(())
    }
}

/// For each `ξ₂ = k`, the largest `ξ₁` counted by `P{ϑ̂ ≤ u}` (or
/// `P{ϑ̂ < u}` when `strict`).
///
/// On the lattice (`u·n₁n₂` integral) the cut is exact integer arithmetic:
/// `ξ₁n₂ ≤ d + kn₁`, strictly `<` for the strict form. Off the lattice the
/// strict and non-strict events coincide in principle; the cut then follows
/// the lower-tail convention `floor(n₁(u + k/n₂) − lq + 1e-7)` with `lq = 1`
/// for the strict form, which is how decimal-rounded observations are
/// conventionally fed to this construction.
fn tail_cuts(design: Design, u: f64, strict: bool) -> Vec<i64> {
    let n1 = design.n1 as i64;
    let n2 = design.n2 as i64;
    let scaled = u * design.denominator() as f64;
    let d = scaled.round();
    if (scaled - d).abs() <= ON_GRID_TOL && d.abs() <= i64::MAX as f64 / 4.0 {
        let d = d as i64;
        return (0..=n2)
            .map(|k| {
                let rhs = d + k * n1;
                if strict {
                    // largest ξ₁ with ξ₁·n₂ < rhs
                    (rhs - 1).div_euclid(n2)
                } else {
                    rhs.div_euclid(n2)
                }
            })
            .collect();
    }
    let lq = if strict { 1.0 } else { 0.0 };
    (0..=n2)
        .map(|k| fuzzed_floor(n1 as f64 * (u + k as f64 / n2 as f64) - lq))
        .collect()
}

/// Distance, in units of `1/(n₁n₂)`, within which `u` is treated as a
/// lattice point.
const ON_GRID_TOL: f64 = 1e-6;

/// Convenience wrapper for [`MixtureDistribution::cdf`].
pub fn mixture_cdf(dist: &MixtureDistribution, u: f64, strict: bool) -> Result<f64> {
    dist.cdf(u, strict)
}

/// Convenience wrapper for [`MixtureDistribution::pmf`].
pub fn mixture_pmf(dist: &MixtureDistribution, point: &SupportPoint) -> Result<f64> {
    dist.pmf(point)
}
