//! Exact coverage probabilities, computed by integration rather than
//! simulation.
//!
//! The exact method is scored with open membership `ϑ_L(u) < ϑ < ϑ_U(u)`
//! summed against the mixture law of `ϑ̂`. Classical methods depend on both
//! counts, so their coverage averages the product binomial law over the
//! nuisance `θ₁` with closed membership.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::classical::{classical_interval, Counts};
use crate::error::{Error, Result};
use crate::exact::exact_intervals;
use crate::interval::{truncate, MethodId};
use crate::kernel::{ConfidenceLevel, LnFactorials};
use crate::model::{enumerate_support, Design, DiffSupport, MixtureDistribution};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::root::RootSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoveragePoint {
    pub theta_diff: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageCurve {
    pub method: MethodId,
    pub design: Design,
    pub gamma: f64,
    pub truncated: bool,
    pub points: Vec<CoveragePoint>,
}

impl CoverageCurve {
    /// Smallest coverage on the grid, first occurrence.
    pub fn min(&self) -> Option<CoveragePoint> {
        self.points
            .iter()
            .copied()
            .reduce(|a, b| if b.coverage < a.coverage { b } else { a })
    }

    /// Coverage at the grid point closest to `theta_diff`.
    pub fn at(&self, theta_diff: f64) -> Option<f64> {
        self.points
            .iter()
            .min_by(|a, b| {
                (a.theta_diff - theta_diff)
                    .abs()
                    .total_cmp(&(b.theta_diff - theta_diff).abs())
            })
            .map(|p| p.coverage)
    }

    /// `theta_diff,coverage` rows with shortest round-trip decimals.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta_diff,coverage\n");
        for p in &self.points {
            let _ = writeln!(s, "{},{}", p.theta_diff, p.coverage);
        }
        s
    }
}

/// `−1, −1 + step, …` up to and including `1`, rounded to 12 decimals so
/// that grid values print cleanly.
pub fn theta_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::domain(format!(
            "grid step {step} must be in (0, 0.5]"
        )));
    }
    let count = (2.0 / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=count)
        .map(|i| ((-1.0 + i as f64 * step) * 1e12).round() / 1e12)
        .collect();
    if *grid.last().unwrap() < 1.0 {
        grid.push(1.0);
    }
    Ok(grid)
}

fn check_theta(theta_diff: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&theta_diff) {
        return Err(Error::domain(format!(
            "theta_diff {theta_diff} is outside [-1, 1]"
        )));
    }
    Ok(())
}

/// Coverage evaluator for the exact method with every support interval
/// solved once up front.
#[derive(Debug, Clone)]
pub struct ExactCoverage {
    support: DiffSupport,
    bounds: Vec<(f64, f64)>,
    quad: QuadratureSpec,
}

impl ExactCoverage {
    pub fn new(
        design: Design,
        level: ConfidenceLevel,
        quad: &QuadratureSpec,
        root: &RootSpec,
    ) -> Result<Self> {
        let support = enumerate_support(design);
        let bounds = exact_intervals(&support, level, quad, root)?
            .into_iter()
            .map(|iv| (iv.lower, iv.upper))
            .collect();
        Ok(Self {
            support,
            bounds,
            quad: *quad,
        })
    }

    pub fn support(&self) -> &DiffSupport {
        &self.support
    }

    /// Interval endpoints in support order.
    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// `Σ_u P_ϑ{ϑ̂ = u} · 1[ϑ_L(u) < ϑ < ϑ_U(u)]`; exactly 1 at `ϑ = ±1`.
    pub fn at(&self, theta_diff: f64) -> Result<f64> {
        check_theta(theta_diff)?;
        if theta_diff.abs() == 1.0 {
            return Ok(1.0);
        }
        let dist = MixtureDistribution::new(self.support.design, theta_diff, self.quad)?;
        let pmf = dist.pmf_all(&self.support)?;
        let total = pmf
            .iter()
            .zip(&self.bounds)
            .filter(|(_, &(lo, hi))| lo < theta_diff && theta_diff < hi)
            .map(|(p, _)| p)
            .sum::<f64>();
        Ok(total.min(1.0))
    }
}

/// Coverage evaluator for any interval that depends on the pair of counts.
#[derive(Debug, Clone)]
pub struct ClassicalCoverage {
    design: Design,
    /// Closed intervals indexed by `i₁·(n₂+1) + i₂`.
    table: Vec<(f64, f64)>,
    quad: QuadratureSpec,
    ln_fact: LnFactorials,
}

impl ClassicalCoverage {
    /// Precomputes the method's interval for every pair of counts.
    ///
    /// Count pairs where the Edgeworth variance vanishes get the point
    /// interval `[ϑ̂, ϑ̂]`.
    pub fn new(
        design: Design,
        level: ConfidenceLevel,
        method: MethodId,
        truncated: bool,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        if method.is_exact() {
            return Err(Error::Method(
                "use ExactCoverage for the exact method".into(),
            ));
        }
        let mut table = Vec::with_capacity(((design.n1() + 1) * (design.n2() + 1)) as usize);
        for x1 in 0..=design.n1() {
            for x2 in 0..=design.n2() {
                let counts = Counts::new(x1, x2, design)?;
                let iv = match classical_interval(&counts, level, method) {
                    Ok(iv) => iv,
                    Err(Error::DegenerateCounts { .. }) => {
                        let d = counts.difference();
                        crate::interval::IntervalEstimate::new(d, d, level, method)
                    }
                    Err(e) => return Err(e),
                };
                let iv = if truncated { truncate(iv) } else { iv };
                table.push((iv.lower, iv.upper));
            }
        }
        Self::from_table(design, table, quad)
    }

    /// Uses caller-supplied intervals, indexed by `i₁·(n₂+1) + i₂`.
    pub fn from_table(
        design: Design,
        table: Vec<(f64, f64)>,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        let cells = ((design.n1() + 1) * (design.n2() + 1)) as usize;
        if table.len() != cells {
            return Err(Error::domain(format!(
                "interval table has {} cells, expected {cells}",
                table.len()
            )));
        }
        quad.validate()?;
        Ok(Self {
            design,
            table,
            quad: *quad,
            ln_fact: LnFactorials::new(design.n1().max(design.n2()) as u64),
        })
    }

    fn covers(&self, x1: usize, x2: usize, theta_diff: f64) -> bool {
        let (lo, hi) = self.table[x1 * (self.design.n2() as usize + 1) + x2];
        lo <= theta_diff && theta_diff <= hi
    }

    /// `(1/L) ∫ Σ_{i₁,i₂} Q(i₁) Q(i₂) 1[ϑ ∈ I(i₁,i₂)] dθ₁`; at `ϑ = ±1` the
    /// counts are `(n₁, 0)` or `(0, n₂)` with certainty.
    pub fn at(&self, theta_diff: f64) -> Result<f64> {
        check_theta(theta_diff)?;
        let n1 = self.design.n1() as usize;
        let n2 = self.design.n2() as usize;
        if theta_diff == 1.0 {
            return Ok(if self.covers(n1, 0, 1.0) { 1.0 } else { 0.0 });
        }
        if theta_diff == -1.0 {
            return Ok(if self.covers(0, n2, -1.0) { 1.0 } else { 0.0 });
        }
        let mask: Vec<bool> = (0..=n1)
            .flat_map(|x1| (0..=n2).map(move |x2| (x1, x2)))
            .map(|(x1, x2)| self.covers(x1, x2, theta_diff))
            .collect();
        if mask.iter().all(|&m| m) {
            return Ok(1.0);
        }
        if !mask.iter().any(|&m| m) {
            return Ok(0.0);
        }
        let a = theta_diff.max(0.0);
        let b = (1.0 + theta_diff).min(1.0);
        let mut row1 = vec![0.0; n1 + 1];
        let mut row2 = vec![0.0; n2 + 1];
        let integrand = |theta1: f64| {
            self.ln_fact.pmf_row(n1, theta1, &mut row1);
            self.ln_fact.pmf_row(n2, theta1 - theta_diff, &mut row2);
            let mut acc = 0.0;
            for (x1, &p1) in row1.iter().enumerate() {
                if p1 == 0.0 {
                    continue;
                }
                let cells = &mask[x1 * (n2 + 1)..(x1 + 1) * (n2 + 1)];
                let inner: f64 = cells
                    .iter()
                    .zip(&row2)
                    .filter(|(&m, _)| m)
                    .map(|(_, &p2)| p2)
                    .sum();
                acc += p1 * inner;
            }
            acc
        };
        let r = integrate(integrand, a, b, &self.quad)?;
        Ok((r.value / (b - a)).clamp(0.0, 1.0))
    }
}

/// Coverage of the exact method at a single `ϑ`.
pub fn coverage_exact_method(
    design: Design,
    level: ConfidenceLevel,
    theta_diff: f64,
    quad: &QuadratureSpec,
    root: &RootSpec,
) -> Result<f64> {
    check_theta(theta_diff)?;
    if theta_diff.abs() == 1.0 {
        return Ok(1.0);
    }
    ExactCoverage::new(design, level, quad, root)?.at(theta_diff)
}

/// Coverage of a classical method at a single `ϑ`.
pub fn coverage_classical_method(
    design: Design,
    level: ConfidenceLevel,
    method: MethodId,
    theta_diff: f64,
    truncated: bool,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_theta(theta_diff)?;
    ClassicalCoverage::new(design, level, method, truncated, quad)?.at(theta_diff)
}

/// Coverage over `theta_grid(step)`, evaluated in parallel and returned in
/// grid order. `truncated` only affects classical methods.
pub fn coverage_curve(
    design: Design,
    level: ConfidenceLevel,
    method: MethodId,
    step: f64,
    truncated: bool,
    quad: &QuadratureSpec,
    root: &RootSpec,
) -> Result<CoverageCurve> {
    let grid = theta_grid(step)?;
    let coverage: Vec<f64> = if method.is_exact() {
        let eval = ExactCoverage::new(design, level, quad, root)?;
        grid.par_iter()
            .map(|&t| eval.at(t))
            .collect::<Result<_>>()?
    } else {
        let eval = ClassicalCoverage::new(design, level, method, truncated, quad)?;
        grid.par_iter()
            .map(|&t| eval.at(t))
            .collect::<Result<_>>()?
    };
    Ok(CoverageCurve {
        method,
        design,
        gamma: level.gamma(),
        truncated: truncated && !method.is_exact(),
        points: grid
            .into_iter()
            .zip(coverage)
            .map(|(theta_diff, coverage)| CoveragePoint {
                theta_diff,
                coverage,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_distr::{Binomial, Distribution};

    use super::*;

    fn l95() -> ConfidenceLevel {
        ConfidenceLevel::new(0.95).unwrap()
    }

    fn design(n1: u32, n2: u32) -> Design {
        Design::new(n1, n2).unwrap()
    }

    fn exact(n1: u32, n2: u32) -> ExactCoverage {
        ExactCoverage::new(
            design(n1, n2),
            l95(),
            &QuadratureSpec::default(),
            &RootSpec::default(),
        )
        .unwrap()
    }

    #[test]
    fn grid_arithmetic() {
        assert_eq!(theta_grid(0.5).unwrap(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let g = theta_grid(0.01).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g[48], -0.52);
        assert_eq!(g[100], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(theta_grid(0.3).unwrap().last(), Some(&1.0));
        assert!(theta_grid(0.0).is_err() && theta_grid(0.6).is_err());
    }

    #[test]
    fn ten_by_ten_published_points() {
        let cov = exact(10, 10);
        assert!((cov.at(0.0).unwrap() - 0.980793).abs() < 1e-4);
        assert!((cov.at(0.52).unwrap() - 0.95139).abs() < 1e-4);
        assert!((cov.at(-0.52).unwrap() - 0.95139).abs() < 1e-4);
        assert_eq!(cov.at(1.0).unwrap(), 1.0);
        assert_eq!(cov.at(-1.0).unwrap(), 1.0);
        assert!(cov.at(1.5).is_err());
    }

    #[test]
    fn fifty_by_ten_published_point() {
        let cov = coverage_exact_method(
            design(50, 10),
            l95(),
            0.9,
            &QuadratureSpec::default(),
            &RootSpec::default(),
        )
        .unwrap();
        assert!((cov - 0.97598).abs() < 1e-4);
    }

    #[test]
    fn wald_collapses_near_one() {
        let d = design(10, 10);
        let exact = coverage_classical_method(
            d,
            l95(),
            MethodId::K2,
            0.98,
            false,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(exact < 0.90, "{exact}");

        // Monte Carlo oracle over the same mixture
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let reps = 1_000_000;
        let mut hits = 0u32;
        for _ in 0..reps {
            let t1: f64 = rng.random_range(0.98..1.0);
            let x1 = Binomial::new(10, t1).unwrap().sample(&mut rng) as u32;
            let x2 = Binomial::new(10, t1 - 0.98).unwrap().sample(&mut rng) as u32;
            let c = Counts::new(x1, x2, d).unwrap();
            if crate::classical::ci_k2(&c, l95()).contains(0.98) {
                hits += 1;
            }
        }
        let mc = hits as f64 / reps as f64;
        let se = (mc * (1.0 - mc) / reps as f64).sqrt();
        assert!((mc - exact).abs() < 5.0 * se, "exact {exact}, mc {mc}");
    }

    #[test]
    fn continuity_corrected_wald_is_conservative() {
        let cov = coverage_classical_method(
            design(10, 10),
            l95(),
            MethodId::K3,
            0.0,
            false,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(cov > 0.95, "{cov}");
    }

    #[test]
    fn full_range_stub_covers_everything() {
        let d = design(6, 5);
        let table = vec![(-1.0, 1.0); 7 * 6];
        let cov = ClassicalCoverage::from_table(d, table, &QuadratureSpec::default()).unwrap();
        for t in [-1.0, -0.4, 0.0, 0.33, 0.99, 1.0] {
            assert_eq!(cov.at(t).unwrap(), 1.0);
        }
        assert!(ClassicalCoverage::from_table(d, vec![], &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn both_pipelines_agree_on_the_exact_method() {
        let d = design(7, 4);
        let ex = exact(7, 4);
        let mut table = Vec::new();
        for x1 in 0..=7 {
            for x2 in 0..=4 {
                let idx = ex.support().index_of(d.numerator(x1, x2)).unwrap();
                table.push(ex.bounds()[idx]);
            }
        }
        let cl = ClassicalCoverage::from_table(d, table, &QuadratureSpec::default()).unwrap();
        for t in theta_grid(0.05).unwrap() {
            let a = ex.at(t).unwrap();
            let b = cl.at(t).unwrap();
            assert!((a - b).abs() <= 2e-6, "{t}: {a} vs {b}");
        }
    }

    #[test]
    fn exact_curve_is_symmetric_and_above_level() {
        let curve = coverage_curve(
            design(6, 4),
            l95(),
            MethodId::M,
            0.05,
            false,
            &QuadratureSpec::default(),
            &RootSpec::default(),
        )
        .unwrap();
        assert_eq!(curve.points.len(), 41);
        let n = curve.points.len();
        for (i, p) in curve.points.iter().enumerate() {
            assert!(p.coverage >= 0.95 - 1e-6, "{p:?}");
            assert!((p.coverage - curve.points[n - 1 - i].coverage).abs() <= 2e-6);
        }
        assert!(curve.to_csv().starts_with("theta_diff,coverage\n-1,1\n"));
        assert!(curve.min().unwrap().coverage >= 0.95 - 1e-6);
    }

    #[test]
    fn classical_curve_and_degenerate_cells() {
        let d = design(5, 5);
        let curve = coverage_curve(
            d,
            l95(),
            MethodId::K6,
            0.25,
            true,
            &QuadratureSpec::default(),
            &RootSpec::default(),
        )
        .unwrap();
        assert_eq!(curve.points.len(), 9);
        assert!(curve.truncated);
        assert!(curve
            .points
            .iter()
            .all(|p| (0.0..=1.0).contains(&p.coverage)));
        assert!(
            ClassicalCoverage::new(d, l95(), MethodId::M, false, &QuadratureSpec::default())
                .is_err()
        );
    }
}
