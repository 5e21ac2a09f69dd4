//! Variance of the observed difference under the mixture law, and the
//! allocation of a fixed number of trials that minimises it.

use serde::Serialize;

use crate::error::{Error, Result};

/// `D²_ϑ(ϑ̂)` for `n` trials split as `n₁ = fn`, `n₂ = (1−f)n`.
///
/// Averaging `θ₁(1−θ₁)/n₁ + θ₂(1−θ₂)/n₂` over the uniform nuisance range
/// gives `(1 − 3ϑ² + 2|ϑ|³) / (6nf(1−f)(1−|ϑ|))`, which simplifies to the
/// form used here and vanishes at `ϑ = ±1`.
pub fn mixture_variance(n_total: u32, f: f64, theta_diff: f64) -> Result<f64> {
    if n_total < 2 {
        return Err(Error::domain(format!(
            "n_total {n_total} must be at least 2"
        )));
    }
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::domain(format!(
            "allocation fraction {f} must be in (0, 1)"
        )));
    }
    if !(-1.0..=1.0).contains(&theta_diff) {
        return Err(Error::domain(format!(
            "theta_diff {theta_diff} is outside [-1, 1]"
        )));
    }
    let t = theta_diff.abs();
    let n = n_total as f64;
    // For an integer split use n₁n₂/n², which keeps f ↔ 1−f exact.
    let k = (f * n).round();
    let spread = if (f * n - k).abs() < 1e-9 {
        k * (n - k) / (n * n)
    } else {
        0.25 - (f - 0.5) * (f - 0.5)
    };
    Ok((1.0 - t) * (1.0 + 2.0 * t) / (6.0 * n * spread))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllocationPlan {
    pub n_total: u32,
    pub n1: u32,
    pub f: f64,
}

impl AllocationPlan {
    pub fn new(n_total: u32, n1: u32) -> Result<Self> {
        if n_total < 2 || n1 == 0 || n1 >= n_total {
            return Err(Error::domain(format!(
                "split {n1} of {n_total} must leave both groups non-empty"
            )));
        }
        Ok(Self {
            n_total,
            n1,
            f: n1 as f64 / n_total as f64,
        })
    }

    pub fn n2(&self) -> u32 {
        self.n_total - self.n1
    }

    pub fn variance_at(&self, theta_diff: f64) -> Result<f64> {
        mixture_variance(self.n_total, self.f, theta_diff)
    }
}

/// Even split, with `n₁ = ⌊n/2⌋` when `n` is odd; `⌈n/2⌉` is equally good.
pub fn optimal_allocation(n_total: u32) -> Result<AllocationPlan> {
    AllocationPlan::new(n_total, n_total / 2)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_distr::{Binomial, Distribution};

    use super::*;

    #[test]
    fn closed_form_values() {
        assert!((mixture_variance(20, 0.5, 0.0).unwrap() - 1.0 / 30.0).abs() < 1e-15);
        assert_eq!(mixture_variance(20, 0.5, 1.0).unwrap(), 0.0);
        assert_eq!(mixture_variance(20, 0.5, -1.0).unwrap(), 0.0);
        assert!(mixture_variance(20, 0.0, 0.0).is_err());
        assert!(mixture_variance(20, 1.0, 0.0).is_err());
        assert!(mixture_variance(1, 0.5, 0.0).is_err());
        assert!(mixture_variance(20, 0.5, 1.1).is_err());
    }

    #[test]
    fn symmetries() {
        for &t in &[0.0, 0.2, 0.77, 1.0] {
            for &f in &[0.1, 0.25, 0.4] {
                let a = mixture_variance(30, f, t).unwrap();
                assert_eq!(a, mixture_variance(30, 1.0 - f, t).unwrap());
                assert_eq!(a, mixture_variance(30, f, -t).unwrap());
            }
        }
    }

    #[test]
    fn decreases_toward_even_split() {
        for &t in &[0.0, 0.4, 0.95] {
            let mut prev = f64::INFINITY;
            for i in 1..=50 {
                let v = mixture_variance(40, i as f64 / 100.0, t).unwrap();
                assert!(v < prev);
                prev = v;
            }
        }
    }

    #[test]
    fn allocation_examples() {
        let p = optimal_allocation(20).unwrap();
        assert_eq!((p.n1, p.n2(), p.f), (10, 10, 0.5));
        let p = optimal_allocation(2).unwrap();
        assert_eq!((p.n1, p.n2()), (1, 1));
        let p = optimal_allocation(21).unwrap();
        assert_eq!((p.n1, p.n2()), (10, 11));
        assert!(optimal_allocation(1).is_err());
    }

    #[test]
    fn allocation_beats_every_split() {
        let best = optimal_allocation(7).unwrap();
        for &t in &[0.0, 0.3, 0.9] {
            let v = best.variance_at(t).unwrap();
            for n1 in 1..7 {
                let other = AllocationPlan::new(7, n1).unwrap().variance_at(t).unwrap();
                assert!(v <= other);
            }
        }
    }

    #[test]
    fn monte_carlo_agreement() {
        let (n1, n2, theta) = (50u64, 10u64, 0.32);
        let mut rng = rand::rngs::StdRng::seed_from_u64(20);
        let draws = 10_000_000usize;
        let mut sum = 0.0;
        let mut samples = Vec::with_capacity(draws);
        for _ in 0..draws {
            let t1: f64 = rng.random_range(theta..1.0);
            let x1 = Binomial::new(n1, t1).unwrap().sample(&mut rng) as f64;
            let x2 = Binomial::new(n2, t1 - theta).unwrap().sample(&mut rng) as f64;
            let d = x1 / n1 as f64 - x2 / n2 as f64;
            sum += d;
            samples.push(d);
        }
        let mean = sum / draws as f64;
        let (m2, m4) = samples.iter().fold((0.0, 0.0), |(a, b), &d| {
            let c = (d - mean) * (d - mean);
            (a + c, b + c * c)
        });
        let var = m2 / draws as f64;
        let se = ((m4 / draws as f64 - var * var) / draws as f64).sqrt();
        let model = mixture_variance(60, 5.0 / 6.0, theta).unwrap();
        assert!(
            (var - model).abs() < 3.0 * se,
            "mc {var} model {model} se {se}"
        );
    }
}
