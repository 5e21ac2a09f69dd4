//! Binomial and standard-normal primitives shared by the rest of the crate.
//!
//! Probabilities are evaluated in log space through `ln Γ`, so trial counts
//! in the thousands neither overflow nor underflow. At `p ∈ {0, 1}` the
//! distributions are point masses and are returned exactly.

#![allow(clippy::excessive_precision)]

use serde::Serialize;

use crate::error::{Error, Result};

/// Additive fuzz applied before flooring a real-valued CDF argument. Values
/// such as `n1 * (u + k / n2)` land a few ulps below an integer when `u` is a
/// decimal, and must not drop to the previous lattice point.
pub const CDF_FUZZ: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialParams {
    m: u64,
    p: f64,
}

impl BinomialParams {
    pub fn new(m: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!(
                "success probability {p} is outside [0, 1]"
            )));
        }
        Ok(Self { m, p })
    }

    pub fn trials(&self) -> u64 {
        self.m
    }

    pub fn prob(&self) -> f64 {
        self.p
    }
}

/// A confidence level `gamma` together with the two-sided normal quantile
/// `z = Φ⁻¹((1 + gamma) / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceLevel {
    gamma: f64,
    z: f64,
}

impl ConfidenceLevel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::domain(format!(
                "confidence level {gamma} is outside (0, 1)"
            )));
        }
        let z = normal_quantile((1.0 + gamma) / 2.0)?;
        Ok(Self { gamma, z })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Target of the lower tail equation, `(1 + gamma) / 2`.
    pub fn upper_tail_order(&self) -> f64 {
        (1.0 + self.gamma) / 2.0
    }

    /// Target of the upper tail equation, `(1 - gamma) / 2`.
    pub fn lower_tail_order(&self) -> f64 {
        (1.0 - self.gamma) / 2.0
    }
}

fn ln_choose(m: u64, k: u64) -> f64 {
    let m = m as f64;
    let k = k as f64;
    libm::lgamma(m + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(m - k + 1.0)
}

/// `P(ζ = k)` for `ζ ~ Bin(m, p)`; zero outside `0..=m`.
pub fn binom_pmf(params: BinomialParams, k: i64) -> f64 {
    let BinomialParams { m, p } = params;
    if k < 0 || k as u64 > m {
        return 0.0;
    }
    let k = k as u64;
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == m { 1.0 } else { 0.0 };
    }
    let ln = ln_choose(m, k) + k as f64 * p.ln() + (m - k) as f64 * (-p).ln_1p();
    ln.exp()
}

/// Index of the last lattice point counted by a lower-tail probability at
/// real argument `x`, i.e. `floor(x + CDF_FUZZ)`.
pub fn fuzzed_floor(x: f64) -> i64 {
    let f = (x + CDF_FUZZ).floor();
    if f < i64::MIN as f64 {
        i64::MIN
    } else if f > i64::MAX as f64 {
        i64::MAX
    } else {
        f as i64
    }
}

/// `P(ζ ≤ floor(x + 1e-7))` for `ζ ~ Bin(m, p)`.
pub fn binom_cdf_fuzzed(params: BinomialParams, x: f64) -> f64 {
    let j = fuzzed_floor(x);
    if j < 0 {
        return 0.0;
    }
    if j as u64 >= params.m {
        return 1.0;
    }
    let total: f64 = (0..=j).map(|k| binom_pmf(params, k)).sum();
    total.min(1.0)
}

/// Cached `ln k!` for `k = 0..=max`, used to fill whole pmf rows cheaply.
#[derive(Debug, Clone)]
pub struct LnFactorials(Vec<f64>);

impl LnFactorials {
    pub fn new(max: u64) -> Self {
        Self((0..=max).map(|k| libm::lgamma(k as f64 + 1.0)).collect())
    }

    pub fn max(&self) -> u64 {
        (self.0.len() - 1) as u64
    }

    #[inline]
    pub fn ln_choose(&self, m: usize, k: usize) -> f64 {
        self.0[m] - self.0[k] - self.0[m - k]
    }

    /// Writes `P(ζ = k)`, `k = 0..=m`, into `out[..=m]` for `ζ ~ Bin(m, p)`.
    /// `p` is clamped into `[0, 1]` to absorb rounding in callers that form
    /// it as a difference.
    pub fn pmf_row(&self, m: usize, p: f64, out: &mut [f64]) {
        debug_assert!(m as u64 <= self.max());
        let out = &mut out[..=m];
        let p = p.clamp(0.0, 1.0);
        if p == 0.0 || p == 1.0 {
            out.fill(0.0);
            out[if p == 0.0 { 0 } else { m }] = 1.0;
            return;
        }
        let lp = p.ln();
        let lq = (-p).ln_1p();
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (self.ln_choose(m, k) + k as f64 * lp + (m - k) as f64 * lq).exp();
        }
    }
}

// Wichura's AS 241 (PPND16) rational approximations, digits as published.
const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn poly(coef: &[f64; 8], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Inverse of the standard normal CDF.
pub fn normal_quantile(order: f64) -> Result<f64> {
    if !(order > 0.0 && order < 1.0) {
        return Err(Error::domain(format!(
            "quantile order {order} is outside (0, 1)"
        )));
    }
    let q = order - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return Ok(q * poly(&A, r) / poly(&B, r));
    }
    let tail = if q < 0.0 { order } else { 1.0 - order };
    let r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    Ok(if q < 0.0 { -x } else { x })
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bp(m: u64, p: f64) -> BinomialParams {
        BinomialParams::new(m, p).unwrap()
    }

    #[test]
    fn pmf_matches_exact_integer_arithmetic() {
        // C(10,5) / 2^10 = 252 / 1024
        assert!((binom_pmf(bp(10, 0.5), 5) - 0.246_093_75).abs() < 1e-15);
    }

    #[test]
    fn pmf_degenerate_and_outside_support() {
        assert_eq!(binom_pmf(bp(10, 0.0), 0), 1.0);
        assert_eq!(binom_pmf(bp(10, 0.0), 1), 0.0);
        assert_eq!(binom_pmf(bp(10, 1.0), 10), 1.0);
        assert_eq!(binom_pmf(bp(10, 0.3), 11), 0.0);
        assert_eq!(binom_pmf(bp(10, 0.3), -1), 0.0);
    }

    #[test]
    fn pmf_large_trial_count_is_finite() {
        let s: f64 = (0..=10_000).map(|k| binom_pmf(bp(10_000, 0.37), k)).sum();
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn invalid_probability_rejected() {
        assert!(matches!(BinomialParams::new(3, 1.2), Err(Error::Domain(_))));
        assert!(matches!(
            BinomialParams::new(3, -0.1),
            Err(Error::Domain(_))
        ));
        assert!(BinomialParams::new(3, f64::NAN).is_err());
    }

    #[test]
    fn cdf_edges() {
        assert_eq!(binom_cdf_fuzzed(bp(10, 0.5), 10.0), 1.0);
        assert_eq!(binom_cdf_fuzzed(bp(10, 0.5), -0.5), 0.0);
    }

    #[test]
    fn cdf_fuzz_protects_on_grid_argument() {
        let x = 10.0 * (0.1 + 7.0 / 10.0);
        assert!(x < 8.0, "fixture must exhibit the rounding error");
        let direct: f64 = (0..=8).map(|k| binom_pmf(bp(10, 0.3), k)).sum();
        assert!((binom_cdf_fuzzed(bp(10, 0.3), x) - direct).abs() < 1e-15);
    }

    #[test]
    fn pmf_row_agrees_with_pointwise_pmf() {
        let lf = LnFactorials::new(60);
        let mut row = vec![0.0; 61];
        for &p in &[0.0, 1e-9, 0.2, 0.5, 0.93, 1.0] {
            lf.pmf_row(60, p, &mut row);
            for (k, got) in row.iter().enumerate() {
                let want = binom_pmf(bp(60, p), k as i64);
                assert!((got - want).abs() < 1e-14, "p={p} k={k}");
            }
        }
    }

    #[test]
    fn tabulated_normal_quantiles() {
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_98).abs() < 1e-6);
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        assert!((normal_quantile(0.995).unwrap() - 2.575_829_30).abs() < 1e-6);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-12, 1e-6, 0.001, 0.02, 0.3, 0.5, 0.7, 0.975, 0.999_999] {
            let x = normal_quantile(p).unwrap();
            assert!((normal_cdf(x) - p).abs() < 1e-10 * p.max(1e-3), "p={p}");
        }
    }

    #[test]
    fn quantile_domain() {
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
        assert!(normal_quantile(f64::NAN).is_err());
    }

    #[test]
    fn confidence_level_z() {
        let cl = ConfidenceLevel::new(0.95).unwrap();
        assert!(cl.z() > 0.0);
        assert!((normal_cdf(cl.z()) - 0.975).abs() < 1e-10);
        assert!(ConfidenceLevel::new(1.0).is_err());
        assert!(ConfidenceLevel::new(0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pmf_sums_to_one(m in 0u64..400, p in 0.0f64..=1.0) {
                let s: f64 = (0..=m as i64).map(|k| binom_pmf(bp(m, p), k)).sum();
                prop_assert!((s - 1.0).abs() < 1e-12);
            }

            #[test]
            fn cdf_increments_are_pmf(m in 1u64..200, p in 0.0f64..=1.0, k in 0i64..200) {
                let d = binom_cdf_fuzzed(bp(m, p), k as f64)
                    - binom_cdf_fuzzed(bp(m, p), (k - 1) as f64);
                prop_assert!((d - binom_pmf(bp(m, p), k)).abs() < 1e-12);
            }

            #[test]
            fn cdf_monotone(m in 1u64..100, p in 0.0f64..=1.0, dp in 0.0f64..0.5,
                            x in -2.0f64..102.0, dx in 0.0f64..5.0) {
                let lo = binom_cdf_fuzzed(bp(m, p), x);
                prop_assert!(binom_cdf_fuzzed(bp(m, p), x + dx) >= lo - 1e-12);
                if x >= 0.0 && x < m as f64 {
                    let p2 = (p + dp).min(1.0);
                    prop_assert!(binom_cdf_fuzzed(bp(m, p2), x) <= lo + 1e-12);
                }
            }

            #[test]
            fn quantile_antisymmetric(o in 1e-3f64..(1.0 - 1e-3)) {
                let a = normal_quantile(o).unwrap();
                let b = normal_quantile(1.0 - o).unwrap();
                prop_assert!((a + b).abs() < 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
