//! Globally adaptive Gauss–Kronrod (G10/K21) integration of scalar and
//! vector-valued integrands on a finite interval.
//!
//! The vector form shares every abscissa across components, which is what the
//! mixture model needs: one pass over the lattice at each node yields the
//! whole probability vector. Error control uses the largest per-component
//! error estimate.

#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, QuadratureFailure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.max_subdivisions >= 1) {
            return Err(Error::domain(
                "quadrature tolerances must be positive and max_subdivisions >= 1",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecIntegral {
    pub values: Vec<f64>,
    pub error: f64,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_998_970,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the abscissae XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

struct Rule {
    dim: usize,
    // function values at the 21 nodes, node-major
    fv: Vec<f64>,
}

impl Rule {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            fv: vec![0.0; 21 * dim],
        }
    }

    /// Applies the 21-point rule on `[a, b]`, writing the Kronrod estimate
    /// into `out` and returning the error estimate.
    fn apply<F>(&mut self, f: &mut F, a: f64, b: f64, out: &mut [f64]) -> f64
    where
        F: FnMut(f64, &mut [f64]),
    {
        let dim = self.dim;
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        // node 0 is the centre; nodes 2j+1 / 2j+2 are center ∓ half·XGK[j]
        f(center, &mut self.fv[..dim]);
        for j in 0..10 {
            let dx = half * XGK[j];
            let (lo, hi) = self.fv[(1 + 2 * j) * dim..(3 + 2 * j) * dim].split_at_mut(dim);
            f(center - dx, lo);
            f(center + dx, hi);
        }

        let mut worst = 0.0_f64;
        for c in 0..dim {
            let fc = self.fv[c];
            let mut res_k = WGK[10] * fc;
            let mut res_g = 0.0;
            let mut res_abs = (WGK[10] * fc).abs();
            for j in 0..10 {
                let f1 = self.fv[(1 + 2 * j) * dim + c];
                let f2 = self.fv[(2 + 2 * j) * dim + c];
                res_k += WGK[j] * (f1 + f2);
                res_abs += WGK[j] * (f1.abs() + f2.abs());
                if j % 2 == 1 {
                    res_g += WG[j / 2] * (f1 + f2);
                }
            }
            let mean = 0.5 * res_k;
            let mut res_asc = WGK[10] * (fc - mean).abs();
            for j in 0..10 {
                let f1 = self.fv[(1 + 2 * j) * dim + c];
                let f2 = self.fv[(2 + 2 * j) * dim + c];
                res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
            }
            let scale = half.abs();
            out[c] = res_k * half;
            let err = rescale_error((res_k - res_g) * half, res_abs * scale, res_asc * scale);
            worst = worst.max(err);
        }
        worst
    }
}

struct Segment {
    a: f64,
    b: f64,
    values: Vec<f64>,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn tolerance(spec: &QuadratureSpec, totals: &[f64]) -> f64 {
    let scale = totals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    spec.abs_tol.max(spec.rel_tol * scale)
}

/// Integrates a vector-valued function over `[a, b]`. The integrand writes
/// its `dim` components into the provided slice.
pub fn integrate_vec<F>(
    mut f: F,
    a: f64,
    b: f64,
    dim: usize,
    spec: &QuadratureSpec,
) -> Result<VecIntegral>
where
    F: FnMut(f64, &mut [f64]),
{
    spec.validate()?;
    if a == b || dim == 0 {
        return Ok(VecIntegral {
            values: vec![0.0; dim],
            error: 0.0,
        });
    }
    let mut rule = Rule::new(dim);
    let mut values = vec![0.0; dim];
    let error = rule.apply(&mut f, a, b, &mut values);

    let mut heap = BinaryHeap::new();
    let mut totals = values.clone();
    let mut err_total = error;
    heap.push(Segment {
        a,
        b,
        values,
        error,
    });

    let min_width = (b - a).abs() * 1e-15;
    loop {
        if err_total <= tolerance(spec, &totals) {
            break;
        }
        if heap.len() >= spec.max_subdivisions {
            return Err(failure(heap, err_total));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if (worst.b - worst.a).abs() <= min_width {
            heap.push(worst);
            return Err(failure(heap, err_total));
        }
        let mut left = vec![0.0; dim];
        let mut right = vec![0.0; dim];
        let err_left = rule.apply(&mut f, worst.a, mid, &mut left);
        let err_right = rule.apply(&mut f, mid, worst.b, &mut right);
        for c in 0..dim {
            totals[c] += left[c] + right[c] - worst.values[c];
        }
        err_total += err_left + err_right - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            values: left,
            error: err_left,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            values: right,
            error: err_right,
        });
    }

    // Re-sum from the segments to shed the drift of incremental updates.
    let mut values = vec![0.0; dim];
    let mut error = 0.0;
    for seg in heap.iter() {
        for c in 0..dim {
            values[c] += seg.values[c];
        }
        error += seg.error;
    }
    Ok(VecIntegral { values, error })
}

fn failure(heap: BinaryHeap<Segment>, err_total: f64) -> Error {
    let subdivisions = heap.len();
    let dim = heap.peek().map_or(0, |s| s.values.len());
    let mut estimate = vec![0.0; dim];
    for seg in heap.iter() {
        for c in 0..dim {
            estimate[c] += seg.values[c];
        }
    }
    Error::Quadrature(QuadratureFailure {
        estimate,
        error_bound: err_total,
        subdivisions,
    })
}

pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Integral>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x, out: &mut [f64]| out[0] = f(x), a, b, 1, spec)?;
    Ok(Integral {
        value: r.values[0],
        error: r.error,
    })
}
