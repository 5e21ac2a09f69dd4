//! Published reference datasets, embedded at build time.

const TABLE1: &str = include_str!("../data/table1.csv");
const TABLE2: &str = include_str!("../data/table2.csv");
const FIGURE1A: &str = include_str!("../data/figure1a.csv");
const FIGURE1B: &str = include_str!("../data/figure1b.csv");
const MEDICAL: &str = include_str!("../data/medical.csv");

/// A published exact interval for an observed difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactRow {
    pub n1: u32,
    pub n2: u32,
    pub u: f64,
    pub lower: f64,
    pub upper: f64,
}

/// One experiment of the seven-experiment comparison at `n₁ = 50, n₂ = 10`.
///
/// The Wang endpoints are reference values only; that method is not
/// implemented here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentRow {
    pub x1: u32,
    pub x2: u32,
    pub u: f64,
    pub wang: (f64, f64),
    pub k1: (f64, f64),
    pub k2: (f64, f64),
}

pub const EXPERIMENT_N1: u32 = 50;
pub const EXPERIMENT_N2: u32 = 10;

fn rows(src: &str) -> impl Iterator<Item = Vec<&str>> {
    src.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(str::trim).collect())
}

fn num<T: std::str::FromStr>(s: &str) -> T
where
    T::Err: std::fmt::Debug,
{
    s.parse().expect("embedded fixture is well formed")
}

fn exact_rows(src: &str) -> Vec<ExactRow> {
    rows(src)
        .map(|r| ExactRow {
            n1: num(r[0]),
            n2: num(r[1]),
            u: num(r[2]),
            lower: num(r[3]),
            upper: num(r[4]),
        })
        .collect()
}

/// 95% exact intervals at `(10, 10)` then `(50, 10)`, each for
/// `u = −1.0, −0.9, …, 1.0`.
pub fn table1() -> Vec<ExactRow> {
    exact_rows(TABLE1)
}

pub fn table2() -> Vec<ExperimentRow> {
    rows(TABLE2)
        .map(|r| ExperimentRow {
            x1: num(r[0]),
            x2: num(r[1]),
            u: num(r[2]),
            wang: (num(r[3]), num(r[4])),
            k1: (num(r[5]), num(r[6])),
            k2: (num(r[7]), num(r[8])),
        })
        .collect()
}

/// The two field-study intervals at `(743, 329)`.
pub fn medical() -> Vec<ExactRow> {
    exact_rows(MEDICAL)
}

fn curve(src: &str) -> Vec<(f64, f64)> {
    rows(src).map(|r| (num(r[0]), num(r[1]))).collect()
}

/// Coverage of the exact method at `(10, 10)`, `γ = 0.95`, step 0.01.
pub fn figure1a() -> Vec<(f64, f64)> {
    curve(FIGURE1A)
}

/// Coverage of the exact method at `(50, 10)`, `γ = 0.95`, step 0.01.
pub fn figure1b() -> Vec<(f64, f64)> {
    curve(FIGURE1B)
}
