//! Command-line front end. Commands only parse, call the library and format.

pub mod args;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;

use clap::Parser;
use serde_json::{json, Value};

use args::{AllocateArgs, ClassicalCiArgs, CoverageArgs, ExactCiArgs, PmfArgs};
pub use args::{Cli, Command, Format, Target};

use crate::classical::{classical_interval, Counts};
use crate::coverage::{coverage_curve, CoverageCurve};
use crate::design::optimal_allocation;
use crate::error::{Error, Result};
use crate::exact::{exact_interval, exact_intervals};
use crate::fixtures;
use crate::interval::{truncate, IntervalEstimate, MethodId};
use crate::kernel::ConfidenceLevel;
use crate::model::{enumerate_support, Design, MixtureDistribution};
use crate::quadrature::QuadratureSpec;
use crate::root::RootSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping the worker threads used for batch work.
pub const THREADS_ENV: &str = "DIFFPROP_THREADS";

const ALLOCATE_THETAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    match execute(&cli) {
        Ok(Output::Stdout(text)) => {
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
            EXIT_OK
        }
        Ok(Output::File(path, text)) => match std::fs::write(&path, text) {
            Ok(()) => {
                let _ = writeln!(out, "wrote {}", path.display());
                EXIT_OK
            }
            Err(e) => {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                EXIT_USAGE
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Error::domain(format!(
            "{THREADS_ENV} must be a non-negative integer, got '{raw}'"
        ))
    })?;
    if n > 0 {
        // A pool may already exist when running in-process more than once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

pub enum Output {
    Stdout(String),
    File(std::path::PathBuf, String),
}

pub fn execute(cli: &Cli) -> Result<Output> {
    let f = cli.format;
    let text = match &cli.command {
        Command::ExactCi(a) => exact_ci(a, f)?,
        Command::ClassicalCi(a) => classical_ci(a, f)?,
        Command::Pmf(a) => pmf(a, f)?,
        Command::Coverage(a) => coverage(a, f)?,
        Command::Allocate(a) => allocate(a, f)?,
        Command::Reproduce(a) => {
            let text = reproduce(a.target)?;
            return Ok(match &a.out {
                Some(path) => Output::File(path.clone(), text),
                None => Output::Stdout(text),
            });
        }
    };
    Ok(Output::Stdout(text))
}

fn jsonl(records: impl IntoIterator<Item = Value>) -> String {
    records.into_iter().map(|r| format!("{r}\n")).collect()
}

fn kv(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}

fn exact_ci(a: &ExactCiArgs, f: Format) -> Result<String> {
    let design = Design::new(a.n1, a.n2)?;
    let level = ConfidenceLevel::new(a.gamma)?;
    let quad = QuadratureSpec {
        abs_tol: a.abstol,
        max_subdivisions: a.max_subdivisions,
        ..Default::default()
    };
    let root = RootSpec {
        x_tol: a.xtol,
        ..Default::default()
    };
    if !(-1.0..=1.0).contains(&a.u) {
        return Err(Error::domain(format!("u = {} is outside [-1, 1]", a.u)));
    }
    let (u, snap) = if a.snap_grid {
        let support = enumerate_support(design);
        let p = support
            .nearest(a.u)
            .ok_or_else(|| Error::domain("empty support"))?;
        (p.value, Some(p.value - a.u))
    } else {
        (a.u, None)
    };
    let iv = exact_interval(design, u, level, &quad, &root)?;
    Ok(match f {
        Format::Human => {
            let mut rows = vec![
                ("method", iv.method.tag().to_string()),
                ("n1", a.n1.to_string()),
                ("n2", a.n2.to_string()),
                ("u", u.to_string()),
            ];
            if let Some(d) = snap {
                rows.push(("snapped by", format!("{d:.6e}")));
            }
            rows.push(("gamma", a.gamma.to_string()));
            rows.push(("interval", format!("({:.6}, {:.6})", iv.lower, iv.upper)));
            kv(&rows)
        }
        Format::Csv => {
            let mut s = String::from("method,n1,n2,u,gamma,lower,upper,truncated");
            if snap.is_some() {
                s.push_str(",snap_distance");
            }
            let _ = write!(
                s,
                "\n{},{},{},{},{},{},{},{}",
                iv.method, a.n1, a.n2, u, a.gamma, iv.lower, iv.upper, iv.truncated
            );
            if let Some(d) = snap {
                let _ = write!(s, ",{d}");
            }
            s.push('\n');
            s
        }
        Format::Structured => {
            let mut v = json!({
                "method": iv.method.tag(),
                "n1": a.n1,
                "n2": a.n2,
                "u": u,
                "gamma": a.gamma,
                "lower": iv.lower,
                "upper": iv.upper,
                "truncated": iv.truncated,
            });
            if let Some(d) = snap {
                v["snap_distance"] = json!(d);
            }
            jsonl([v])
        }
    })
}

/// The interval `classical-ci` reports, exposed for cross-checking.
pub fn classical_result(a: &ClassicalCiArgs) -> Result<(Counts, IntervalEstimate)> {
    let method: MethodId = a.method.parse()?;
    if method.is_exact() {
        return Err(Error::Method(
            "the exact method takes the observed difference; use exact-ci".into(),
        ));
    }
    let counts = Counts::new(a.x1, a.x2, Design::new(a.n1, a.n2)?)?;
    let level = ConfidenceLevel::new(a.gamma)?;
    let iv = classical_interval(&counts, level, method)?;
    Ok((counts, if a.truncate { truncate(iv) } else { iv }))
}

fn classical_ci(a: &ClassicalCiArgs, f: Format) -> Result<String> {
    let (counts, iv) = classical_result(a)?;
    let diag = iv
        .diagnostic
        .map(|d| serde_json::to_value(d).unwrap_or(Value::Null));
    Ok(match f {
        Format::Human => {
            let mut rows = vec![
                ("method", iv.method.tag().to_string()),
                ("n1", a.n1.to_string()),
                ("n2", a.n2.to_string()),
                ("x1", a.x1.to_string()),
                ("x2", a.x2.to_string()),
                ("estimate", format!("{:.6}", counts.difference())),
                ("gamma", a.gamma.to_string()),
                ("interval", format!("({:.6}, {:.6})", iv.lower, iv.upper)),
                ("truncated", iv.truncated.to_string()),
            ];
            if let Some(Value::String(d)) = &diag {
                rows.push(("note", d.clone()));
            }
            kv(&rows)
        }
        Format::Csv => format!(
            "method,n1,n2,x1,x2,estimate,gamma,lower,upper,truncated\n{},{},{},{},{},{},{},{},{},{}\n",
            iv.method,
            a.n1,
            a.n2,
            a.x1,
            a.x2,
            counts.difference(),
            a.gamma,
            iv.lower,
            iv.upper,
            iv.truncated
        ),
        Format::Structured => {
            let mut v = json!({
                "method": iv.method.tag(),
                "n1": a.n1,
                "n2": a.n2,
                "x1": a.x1,
                "x2": a.x2,
                "estimate": counts.difference(),
                "gamma": a.gamma,
                "lower": iv.lower,
                "upper": iv.upper,
                "truncated": iv.truncated,
            });
            if let Some(d) = diag {
                v["diagnostic"] = d;
            }
            jsonl([v])
        }
    })
}

/// Support values and their probabilities, as `pmf` reports them.
pub fn pmf_table(n1: u32, n2: u32, theta_diff: f64) -> Result<Vec<(f64, f64)>> {
    let design = Design::new(n1, n2)?;
    if theta_diff.is_nan() || theta_diff.abs() >= 1.0 {
        return Err(Error::domain(format!(
            "theta_diff must satisfy |theta_diff| < 1, got {theta_diff}"
        )));
    }
    let support = enumerate_support(design);
    let dist = MixtureDistribution::new(design, theta_diff, QuadratureSpec::default())?;
    let pmf = dist.pmf_all(&support)?;
    Ok(support.values().zip(pmf).collect())
}

fn pmf(a: &PmfArgs, f: Format) -> Result<String> {
    let rows = pmf_table(a.n1, a.n2, a.theta_diff)?;
    Ok(match f {
        Format::Human => {
            let mut s = format!("{:>10}  {:>14}\n", "u", "pmf");
            for (u, p) in &rows {
                let _ = writeln!(s, "{u:>10.6}  {p:>14.10}");
            }
            let total: f64 = rows.iter().map(|r| r.1).sum();
            let _ = writeln!(s, "{:>10}  {total:>14.10}", "sum");
            s
        }
        Format::Csv => {
            let mut s = String::from("u,pmf\n");
            for (u, p) in &rows {
                let _ = writeln!(s, "{u},{p}");
            }
            s
        }
        Format::Structured => jsonl(rows.iter().map(|&(u, p)| {
            json!({ "n1": a.n1, "n2": a.n2, "theta_diff": a.theta_diff, "u": u, "pmf": p })
        })),
    })
}

/// The curve `coverage` reports, exposed for cross-checking.
pub fn coverage_result(a: &CoverageArgs) -> Result<CoverageCurve> {
    let method: MethodId = a.method.parse()?;
    coverage_curve(
        Design::new(a.n1, a.n2)?,
        ConfidenceLevel::new(a.gamma)?,
        method,
        a.step,
        a.truncate,
        &QuadratureSpec::default(),
        &RootSpec::default(),
    )
}

fn coverage(a: &CoverageArgs, f: Format) -> Result<String> {
    let curve = coverage_result(a)?;
    Ok(match f {
        Format::Human => {
            let mut s = format!("{:>10}  {:>10}\n", "theta_diff", "coverage");
            for p in &curve.points {
                let _ = writeln!(s, "{:>10.6}  {:>10.6}", p.theta_diff, p.coverage);
            }
            if let Some(m) = curve.min() {
                let _ = writeln!(
                    s,
                    "minimum {:.6} at theta_diff {:.6}",
                    m.coverage, m.theta_diff
                );
            }
            s
        }
        Format::Csv => curve.to_csv(),
        Format::Structured => jsonl(curve.points.iter().map(|p| {
            json!({
                "method": curve.method.tag(),
                "n1": a.n1,
                "n2": a.n2,
                "gamma": a.gamma,
                "truncated": curve.truncated,
                "theta_diff": p.theta_diff,
                "coverage": p.coverage,
            })
        })),
    })
}

fn allocate(a: &AllocateArgs, f: Format) -> Result<String> {
    let plan = optimal_allocation(a.n_total)?;
    let variances: Vec<(f64, f64)> = ALLOCATE_THETAS
        .iter()
        .map(|&t| plan.variance_at(t).map(|v| (t, v)))
        .collect::<Result<_>>()?;
    Ok(match f {
        Format::Human => {
            let mut s = kv(&[
                ("n_total", plan.n_total.to_string()),
                ("n1", plan.n1.to_string()),
                ("n2", plan.n2().to_string()),
                ("f", format!("{:.6}", plan.f)),
            ]);
            s.push_str("theta_diff  variance\n");
            for (t, v) in &variances {
                let _ = writeln!(s, "{t:>10.2}  {v:.6}");
            }
            s
        }
        Format::Csv => {
            let mut s = String::from("n_total,n1,n2,f,theta_diff,variance\n");
            for (t, v) in &variances {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{t},{v}",
                    plan.n_total,
                    plan.n1,
                    plan.n2(),
                    plan.f
                );
            }
            s
        }
        Format::Structured => jsonl(variances.iter().map(|&(t, v)| {
            json!({
                "n_total": plan.n_total,
                "n1": plan.n1,
                "n2": plan.n2(),
                "f": plan.f,
                "theta_diff": t,
                "variance": v,
            })
        })),
    })
}

fn exact_rows_csv(rows: &[fixtures::ExactRow]) -> Result<String> {
    let level = ConfidenceLevel::new(0.95)?;
    let quad = QuadratureSpec::default();
    let root = RootSpec::default();
    let mut s = String::from("n1,n2,u,lower,upper,published_lower,published_upper\n");
    let mut designs: Vec<(u32, u32)> = rows.iter().map(|r| (r.n1, r.n2)).collect();
    designs.dedup();
    for (n1, n2) in designs {
        let design = Design::new(n1, n2)?;
        let support = enumerate_support(design);
        let wanted: Vec<_> = rows.iter().filter(|r| (r.n1, r.n2) == (n1, n2)).collect();
        let all_on_grid = wanted.iter().all(|r| support.find(r.u, 1e-12).is_some());
        let computed: Vec<IntervalEstimate> = if all_on_grid && wanted.len() > 4 {
            let all = exact_intervals(&support, level, &quad, &root)?;
            wanted
                .iter()
                .map(|r| {
                    let p = support.find(r.u, 1e-12).expect("checked above");
                    all[support.index_of(p.numerator).expect("point is in support")]
                })
                .collect()
        } else {
            wanted
                .iter()
                .map(|r| exact_interval(design, r.u, level, &quad, &root))
                .collect::<Result<_>>()?
        };
        for (r, iv) in wanted.iter().zip(computed) {
            let _ = writeln!(
                s,
                "{n1},{n2},{},{},{},{},{}",
                r.u, iv.lower, iv.upper, r.lower, r.upper
            );
        }
    }
    Ok(s)
}

fn figure_csv(n1: u32, n2: u32, published: &[(f64, f64)]) -> Result<String> {
    let curve = coverage_curve(
        Design::new(n1, n2)?,
        ConfidenceLevel::new(0.95)?,
        MethodId::M,
        0.01,
        false,
        &QuadratureSpec::default(),
        &RootSpec::default(),
    )?;
    let mut s = String::from("theta_diff,coverage,published_coverage\n");
    for (p, &(t, c)) in curve.points.iter().zip(published) {
        debug_assert!((p.theta_diff - t).abs() < 1e-9);
        let _ = writeln!(s, "{},{},{c}", p.theta_diff, p.coverage);
    }
    Ok(s)
}

/// CSV text for a `reproduce` target.
pub fn reproduce(target: Target) -> Result<String> {
    match target {
        Target::Table1 => exact_rows_csv(&fixtures::table1()),
        Target::Medical => exact_rows_csv(&fixtures::medical()),
        Target::Figure1a => figure_csv(10, 10, &fixtures::figure1a()),
        Target::Figure1b => figure_csv(50, 10, &fixtures::figure1b()),
        Target::Table2 => {
            let level = ConfidenceLevel::new(0.95)?;
            let design = Design::new(fixtures::EXPERIMENT_N1, fixtures::EXPERIMENT_N2)?;
            let mut s = String::from(
                "x1,x2,u,k1_lower,k1_upper,k2_lower,k2_upper,wang_lower,wang_upper,wang_source\n",
            );
            for r in fixtures::table2() {
                let c = Counts::new(r.x1, r.x2, design)?;
                let k1 = classical_interval(&c, level, MethodId::K1)?;
                let k2 = classical_interval(&c, level, MethodId::K2)?;
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},reference_only",
                    r.x1, r.x2, r.u, k1.lower, k1.upper, k2.lower, k2.upper, r.wang.0, r.wang.1
                );
            }
            Ok(s)
        }
    }
}
