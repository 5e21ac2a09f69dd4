use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "diffprop",
    version,
    about = "Confidence intervals for the difference of two binomial proportions"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Csv,
    /// One flat JSON object per record, one record per line.
    #[value(alias = "json")]
    Structured,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact interval from the observed difference alone.
    ExactCi(ExactCiArgs),
    /// Classical interval from the two success counts.
    ClassicalCi(ClassicalCiArgs),
    /// Probability of every attainable difference at a true difference.
    Pmf(PmfArgs),
    /// Exact coverage probability over a grid of true differences.
    Coverage(CoverageArgs),
    /// Variance-minimising split of a fixed number of trials.
    Allocate(AllocateArgs),
    /// Regenerate a published table or figure dataset as CSV.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct ExactCiArgs {
    #[arg(long)]
    pub n1: u32,
    #[arg(long)]
    pub n2: u32,
    /// Observed difference; need not lie on the support.
    #[arg(long, allow_hyphen_values = true)]
    pub u: f64,
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    /// Bracket width at which root-finding stops.
    #[arg(long, default_value_t = 1e-8)]
    pub xtol: f64,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub abstol: f64,
    /// Cap on adaptive quadrature subdivisions.
    #[arg(long, default_value_t = 200)]
    pub max_subdivisions: usize,
    /// Replace u by the nearest attainable difference and report the shift.
    #[arg(long)]
    pub snap_grid: bool,
}

#[derive(Debug, Args)]
pub struct ClassicalCiArgs {
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub n1: u32,
    #[arg(long)]
    pub n2: u32,
    #[arg(long)]
    pub x1: u32,
    #[arg(long)]
    pub x2: u32,
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    /// Clamp the endpoints into [-1, 1].
    #[arg(long)]
    pub truncate: bool,
}

#[derive(Debug, Args)]
pub struct PmfArgs {
    #[arg(long)]
    pub n1: u32,
    #[arg(long)]
    pub n2: u32,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_diff: f64,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long, default_value = "m")]
    pub method: String,
    #[arg(long)]
    pub n1: u32,
    #[arg(long)]
    pub n2: u32,
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Clamp classical endpoints into [-1, 1] before scoring.
    #[arg(long)]
    pub truncate: bool,
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    #[arg(long)]
    pub n_total: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Table1,
    Table2,
    Figure1a,
    Figure1b,
    Medical,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}
