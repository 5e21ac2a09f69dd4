use thiserror::Error;

/// Failure of the adaptive integrator to reach the requested tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureFailure {
    /// Best estimate of each integrand component at the point of failure.
    pub estimate: Vec<f64>,
    /// Estimated absolute error of `estimate` (max over components).
    pub error_bound: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The mixture model at |theta_diff| = 1 is a point mass; the mixture
    /// integral is undefined there.
    #[error("degenerate model: theta_diff = {0} has an empty nuisance range")]
    DegenerateModel(f64),

    /// Counts for which the studentized Edgeworth intervals are undefined.
    #[error("degenerate counts: x1={x1}, x2={x2} give a zero variance estimate")]
    DegenerateCounts { x1: u32, x2: u32 },

    #[error(
        "quadrature did not converge after {} subdivisions (error bound {:e})",
        .0.subdivisions,
        .0.error_bound
    )]
    Quadrature(QuadratureFailure),

    /// The monotone tail equation has no sign change in its bracket.
    #[error("no root in [{lo}, {hi}]: residuals {f_lo:e} and {f_hi:e} share a sign")]
    NoBracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("unsupported method: {0}")]
    Method(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature(_) | Error::NoBracket { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
