//! Confidence intervals for the difference `θ₁ − θ₂` of two binomial
//! proportions.
//!
//! The crate provides the exact interval built from the law of the observed
//! difference alone, a family of classical normal-approximation intervals,
//! exact coverage probabilities for all of them, and a command-line front end.

pub mod classical;
pub mod cli;
pub mod coverage;
pub mod design;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod interval;
pub mod kernel;
pub mod model;
pub mod quadrature;
pub mod root;

pub use error::{Error, Result};
pub use exact::{exact_interval, exact_intervals};
pub use interval::{truncate, Diagnostic, IntervalEstimate, MethodId};
pub use kernel::{BinomialParams, ConfidenceLevel};
pub use model::{enumerate_support, Design, DiffSupport, MixtureDistribution, SupportPoint};
pub use quadrature::QuadratureSpec;
pub use root::RootSpec;
