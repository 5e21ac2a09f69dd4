use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::ConfidenceLevel;

/// Interval construction methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MethodId {
    /// Exact interval from the mixture law of the observed difference.
    M,
    /// Pooled-variance interval from the test of `θ₁ = θ₂`.
    K1,
    /// Wald interval.
    K2,
    /// Wald interval in Mee–Anbar parameterisation.
    MeeAnbar,
    /// Miettinen–Nurminen variance inflation of the Wald interval.
    K2p,
    /// Continuity-corrected Wald interval.
    K3,
    K4Haldane,
    K4JeffreysPerks,
    /// Newcombe's hybrid of single-proportion Wilson score bounds.
    K5Wilson,
    /// As `K5Wilson` with continuity-corrected score bounds.
    K5Fleiss,
    /// Edgeworth-corrected interval.
    K6,
    /// Edgeworth interval through the cubic transform.
    K7,
}

impl MethodId {
    pub const ALL: [MethodId; 12] = [
        MethodId::M,
        MethodId::K1,
        MethodId::K2,
        MethodId::MeeAnbar,
        MethodId::K2p,
        MethodId::K3,
        MethodId::K4Haldane,
        MethodId::K4JeffreysPerks,
        MethodId::K5Wilson,
        MethodId::K5Fleiss,
        MethodId::K6,
        MethodId::K7,
    ];

    pub const CLASSICAL: [MethodId; 11] = [
        MethodId::K1,
        MethodId::K2,
        MethodId::MeeAnbar,
        MethodId::K2p,
        MethodId::K3,
        MethodId::K4Haldane,
        MethodId::K4JeffreysPerks,
        MethodId::K5Wilson,
        MethodId::K5Fleiss,
        MethodId::K6,
        MethodId::K7,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            MethodId::M => "m",
            MethodId::K1 => "k1",
            MethodId::K2 => "k2",
            MethodId::MeeAnbar => "mee-anbar",
            MethodId::K2p => "k2p",
            MethodId::K3 => "k3",
            MethodId::K4Haldane => "k4",
            MethodId::K4JeffreysPerks => "k4jp",
            MethodId::K5Wilson => "k5",
            MethodId::K5Fleiss => "k5cc",
            MethodId::K6 => "k6",
            MethodId::K7 => "k7",
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, MethodId::M)
    }

    pub fn tags() -> String {
        Self::ALL
            .iter()
            .map(|m| m.tag())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let m = match s.to_ascii_lowercase().as_str() {
            "m" | "exact" => MethodId::M,
            "k1" => MethodId::K1,
            "k2" | "wald" => MethodId::K2,
            "mee-anbar" | "meeanbar" | "mee_anbar" => MethodId::MeeAnbar,
            "k2p" | "k2'" | "miettinen-nurminen" => MethodId::K2p,
            "k3" => MethodId::K3,
            "k4" | "k4-haldane" | "haldane" => MethodId::K4Haldane,
            "k4jp" | "k4'" | "k4p" | "jeffreys-perks" => MethodId::K4JeffreysPerks,
            "k5" | "wilson" => MethodId::K5Wilson,
            "k5cc" | "k5'" | "k5p" | "fleiss" => MethodId::K5Fleiss,
            "k6" => MethodId::K6,
            "k7" => MethodId::K7,
            "wang" | "exactcidiff" => {
                return Err(Error::Method(format!(
                    "'{s}' is not implemented here; the smallest one-sided exact interval \
                     is available in the R package ExactCIdiff. Valid methods: {}",
                    Self::tags()
                )))
            }
            _ => {
                return Err(Error::Method(format!(
                    "unknown method '{s}'. Valid methods: {}",
                    Self::tags()
                )))
            }
        };
        Ok(m)
    }
}

/// Notes attached to an interval whose formula needed special handling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diagnostic {
    /// A slightly negative radicand from rounding was clipped to zero.
    RadicandClipped,
    /// The cubic transform was replaced by its `b̂σ̂ → 0` limit.
    CubicLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalEstimate {
    pub lower: f64,
    pub upper: f64,
    pub gamma: f64,
    pub method: MethodId,
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<Diagnostic>,
}

impl IntervalEstimate {
    pub fn new(lower: f64, upper: f64, level: ConfidenceLevel, method: MethodId) -> Self {
        Self {
            lower,
            upper,
            gamma: level.gamma(),
            method,
            truncated: false,
            diagnostic: None,
        }
    }

    pub(crate) fn with_diagnostic(mut self, d: Option<Diagnostic>) -> Self {
        self.diagnostic = d;
        self
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Closed-interval membership.
    pub fn contains(&self, theta: f64) -> bool {
        self.lower <= theta && theta <= self.upper
    }

    /// Open-interval membership.
    pub fn contains_open(&self, theta: f64) -> bool {
        self.lower < theta && theta < self.upper
    }

    /// Interval for the relabelled experiment: `(−upper, −lower)`.
    pub fn reflected(&self) -> Self {
        Self {
            lower: -self.upper,
            upper: -self.lower,
            ..*self
        }
    }
}

/// Clamps both endpoints into `[-1, 1]`, flagging whether anything moved.
pub fn truncate(interval: IntervalEstimate) -> IntervalEstimate {
    let lower = interval.lower.clamp(-1.0, 1.0);
    let upper = interval.upper.clamp(-1.0, 1.0);
    IntervalEstimate {
        lower,
        upper,
        truncated: interval.truncated || lower != interval.lower || upper != interval.upper,
        ..interval
    }
}
