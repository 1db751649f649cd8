use serde::{Deserialize, Serialize};

/// Absolute/relative tolerance pair shared by every scalar comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-9, rel: 1e-9 }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    /// Slack allowed when comparing quantities of magnitude `scale`.
    pub fn slack(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs()
    }

    /// `a <= b` up to the tolerance at the larger magnitude.
    pub fn le(&self, a: f64, b: f64) -> bool {
        a <= b + self.slack(a.abs().max(b.abs()))
    }

    pub fn eq(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.slack(a.abs().max(b.abs()))
    }
}

/// Certificate line: an inequality `lhs <= rhs` checked at a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

impl Certificate {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        Certificate {
            name: name.into(),
            lhs,
            rhs,
            pass: lhs <= rhs + slack,
        }
    }
}

pub fn all_pass(certs: &[Certificate]) -> bool {
    certs.iter().all(|c| c.pass)
}
