//! Inequality reports shared by every checker.

use serde::{Deserialize, Serialize};

/// Default tolerance for checks whose terms are all closed forms.
pub const EXACT_TOL: f64 = 1e-9;
/// Default tolerance for checks that rely on convex-roof search.
pub const OPTIMIZER_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Holds,
    Violated,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Holds => "HOLDS",
            Verdict::Violated => "VIOLATED",
            Verdict::Indeterminate => "INDETERMINATE",
        }
    }
}

/// How a reported side relates to the true value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Exact,
    /// Reported value is at least the true value.
    Upper,
    /// Reported value is at most the true value.
    Lower,
}

impl Bound {
    pub fn as_str(&self) -> &'static str {
        match self {
            Bound::Exact => "exact",
            Bound::Upper => "upper",
            Bound::Lower => "lower",
        }
    }

    fn at_least_true(self) -> bool {
        matches!(self, Bound::Exact | Bound::Upper)
    }

    fn at_most_true(self) -> bool {
        matches!(self, Bound::Exact | Bound::Lower)
    }

    /// Bound of a sum whose terms carry `self` and `other`.
    pub fn combine(self, other: Bound) -> Option<Bound> {
        match (self, other) {
            (Bound::Exact, b) | (b, Bound::Exact) => Some(b),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// lhs <= rhs
    AtMost,
    /// lhs >= rhs
    AtLeast,
    /// lhs == rhs; slack is -|lhs - rhs|
    Equal,
}

/// One evaluated inequality instance. `slack >= 0` always means the
/// inequality holds at the reported values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub lhs_bound: Bound,
    pub rhs_bound: Bound,
    pub tolerance: f64,
    pub state_descriptor: String,
}

impl InequalityReport {
    /// Computes slack and a verdict that is certified only when the bound
    /// directions of both sides support it.
    pub fn assess(
        name: &str,
        q: f64,
        relation: Relation,
        (lhs, lhs_bound): (f64, Bound),
        (rhs, rhs_bound): (f64, Bound),
        tolerance: f64,
    ) -> Self {
        let (slack, holds_certified, violation_certified) = match relation {
            Relation::AtMost => (
                rhs - lhs,
                lhs_bound.at_least_true() && rhs_bound.at_most_true(),
                lhs_bound.at_most_true() && rhs_bound.at_least_true(),
            ),
            Relation::AtLeast => (
                lhs - rhs,
                lhs_bound.at_most_true() && rhs_bound.at_least_true(),
                lhs_bound.at_least_true() && rhs_bound.at_most_true(),
            ),
            Relation::Equal => {
                let exact = lhs_bound == Bound::Exact && rhs_bound == Bound::Exact;
                (-(lhs - rhs).abs(), exact, exact)
            }
        };
        let verdict = if slack >= -tolerance && holds_certified {
            Verdict::Holds
        } else if slack < -tolerance && violation_certified {
            Verdict::Violated
        } else {
            Verdict::Indeterminate
        };
        Self {
            name: name.to_string(),
            q,
            lhs,
            rhs,
            slack,
            verdict,
            lhs_bound,
            rhs_bound,
            tolerance,
            state_descriptor: String::new(),
        }
    }

    pub fn with_descriptor(mut self, descriptor: impl Into<String>) -> Self {
        self.state_descriptor = descriptor.into();
        self
    }

    pub fn is_exact(&self) -> bool {
        self.lhs_bound == Bound::Exact && self.rhs_bound == Bound::Exact
    }
}
