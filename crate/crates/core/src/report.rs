//! The serializable outcome of one numerical check.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// How the ratio `lhs / rhs` is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// `ratio ≤ 1 + tol`: an inequality.
    AtMost,
    /// `|ratio − 1| ≤ tol`: an identity or an equality case.
    Equal,
    /// `ratio < 1 − tol`: a strict inequality.
    StrictlyBelow,
}

impl Expectation {
    pub fn holds(self, ratio: f64, tol: f64) -> bool {
        match self {
            Expectation::AtMost => ratio <= 1.0 + tol,
            Expectation::Equal => (ratio - 1.0).abs() <= tol,
            Expectation::StrictlyBelow => ratio < 1.0 - tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    /// Name of the mathematical statement being tested.
    pub anchor: String,
    /// SHA-256 of the input descriptor.
    pub inputs_digest: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub expectation: Expectation,
    pub pass: bool,
    /// `|ratio − 1| ≤ tolerance`
    pub equality: bool,
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn digest(descriptor: &str) -> String {
    hex::encode(Sha256::digest(descriptor.as_bytes()))
}

impl VerificationReport {
    /// Report comparing `lhs` against `rhs`; the ratio is `lhs / rhs`.
    pub fn compare(
        check: &str,
        anchor: &str,
        descriptor: &str,
        lhs: f64,
        rhs: f64,
        expectation: Expectation,
        tolerance: f64,
    ) -> Self {
        let ratio = lhs / rhs;
        let finite = ratio.is_finite();
        VerificationReport {
            check: check.to_string(),
            anchor: anchor.to_string(),
            inputs_digest: digest(descriptor),
            lhs,
            rhs,
            ratio,
            tolerance,
            expectation,
            pass: finite && expectation.holds(ratio, tolerance),
            equality: finite && (ratio - 1.0).abs() <= tolerance,
            wall_time_ms: 0.0,
            details: BTreeMap::new(),
            note: None,
        }
    }

    /// A residual-type check: passes when `residual ≤ tolerance`.
    /// Stored as `lhs = residual`, `rhs = tolerance`.
    pub fn residual(
        check: &str,
        anchor: &str,
        descriptor: &str,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        let mut r = Self::compare(
            check,
            anchor,
            descriptor,
            residual,
            tolerance,
            Expectation::AtMost,
            0.0,
        );
        r.equality = residual <= tolerance;
        r
    }

    /// A failed check that could not be evaluated.
    pub fn error(check: &str, anchor: &str, descriptor: &str, message: String) -> Self {
        let mut r = Self::compare(
            check,
            anchor,
            descriptor,
            f64::NAN,
            f64::NAN,
            Expectation::Equal,
            0.0,
        );
        r.pass = false;
        r.note = Some(message);
        r
    }

    pub fn with_detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    /// Same comparison judged against another expectation.
    pub fn with_expectation(mut self, expectation: Expectation) -> Self {
        self.expectation = expectation;
        self.pass = self.ratio.is_finite() && expectation.holds(self.ratio, self.tolerance);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        self
    }

    /// Same report without timing, for reproducibility comparisons.
    pub fn untimed(&self) -> Self {
        VerificationReport {
            wall_time_ms: 0.0,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}
