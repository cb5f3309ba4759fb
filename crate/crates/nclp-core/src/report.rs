//! Check reports: the one-record-per-trial schema every checker emits.
//!
//! A report captures a single inequality evaluation — both sides, the
//! slack `rhs − lhs`, the tolerance in force, and a digest of the inputs
//! so a failing trial can be matched to its reproduction file. Reports
//! serialize as single JSON lines (NDJSON); a run appends a summary record
//! at the end. Byte-determinism matters: the same config and seed must
//! produce identical report files, so nothing time- or schedule-dependent
//! belongs in these records.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::matcore::SquareMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// One checked inequality: `lhs ≤ rhs` up to `tolerance`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub inputs_digest: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; negative means the inequality is violated by that much.
    pub slack: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub seed: u64,
    pub p_q_params: Vec<f64>,
}

impl CheckReport {
    /// Builds a report; the verdict is `pass` iff `slack ≥ −tolerance`.
    pub fn new(
        check_name: impl Into<String>,
        inputs_digest: String,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        seed: u64,
        p_q_params: Vec<f64>,
    ) -> Self {
        let slack = rhs - lhs;
        let verdict = if slack >= -tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            check_name: check_name.into(),
            inputs_digest,
            lhs,
            rhs,
            slack,
            tolerance,
            verdict,
            seed,
            p_q_params,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// The amount by which the check failed (0 for passing checks).
    pub fn violation(&self) -> f64 {
        if self.slack < 0.0 {
            -self.slack
        } else {
            0.0
        }
    }

    /// One NDJSON line, no trailing newline.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Trailing summary of a run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub pass_count: usize,
    pub fail_count: usize,
    /// Largest violation across all trials; 0.0 when everything passed.
    pub max_violation: f64,
}

impl RunSummary {
    pub fn from_reports<'a>(reports: impl IntoIterator<Item = &'a CheckReport>) -> Self {
        let mut pass_count = 0;
        let mut fail_count = 0;
        let mut max_violation = 0.0f64;
        for r in reports {
            if r.passed() {
                pass_count += 1;
            } else {
                fail_count += 1;
            }
            max_violation = max_violation.max(r.violation());
        }
        Self {
            pass_count,
            fail_count,
            max_violation,
        }
    }

    pub fn to_json_line(&self) -> String {
        format!(
            "{{\"summary\":{}}}",
            serde_json::to_string(self).expect("summary serialization cannot fail")
        )
    }
}

/// Canonical digest of a list of matrices: SHA-256 over dimension and
/// row-major entry bits, truncated to 16 hex characters. Identical inputs
/// digest identically across platforms (the bytes are the `f64` bits).
pub fn digest_matrices(inputs: &[&SquareMatrix]) -> String {
    let mut hasher = Sha256::new();
    for x in inputs {
        hasher.update((x.dim() as u64).to_le_bytes());
        for r in 0..x.dim() {
            for c in 0..x.dim() {
                let v = x.entry(r, c);
                hasher.update(v.re.to_bits().to_le_bytes());
                hasher.update(v.im.to_bits().to_le_bytes());
            }
        }
    }
    hex::encode(&hasher.finalize()[..8])
}

/// Digest for checks whose inputs are plain parameters, not matrices.
pub fn digest_params(params: &[f64]) -> String {
    let mut hasher = Sha256::new();
    for p in params {
        hasher.update(p.to_bits().to_le_bytes());
    }
    hex::encode(&hasher.finalize()[..8])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;

    #[test]
    fn verdict_follows_slack_and_tolerance() {
        let pass = CheckReport::new("t", String::new(), 1.0, 2.0, 0.0, 0, vec![]);
        assert!(pass.passed());
        assert_eq!(pass.violation(), 0.0);
        let brim = CheckReport::new("t", String::new(), 2.0 + 1e-10, 2.0, 1e-9, 0, vec![]);
        assert!(brim.passed());
        let fail = CheckReport::new("t", String::new(), 2.1, 2.0, 1e-9, 0, vec![]);
        assert!(!fail.passed());
        assert!((fail.violation() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn json_line_roundtrips() {
        let r = CheckReport::new(
            "schur-half",
            "abcd".into(),
            0.4999,
            0.5,
            1e-9,
            42,
            vec![2.0, 1.5],
        );
        let line = r.to_json_line();
        assert!(!line.contains('\n'));
        let back: CheckReport = serde_json::from_str(&line).unwrap();
        assert_eq!(back.check_name, "schur-half");
        assert_eq!(back.seed, 42);
        assert_eq!(back.lhs.to_bits(), r.lhs.to_bits());
        assert!(back.passed());
    }

    #[test]
    fn digest_is_input_sensitive_and_stable() {
        let mut rng = sample::trial_rng(80, 0);
        let x = sample::gaussian_matrix(4, &mut rng);
        let y = sample::gaussian_matrix(4, &mut rng);
        let dx = digest_matrices(&[&x]);
        assert_eq!(dx.len(), 16);
        assert_eq!(dx, digest_matrices(&[&x]));
        assert_ne!(dx, digest_matrices(&[&y]));
        assert_ne!(digest_matrices(&[&x, &y]), digest_matrices(&[&y, &x]));
    }

    #[test]
    fn summary_aggregates_violations() {
        let reports = vec![
            CheckReport::new("a", String::new(), 1.0, 2.0, 0.0, 0, vec![]),
            CheckReport::new("a", String::new(), 3.0, 2.0, 1e-9, 0, vec![]),
            CheckReport::new("a", String::new(), 2.5, 2.0, 1e-9, 0, vec![]),
        ];
        let s = RunSummary::from_reports(&reports);
        assert_eq!(s.pass_count, 1);
        assert_eq!(s.fail_count, 2);
        assert!((s.max_violation - 1.0).abs() <= 1e-12);
        let line = s.to_json_line();
        assert!(line.starts_with("{\"summary\":{"));
    }
}
