//! Audit reports: structured, deterministic summaries of identity checks.
//!
//! Every audit walks a deterministic sample set, compares two independently
//! computed values per sample, and produces an [`AuditReport`] with the worst
//! offenders. Reports serialize to JSON with a stable field order and no
//! wall-clock data, so byte-identical reruns stay byte-identical.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// A floating-point metric that serializes non-finite values as strings, so
/// divergence witnesses survive the trip through JSON.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metric(pub f64);

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else if self.0.is_nan() {
            s.serialize_str("nan")
        } else if self.0 > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
}

/// One of the worst samples of an audit.
#[derive(Debug, Clone, Serialize)]
pub struct Offender {
    pub point: Vec<f64>,
    pub lhs: Metric,
    pub rhs: Metric,
    pub error: Metric,
    /// Escape direction for samples where a supremum grew without bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

/// Outcome of a single identity audit over one family.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub id: String,
    pub family: String,
    pub samples: usize,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub worst: Vec<Offender>,
    pub diverged: Option<usize>,
    pub note: Option<String>,
}

impl Serialize for AuditReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("AuditReport", 10)?;
        st.serialize_field("id", &self.id)?;
        st.serialize_field("family", &self.family)?;
        st.serialize_field("samples", &self.samples)?;
        st.serialize_field("max_abs_error", &Metric(self.max_abs_error))?;
        st.serialize_field("max_rel_error", &Metric(self.max_rel_error))?;
        st.serialize_field("tolerance", &self.tolerance)?;
        st.serialize_field("verdict", &self.verdict)?;
        st.serialize_field("worst", &self.worst)?;
        st.serialize_field("diverged", &self.diverged)?;
        st.serialize_field("note", &self.note)?;
        st.end()
    }
}

impl AuditReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    /// One-line summary in the `PASS <id> ...` form used by the acceptance
    /// harness and the CLI.
    pub fn status_line(&self) -> String {
        format!(
            "{} {:<14} family={:<24} samples={:<4} max_err={:.3e} tol={:.1e}{}",
            if self.holds() { "PASS" } else { "FAIL" },
            self.id,
            self.family,
            self.samples,
            self.max_abs_error,
            self.tolerance,
            match self.diverged {
                Some(d) if d > 0 => format!(" diverged={d}"),
                _ => String::new(),
            }
        )
    }
}

/// Incremental builder; keeps the worst few samples and the error maxima.
pub struct AuditBuilder {
    id: String,
    family: String,
    tolerance: f64,
    samples: usize,
    max_abs: f64,
    max_rel: f64,
    worst: Vec<(f64, usize, Offender)>,
    diverged: Option<usize>,
    note: Option<String>,
    kept: usize,
}

impl AuditBuilder {
    pub fn new(id: &str, family: &str, tolerance: f64) -> Self {
        AuditBuilder {
            id: id.to_string(),
            family: family.to_string(),
            tolerance,
            samples: 0,
            max_abs: 0.0,
            max_rel: 0.0,
            worst: Vec::new(),
            diverged: None,
            note: None,
            kept: crate::constants::WORST_KEPT,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Enable divergence counting (reports `diverged: 0` instead of null).
    pub fn track_divergence(mut self) -> Self {
        self.diverged = Some(0);
        self
    }

    pub fn record(&mut self, point: &[f64], lhs: f64, rhs: f64) {
        let err = (lhs - rhs).abs();
        let rel = err / lhs.abs().max(rhs.abs()).max(1.0);
        self.samples += 1;
        if err.is_nan() {
            self.max_abs = f64::NAN;
        } else {
            self.max_abs = self.max_abs.max(err);
            self.max_rel = self.max_rel.max(rel);
        }
        self.keep(
            err,
            Offender {
                point: point.to_vec(),
                lhs: Metric(lhs),
                rhs: Metric(rhs),
                error: Metric(err),
                witness: None,
            },
        );
    }

    /// Record a sample whose comparison blew up (e.g. an escape ray of an
    /// unbounded supremum). Counts toward the divergence tally and forces a
    /// failing verdict.
    pub fn record_diverged(&mut self, point: &[f64], lhs: f64, witness: &[f64]) {
        self.samples += 1;
        *self.diverged.get_or_insert(0) += 1;
        self.max_abs = f64::INFINITY;
        self.keep(
            f64::INFINITY,
            Offender {
                point: point.to_vec(),
                lhs: Metric(lhs),
                rhs: Metric(f64::INFINITY),
                error: Metric(f64::INFINITY),
                witness: Some(witness.to_vec()),
            },
        );
    }

    fn keep(&mut self, err: f64, off: Offender) {
        let order = self.samples;
        self.worst.push((err, order, off));
        self.worst.sort_by(|a, b| {
            b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1))
        });
        self.worst.truncate(self.kept);
    }

    pub fn finish(self) -> AuditReport {
        let failed = !(self.max_abs <= self.tolerance) || self.diverged.unwrap_or(0) > 0;
        AuditReport {
            id: self.id,
            family: self.family,
            samples: self.samples,
            max_abs_error: self.max_abs,
            max_rel_error: self.max_rel,
            tolerance: self.tolerance,
            verdict: if failed { Verdict::Fails } else { Verdict::Holds },
            worst: self.worst.into_iter().map(|(_, _, o)| o).collect(),
            diverged: self.diverged,
            note: self.note,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_tolerance() {
        let mut b = AuditBuilder::new("check", "fam", 1e-6);
        b.record(&[0.0], 1.0, 1.0 + 5e-7);
        assert!(b.finish().holds());

        let mut b = AuditBuilder::new("check", "fam", 1e-6);
        b.record(&[0.0], 1.0, 1.0 + 5e-6);
        let r = b.finish();
        assert!(!r.holds());
        assert_eq!(r.samples, 1);
    }

    #[test]
    fn worst_list_is_sorted_and_capped() {
        let mut b = AuditBuilder::new("check", "fam", 1e-9);
        for i in 0..10 {
            b.record(&[i as f64], 0.0, (i as f64) * 1e-3);
        }
        let r = b.finish();
        assert_eq!(r.worst.len(), crate::constants::WORST_KEPT);
        assert_eq!(r.worst[0].point[0], 9.0);
        assert!(r.worst[0].error.0 >= r.worst[1].error.0);
    }

    #[test]
    fn divergence_forces_failure_and_serializes_as_string() {
        let mut b = AuditBuilder::new("check", "fam", 1e-3).track_divergence();
        b.record(&[0.0], 1.0, 1.0);
        b.record_diverged(&[1.0], -0.5, &[0.5, 0.5]);
        let r = b.finish();
        assert!(!r.holds());
        assert_eq!(r.diverged, Some(1));
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"inf\""));
        assert!(json.contains("\"diverged\":1"));
    }

    #[test]
    fn nan_comparison_fails() {
        let mut b = AuditBuilder::new("check", "fam", 1e-3);
        b.record(&[0.0], f64::NAN, 1.0);
        assert!(!b.finish().holds());
    }
}
