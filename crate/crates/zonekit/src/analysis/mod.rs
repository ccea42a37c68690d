//! Numerical checks of the geometric facts behind zone diagrams, bisector
//! computations and the two non-uniqueness demonstrations.

pub mod bisector;
pub mod lemmas;
pub mod nonunique;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::norms::Vector2;

pub use bisector::{
    bisector_scan, inflated_bisector_constant, inflated_bisector_y, BisectorSample,
};
pub use lemmas::{
    check_cone_lemma, check_dom_halfspace_convex, check_eps_neighborhood, check_region_convexity,
    check_strict_triangle, TriangleMode,
};
pub use nonunique::{
    demonstrate_inflated_nonuniqueness, demonstrate_l1_nonuniqueness, demonstrate_two_sites, NonUniqueness,
    NonUniquenessSummary,
};

/// Witness lists are truncated to this many entries; the violation count is
/// always exact.
pub const MAX_WITNESSES: usize = 1000;

/// Outcome of a sampled check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma_id: String,
    #[serde(rename = "samples")]
    pub samples_checked: usize,
    pub n_violations: usize,
    pub pass: bool,
    /// Offending locations, at most [`MAX_WITNESSES`].
    pub witnesses: Vec<Vector2>,
    /// Check-specific measurements.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metrics: BTreeMap<String, f64>,
}

impl LemmaReport {
    pub fn new(lemma_id: impl Into<String>) -> Self {
        LemmaReport {
            lemma_id: lemma_id.into(),
            samples_checked: 0,
            n_violations: 0,
            pass: true,
            witnesses: Vec::new(),
            metrics: BTreeMap::new(),
        }
    }

    pub fn violation(&mut self, at: Vector2) {
        self.n_violations += 1;
        self.pass = false;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(at);
        }
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    /// Combines two reports on the same check.
    pub fn merge(&mut self, other: LemmaReport) {
        self.samples_checked += other.samples_checked;
        self.n_violations += other.n_violations;
        self.pass &= other.pass;
        let room = MAX_WITNESSES.saturating_sub(self.witnesses.len());
        self.witnesses.extend(other.witnesses.into_iter().take(room));
        self.metrics.extend(other.metrics);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape() {
        let mut r = LemmaReport::new("x");
        r.samples_checked = 3;
        r.violation(Vector2::new(1.0, 2.0));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"lemma_id": "x", "samples": 3, "n_violations": 1, "pass": false, "witnesses": [[1.0, 2.0]]})
        );
    }

    #[test]
    fn witnesses_are_capped_but_counted() {
        let mut r = LemmaReport::new("x");
        for k in 0..MAX_WITNESSES + 5 {
            r.violation(Vector2::new(k as f64, 0.0));
        }
        assert_eq!(r.n_violations, MAX_WITNESSES + 5);
        assert_eq!(r.witnesses.len(), MAX_WITNESSES);
        let mut ok = LemmaReport::new("x");
        ok.merge(r);
        assert!(!ok.pass);
    }
}
