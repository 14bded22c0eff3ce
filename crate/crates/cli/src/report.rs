//! Analytic-versus-numeric comparison summaries.

use std::fmt;

use serde::Serialize;

use crate::table::format_number;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub label: String,
    pub max_abs_dev: f64,
    pub max_rel_dev: f64,
    /// Parameters of the point with the largest relative deviation.
    pub worst_point: Vec<(String, f64)>,
    pub tolerance: f64,
    pub pass: bool,
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let point: Vec<String> = self
            .worst_point
            .iter()
            .map(|(k, v)| format!("{k}={}", format_number(*v, 6)))
            .collect();
        write!(
            f,
            "{} {}: max |dev| = {}, max rel dev = {} at ({}), tolerance {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.label,
            format_number(self.max_abs_dev, 4),
            format_number(self.max_rel_dev, 4),
            point.join(", "),
            format_number(self.tolerance, 4),
        )
    }
}

/// Point parameters, reference value, candidate value.
type Sample = (Vec<(String, f64)>, f64, f64);

/// Accumulates deviations of `candidate` from `reference`.
///
/// The relative deviation divides by `max(|reference|, floor)`, where `floor`
/// is a fraction of the largest reference magnitude of the series; this keeps
/// points where the reference crosses zero from dominating.
#[derive(Debug, Clone)]
pub struct Comparison {
    label: String,
    floor_fraction: f64,
    points: Vec<Sample>,
}

impl Comparison {
    pub const DEFAULT_FLOOR: f64 = 1e-3;

    pub fn new(label: impl Into<String>) -> Self {
        Comparison {
            label: label.into(),
            floor_fraction: Self::DEFAULT_FLOOR,
            points: Vec::new(),
        }
    }

    pub fn add(&mut self, point: &[(&str, f64)], reference: f64, candidate: f64) {
        let point = point.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        self.points.push((point, reference, candidate));
    }

    pub fn finish(self, tolerance: f64) -> ComparisonReport {
        let scale = self.points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let floor = (self.floor_fraction * scale).max(f64::MIN_POSITIVE);
        let (mut max_abs, mut max_rel) = (0.0f64, 0.0f64);
        let mut worst = Vec::new();
        for (point, reference, candidate) in self.points {
            let abs = (candidate - reference).abs();
            let rel = abs / reference.abs().max(floor);
            max_abs = max_abs.max(abs);
            if rel > max_rel || worst.is_empty() {
                max_rel = rel.max(max_rel);
                worst = point;
            }
        }
        ComparisonReport {
            label: self.label,
            max_abs_dev: max_abs,
            max_rel_dev: max_rel,
            worst_point: worst,
            tolerance,
            pass: max_rel <= tolerance,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_within_tolerance() {
        let mut c = Comparison::new("x");
        c.add(&[("t", 1.0)], 1.0, 1.01);
        c.add(&[("t", 2.0)], 2.0, 2.2);
        c.add(&[("t", 0.0)], 0.0, 0.0);
        let r = c.clone().finish(0.05);
        assert!(!r.pass);
        assert!((r.max_rel_dev - 0.1).abs() < 1e-12);
        assert_eq!(r.worst_point, vec![("t".to_string(), 2.0)]);
        assert!(c.finish(0.2).pass);
    }
}
