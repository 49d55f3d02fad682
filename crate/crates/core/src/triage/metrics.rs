//! Confusion-matrix arithmetic for triage evaluation. Ratios with an empty
//! denominator are `None`, never NaN, so serialized metrics stay honest
//! about what was measurable.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl ConfusionCounts {
    pub fn new(tp: usize, fp: usize, tn: usize, fn_count: usize) -> ConfusionCounts {
        ConfusionCounts {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_count,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriageMetrics {
    pub counts: ConfusionCounts,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub false_positive_rate: Option<f64>,
    pub accuracy: Option<f64>,
}

fn ratio(numerator: usize, denominator: usize) -> Option<f64> {
    if denominator == 0 {
        None
    } else {
        Some(numerator as f64 / denominator as f64)
    }
}

pub fn compute_metrics(counts: &ConfusionCounts) -> TriageMetrics {
    TriageMetrics {
        counts: *counts,
        precision: ratio(counts.true_positives, counts.true_positives + counts.false_positives),
        recall: ratio(counts.true_positives, counts.true_positives + counts.false_negatives),
        false_positive_rate: ratio(
            counts.false_positives,
            counts.false_positives + counts.true_negatives,
        ),
        accuracy: ratio(counts.true_positives + counts.true_negatives, counts.total()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_reference_confusion_matrix() {
        let m = compute_metrics(&ConfusionCounts::new(7, 22, 50, 0));
        assert!((m.precision.unwrap() - 7.0 / 29.0).abs() < 1e-12);
        assert_eq!(m.recall, Some(1.0));
        assert!((m.false_positive_rate.unwrap() - 22.0 / 72.0).abs() < 1e-12);
        assert!((m.accuracy.unwrap() - 57.0 / 79.0).abs() < 1e-12);
    }

    #[test]
    fn test_empty_denominators_stay_none() {
        let m = compute_metrics(&ConfusionCounts::default());
        assert_eq!(m.precision, None);
        assert_eq!(m.recall, None);
        assert_eq!(m.false_positive_rate, None);
        assert_eq!(m.accuracy, None);

        let only_tn = compute_metrics(&ConfusionCounts::new(0, 0, 5, 0));
        assert_eq!(only_tn.precision, None);
        assert_eq!(only_tn.recall, None);
        assert_eq!(only_tn.false_positive_rate, Some(0.0));
        assert_eq!(only_tn.accuracy, Some(1.0));
    }

    #[test]
    fn test_metrics_serialize_null_for_unmeasurable_ratios() {
        let m = compute_metrics(&ConfusionCounts::new(0, 0, 0, 0));
        let json = serde_json::to_value(&m).unwrap();
        assert!(json["precision"].is_null());
    }
}
