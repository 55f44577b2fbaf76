//! Label-level quality metrics for reward models.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::RewardLabel;

/// 3×3 count matrix indexed `(gold, predicted)` in label order
/// negative, neutral, positive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix3 {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix3 {
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (RewardLabel, RewardLabel)>,
    {
        let mut counts = [[0u64; 3]; 3];
        for (gold, predicted) in pairs {
            counts[gold.index()][predicted.index()] += 1;
        }
        Self { counts }
    }

    pub fn record(&mut self, gold: RewardLabel, predicted: RewardLabel) {
        self.counts[gold.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Times `label` appears as the gold verdict.
    pub fn gold_total(&self, label: RewardLabel) -> u64 {
        self.counts[label.index()].iter().sum()
    }

    /// Times `label` was predicted.
    pub fn predicted_total(&self, label: RewardLabel) -> u64 {
        self.counts.iter().map(|row| row[label.index()]).sum()
    }

    pub fn misclassified(&self) -> u64 {
        let mut total = 0;
        for (g, row) in self.counts.iter().enumerate() {
            for (p, &count) in row.iter().enumerate() {
                if g != p {
                    total += count;
                }
            }
        }
        total
    }

    /// Positive↔negative swaps: the most damaging error class.
    pub fn penalty_swaps(&self) -> u64 {
        let pos = RewardLabel::Positive.index();
        let neg = RewardLabel::Negative.index();
        self.counts[pos][neg] + self.counts[neg][pos]
    }

    /// Expands the matrix back into a pair list (gold-major order). Metrics
    /// computed from the matrix and from the regenerated pairs agree
    /// exactly.
    pub fn to_pairs(&self) -> alloc::vec::Vec<(RewardLabel, RewardLabel)> {
        let mut pairs = alloc::vec::Vec::new();
        for (g, row) in self.counts.iter().enumerate() {
            for (p, &count) in row.iter().enumerate() {
                for _ in 0..count {
                    pairs.push((
                        RewardLabel::from_index(g).unwrap(),
                        RewardLabel::from_index(p).unwrap(),
                    ));
                }
            }
        }
        pairs
    }
}

/// A ratio that may be undefined for a label class absent from the data.
/// Serialized as a number or `null`, never NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricValue {
    Defined(f64),
    Undefined,
}

impl MetricValue {
    pub fn value(self) -> Option<f64> {
        match self {
            MetricValue::Defined(v) => Some(v),
            MetricValue::Undefined => None,
        }
    }
}

/// Precision/recall for one label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub precision: MetricValue,
    pub recall: MetricValue,
}

/// Per-label precision/recall plus the penalty miss rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrmMetrics {
    pub negative: LabelMetrics,
    pub neutral: LabelMetrics,
    pub positive: LabelMetrics,
    /// Among all misclassified steps, the fraction that are
    /// positive↔negative swaps; 0 for a perfect classifier.
    pub penalty_miss_rate: f64,
    pub total: u64,
    pub misclassified: u64,
}

impl PrmMetrics {
    pub fn for_label(&self, label: RewardLabel) -> &LabelMetrics {
        match label {
            RewardLabel::Negative => &self.negative,
            RewardLabel::Neutral => &self.neutral,
            RewardLabel::Positive => &self.positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("cannot compute metrics over an empty pair list")]
    EmptyInput,
}

fn label_metrics(matrix: &ConfusionMatrix3, label: RewardLabel) -> LabelMetrics {
    let tp = matrix.counts[label.index()][label.index()];
    let predicted = matrix.predicted_total(label);
    let gold = matrix.gold_total(label);
    let precision = if predicted > 0 {
        MetricValue::Defined(tp as f64 / predicted as f64)
    } else if gold > 0 {
        // Present in gold but never predicted.
        MetricValue::Defined(0.0)
    } else {
        MetricValue::Undefined
    };
    let recall = if gold > 0 {
        MetricValue::Defined(tp as f64 / gold as f64)
    } else {
        MetricValue::Undefined
    };
    LabelMetrics { precision, recall }
}

/// Metrics from an already-accumulated confusion matrix.
pub fn metrics_from_matrix(matrix: &ConfusionMatrix3) -> Result<PrmMetrics, MetricsError> {
    let total = matrix.total();
    if total == 0 {
        return Err(MetricsError::EmptyInput);
    }
    let misclassified = matrix.misclassified();
    let penalty_miss_rate = if misclassified == 0 {
        0.0
    } else {
        matrix.penalty_swaps() as f64 / misclassified as f64
    };
    Ok(PrmMetrics {
        negative: label_metrics(matrix, RewardLabel::Negative),
        neutral: label_metrics(matrix, RewardLabel::Neutral),
        positive: label_metrics(matrix, RewardLabel::Positive),
        penalty_miss_rate,
        total,
        misclassified,
    })
}

/// Standard per-label precision/recall over `(gold, predicted)` pairs,
/// plus the penalty miss rate. Permutation-invariant over the input.
pub fn compute_metrics<I>(pairs: I) -> Result<PrmMetrics, MetricsError>
where
    I: IntoIterator<Item = (RewardLabel, RewardLabel)>,
{
    metrics_from_matrix(&ConfusionMatrix3::from_pairs(pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use RewardLabel::{Negative as Neg, Neutral as Neu, Positive as Pos};

    #[test]
    fn perfect_predictor() {
        let pairs = vec![(Pos, Pos), (Neg, Neg), (Neu, Neu), (Pos, Pos)];
        let m = compute_metrics(pairs).unwrap();
        for label in RewardLabel::ALL {
            assert_eq!(m.for_label(label).precision, MetricValue::Defined(1.0));
            assert_eq!(m.for_label(label).recall, MetricValue::Defined(1.0));
        }
        assert_eq!(m.penalty_miss_rate, 0.0);
        assert_eq!(m.misclassified, 0);
    }

    #[test]
    fn hand_computed_fixture() {
        // (pos,neg),(neg,pos),(neu,pos),(pos,pos): misclassified=3,
        // penalty swaps=2, precision(pos)=1/3, recall(pos)=1/2.
        let pairs = vec![(Pos, Neg), (Neg, Pos), (Neu, Pos), (Pos, Pos)];
        let m = compute_metrics(pairs).unwrap();
        assert_eq!(m.misclassified, 3);
        assert_eq!(m.penalty_miss_rate, 2.0 / 3.0);
        assert_eq!(m.positive.precision, MetricValue::Defined(1.0 / 3.0));
        assert_eq!(m.positive.recall, MetricValue::Defined(1.0 / 2.0));
    }

    #[test]
    fn absent_label_is_undefined_not_nan() {
        // Neutral never appears in gold or predictions.
        let pairs = vec![(Pos, Pos), (Neg, Neg)];
        let m = compute_metrics(pairs).unwrap();
        assert_eq!(m.neutral.precision, MetricValue::Undefined);
        assert_eq!(m.neutral.recall, MetricValue::Undefined);
        assert_eq!(m.penalty_miss_rate, 0.0);
        let json = serde_json::to_string(&m.neutral).unwrap();
        assert_eq!(json, r#"{"precision":null,"recall":null}"#);
    }

    #[test]
    fn never_predicted_but_present_gets_zero_precision() {
        let pairs = vec![(Neu, Pos), (Pos, Pos)];
        let m = compute_metrics(pairs).unwrap();
        assert_eq!(m.neutral.precision, MetricValue::Defined(0.0));
        assert_eq!(m.neutral.recall, MetricValue::Defined(0.0));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(
            compute_metrics(core::iter::empty()),
            Err(MetricsError::EmptyInput)
        );
    }

    #[test]
    fn permutation_invariant() {
        let a = vec![(Pos, Neg), (Neg, Pos), (Neu, Neu), (Pos, Pos)];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(compute_metrics(a).unwrap(), compute_metrics(b).unwrap());
    }

    #[test]
    fn matrix_round_trip_agrees() {
        let pairs = vec![(Pos, Neg), (Neg, Pos), (Neu, Pos), (Pos, Pos), (Neg, Neg)];
        let matrix = ConfusionMatrix3::from_pairs(pairs);
        let direct = metrics_from_matrix(&matrix).unwrap();
        let regenerated = compute_metrics(matrix.to_pairs()).unwrap();
        assert_eq!(direct, regenerated);
    }
}
