//! Step-scoring contract and table-driven reward models.
//!
//! A [`RewardModel`] assigns exactly one [`RewardLabel`] to a
//! `(previous_data, step)` pair or returns a typed error — it never
//! silently defaults. The oracle implementation over synthetic trees lives
//! in [`crate::synthetic`]; the remote client lives in the std companion
//! crate.

use alloc::collections::BTreeMap;
use alloc::string::String;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::RewardLabel;
use crate::seed;

/// One step to score, in the context of everything accepted before it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RewardRequest {
    /// Prompt plus accepted steps, rendered as one text.
    pub previous_data: String,
    /// The step under evaluation. Must be non-empty.
    pub step: String,
}

impl RewardRequest {
    pub fn new(previous_data: impl Into<String>, step: impl Into<String>) -> Self {
        Self {
            previous_data: previous_data.into(),
            step: step.into(),
        }
    }

    /// Stable hash of the request, used to seed per-request corruption so
    /// that scoring is independent of call order.
    pub fn stable_hash(&self) -> u64 {
        seed::fnv1a_parts(&[self.previous_data.as_bytes(), self.step.as_bytes()])
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("step must be non-empty")]
    EmptyStep,
    #[error("no table entry for the given (previous_data, step) pair")]
    TableMiss,
    #[error("step does not belong to the oracle's tree: {step:?}")]
    UnknownStep { step: String },
    #[error("remote scoring failed (status {status:?}): {message}")]
    Remote {
        status: Option<u16>,
        message: String,
    },
    #[error("unmappable label in response: {raw:?}")]
    MalformedResponse { raw: String },
}

/// Contract for step scoring. Total: exactly one label or a typed error.
pub trait RewardModel {
    fn score_step(&mut self, request: &RewardRequest) -> Result<RewardLabel, RewardError>;
}

impl<R: RewardModel + ?Sized> RewardModel for &mut R {
    fn score_step(&mut self, request: &RewardRequest) -> Result<RewardLabel, RewardError> {
        (**self).score_step(request)
    }
}

/// Row-stochastic corruption applied to true labels, modelling an
/// imperfect reward model. `rows[true_label][predicted_label]` is the
/// probability of emitting `predicted_label` when the truth is
/// `true_label`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelNoise {
    pub rows: [[f64; 3]; 3],
}

impl LabelNoise {
    /// No corruption: every label passes through unchanged.
    pub fn identity() -> Self {
        Self {
            rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Flips each label with probability `p`, splitting the mass evenly
    /// between the two wrong labels.
    pub fn uniform(p: f64) -> Self {
        assert!((0.0..1.0).contains(&p), "corruption probability must be in [0, 1)");
        let keep = 1.0 - p;
        let off = p / 2.0;
        let mut rows = [[0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = if i == j { keep } else { off };
            }
        }
        Self { rows }
    }

    pub fn is_identity(&self) -> bool {
        self == &Self::identity()
    }

    /// Rejects rows that are not probability distributions.
    pub fn validate(&self) -> Result<(), InvalidNoise> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(InvalidNoise { row: i });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(InvalidNoise { row: i });
            }
        }
        Ok(())
    }

    /// Samples a (possibly corrupted) label for `true_label`,
    /// deterministically for a given `(noise_seed, request)` pair.
    pub fn sample(
        &self,
        true_label: RewardLabel,
        noise_seed: u64,
        request: &RewardRequest,
    ) -> RewardLabel {
        if self.is_identity() {
            return true_label;
        }
        let mut rng = seed::rng_from(noise_seed, "label-noise", request.stable_hash());
        let draw: f64 = rng.random();
        let row = &self.rows[true_label.index()];
        let mut acc = 0.0;
        for (j, p) in row.iter().enumerate() {
            acc += p;
            if draw < acc {
                return RewardLabel::from_index(j).unwrap();
            }
        }
        // Guard against rounding at the top of the cumulative sum.
        RewardLabel::Positive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("noise row {row} is not a probability distribution")]
pub struct InvalidNoise {
    pub row: usize,
}

/// Exact-match lookup over `(previous_data, step)` pairs, typically loaded
/// from a step-reward JSONL file.
#[derive(Debug, Clone, Default)]
pub struct TableRewardModel {
    entries: BTreeMap<(String, String), RewardLabel>,
}

impl TableRewardModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (RewardRequest, RewardLabel)>,
    {
        let entries = pairs
            .into_iter()
            .map(|(req, label)| ((req.previous_data, req.step), label))
            .collect();
        Self { entries }
    }

    pub fn insert(&mut self, request: RewardRequest, label: RewardLabel) {
        self.entries
            .insert((request.previous_data, request.step), label);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl RewardModel for TableRewardModel {
    fn score_step(&mut self, request: &RewardRequest) -> Result<RewardLabel, RewardError> {
        if request.step.is_empty() {
            return Err(RewardError::EmptyStep);
        }
        self.entries
            .get(&(request.previous_data.clone(), request.step.clone()))
            .copied()
            .ok_or(RewardError::TableMiss)
    }
}

/// Degenerate model that labels every step the same. The all-positive
/// variant makes sample-then-filter a no-op, which pins down the filter's
/// behaviour in tests.
#[derive(Debug, Clone, Copy)]
pub struct ConstantRewardModel(pub RewardLabel);

impl RewardModel for ConstantRewardModel {
    fn score_step(&mut self, request: &RewardRequest) -> Result<RewardLabel, RewardError> {
        if request.step.is_empty() {
            return Err(RewardError::EmptyStep);
        }
        Ok(self.0)
    }
}

/// Ablation wrapper collapsing neutral verdicts into a fixed label at
/// scoring time. Off by default everywhere; construct explicitly.
#[derive(Debug, Clone)]
pub struct CollapseNeutral<R> {
    inner: R,
    target: RewardLabel,
}

impl<R> CollapseNeutral<R> {
    pub fn new(inner: R, target: RewardLabel) -> Self {
        Self { inner, target }
    }
}

impl<R: RewardModel> RewardModel for CollapseNeutral<R> {
    fn score_step(&mut self, request: &RewardRequest) -> Result<RewardLabel, RewardError> {
        match self.inner.score_step(request)? {
            RewardLabel::Neutral => Ok(self.target),
            other => Ok(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn table_lookup_and_miss() {
        let mut model = TableRewardModel::from_pairs(vec![(
            RewardRequest::new("prev", "step\n"),
            RewardLabel::Negative,
        )]);
        assert_eq!(
            model
                .score_step(&RewardRequest::new("prev", "step\n"))
                .unwrap(),
            RewardLabel::Negative
        );
        assert_eq!(
            model.score_step(&RewardRequest::new("prev", "other\n")),
            Err(RewardError::TableMiss)
        );
    }

    #[test]
    fn empty_step_rejected() {
        let mut model = ConstantRewardModel(RewardLabel::Positive);
        assert_eq!(
            model.score_step(&RewardRequest::new("p", "")),
            Err(RewardError::EmptyStep)
        );
    }

    #[test]
    fn identity_noise_passes_through() {
        let noise = LabelNoise::identity();
        let req = RewardRequest::new("p", "s");
        for label in RewardLabel::ALL {
            assert_eq!(noise.sample(label, 1, &req), label);
        }
    }

    #[test]
    fn noise_is_per_request_deterministic() {
        let noise = LabelNoise::uniform(0.5);
        let req = RewardRequest::new("p", "s");
        let first = noise.sample(RewardLabel::Positive, 9, &req);
        for _ in 0..10 {
            assert_eq!(noise.sample(RewardLabel::Positive, 9, &req), first);
        }
    }

    #[test]
    fn noise_frequency_matches_configuration() {
        // Row positive -> {pos: 0.8, neu: 0.1, neg: 0.1}, 10000 trials.
        let noise = LabelNoise {
            rows: [
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.1, 0.1, 0.8],
            ],
        };
        noise.validate().unwrap();
        let mut counts = [0usize; 3];
        for i in 0..10_000 {
            let req = RewardRequest::new("prev", alloc::format!("step {i}"));
            let label = noise.sample(RewardLabel::Positive, 42, &req);
            counts[label.index()] += 1;
        }
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / 10_000.0).collect();
        assert!((freq[0] - 0.1).abs() <= 0.02, "neg freq {}", freq[0]);
        assert!((freq[1] - 0.1).abs() <= 0.02, "neu freq {}", freq[1]);
        assert!((freq[2] - 0.8).abs() <= 0.02, "pos freq {}", freq[2]);
    }

    #[test]
    fn invalid_noise_rejected() {
        let bad = LabelNoise {
            rows: [[0.5, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        assert_eq!(bad.validate(), Err(InvalidNoise { row: 0 }));
    }

    #[test]
    fn collapse_neutral_wrapper() {
        let mut model =
            CollapseNeutral::new(ConstantRewardModel(RewardLabel::Neutral), RewardLabel::Negative);
        assert_eq!(
            model.score_step(&RewardRequest::new("p", "s")).unwrap(),
            RewardLabel::Negative
        );
        let mut keep =
            CollapseNeutral::new(ConstantRewardModel(RewardLabel::Positive), RewardLabel::Negative);
        assert_eq!(
            keep.score_step(&RewardRequest::new("p", "s")).unwrap(),
            RewardLabel::Positive
        );
    }

    #[test]
    fn request_hash_is_framed() {
        let a = RewardRequest::new("ab", "c").stable_hash();
        let b = RewardRequest::new("a", "bc").stable_hash();
        assert_ne!(a, b);
    }
}
