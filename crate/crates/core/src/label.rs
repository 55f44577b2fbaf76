//! Three-way step verdicts.

use core::fmt;

use serde::{Deserialize, Serialize};

/// Verdict a reward model assigns to one reasoning step.
///
/// Maps bijectively onto the integers: negative ↔ -1, neutral ↔ 0,
/// positive ↔ +1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardLabel {
    Negative,
    Neutral,
    Positive,
}

impl RewardLabel {
    pub const ALL: [RewardLabel; 3] = [
        RewardLabel::Negative,
        RewardLabel::Neutral,
        RewardLabel::Positive,
    ];

    /// Signed numeric value of the label.
    pub fn as_int(self) -> i64 {
        match self {
            RewardLabel::Negative => -1,
            RewardLabel::Neutral => 0,
            RewardLabel::Positive => 1,
        }
    }

    /// Inverse of [`as_int`](Self::as_int); rejects anything outside
    /// {-1, 0, 1}.
    pub fn from_int(value: i64) -> Option<RewardLabel> {
        match value {
            -1 => Some(RewardLabel::Negative),
            0 => Some(RewardLabel::Neutral),
            1 => Some(RewardLabel::Positive),
            _ => None,
        }
    }

    /// Dense index used by confusion matrices: negative=0, neutral=1,
    /// positive=2.
    pub fn index(self) -> usize {
        match self {
            RewardLabel::Negative => 0,
            RewardLabel::Neutral => 1,
            RewardLabel::Positive => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<RewardLabel> {
        RewardLabel::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RewardLabel::Negative => "negative",
            RewardLabel::Neutral => "neutral",
            RewardLabel::Positive => "positive",
        }
    }
}

impl fmt::Display for RewardLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
