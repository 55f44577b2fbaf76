//! Step-generation contract and the scripted implementation.
//!
//! A [`Generator`] produces either one reasoning step conditioned on the
//! state so far ([`next_step`](Generator::next_step)) or a full completion
//! ([`complete`](Generator::complete)). The state is an ordered list of
//! texts `[prompt, step_1, …, step_i]`; each step carries its own trailing
//! delimiter, so rendering a state to a prompt is plain concatenation with
//! nothing inserted or stripped (see [`render_state`]).

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sampling hyper-parameters passed through to every generator call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub top_p: f64,
    pub top_k: Option<u32>,
    /// Cap on the length of a single step, counted in whitespace-separated
    /// words for the local generators and passed as `max_tokens` to remote
    /// endpoints.
    pub max_step_tokens: usize,
    /// Extra stop strings forwarded to remote endpoints. Local generators
    /// segment on their configured delimiter and ignore these.
    pub stop_sequences: Vec<String>,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self {
            temperature: 0.1,
            top_p: 0.95,
            top_k: None,
            max_step_tokens: 256,
            stop_sequences: Vec::new(),
        }
    }
}

impl SamplingParams {
    /// Rejects parameters outside their documented domains. A temperature
    /// of exactly 0 is valid and means deterministic decoding for the
    /// remote client.
    pub fn validate(&self) -> Result<(), InvalidSampling> {
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(InvalidSampling::Temperature(self.temperature));
        }
        if !self.top_p.is_finite() || self.top_p <= 0.0 || self.top_p > 1.0 {
            return Err(InvalidSampling::TopP(self.top_p));
        }
        if self.top_k == Some(0) {
            return Err(InvalidSampling::TopK);
        }
        if self.max_step_tokens == 0 {
            return Err(InvalidSampling::MaxStepTokens);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvalidSampling {
    #[error("temperature must be finite and >= 0, got {0}")]
    Temperature(f64),
    #[error("top_p must be in (0, 1], got {0}")]
    TopP(f64),
    #[error("top_k must be >= 1 when set")]
    TopK,
    #[error("max_step_tokens must be >= 1")]
    MaxStepTokens,
}

/// How a sampled step ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepTermination {
    /// Step ends with the step delimiter.
    Delimiter,
    /// Step contains an end-of-sequence marker.
    Eos,
    /// Step was truncated at `max_step_tokens`.
    Length,
}

/// One generated reasoning step plus how it terminated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSample {
    pub text: String,
    pub terminated_by: StepTermination,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeneratorError {
    /// The scripted generator has no (further) entry for this state.
    #[error("script exhausted for state {state_key:?}")]
    ScriptExhausted { state_key: String },
    /// The synthetic generator was asked about a state outside its tree.
    #[error("state does not belong to this synthetic tree: {state_key:?}")]
    UnknownState { state_key: String },
    /// Remote endpoint failure, with HTTP status when one was received.
    #[error("remote generation failed (status {status:?}): {message}")]
    Remote {
        status: Option<u16>,
        message: String,
    },
}

/// Contract for step generation.
///
/// Implementations must be deterministic given the call sequence, the
/// sampling parameters, and the seeds (the remote client is exempt: its
/// determinism is the endpoint's business). A single search drives its
/// generator sequentially and exclusively; concurrent searches use one
/// instance each.
pub trait Generator {
    /// Samples exactly one step conditioned on `state`: text up to and
    /// including the first delimiter or end-of-sequence marker, truncated
    /// at `max_step_tokens` words with `terminated_by == Length`.
    fn next_step(
        &mut self,
        state: &[String],
        params: &SamplingParams,
        seed: u64,
    ) -> Result<StepSample, GeneratorError>;

    /// Generates a full continuation of `state`, running until an
    /// end-of-sequence marker or the implementation's own length cap. The
    /// returned text does not repeat the state.
    fn complete(
        &mut self,
        state: &[String],
        params: &SamplingParams,
        seed: u64,
    ) -> Result<String, GeneratorError>;
}

impl<G: Generator + ?Sized> Generator for &mut G {
    fn next_step(
        &mut self,
        state: &[String],
        params: &SamplingParams,
        seed: u64,
    ) -> Result<StepSample, GeneratorError> {
        (**self).next_step(state, params, seed)
    }

    fn complete(
        &mut self,
        state: &[String],
        params: &SamplingParams,
        seed: u64,
    ) -> Result<String, GeneratorError> {
        (**self).complete(state, params, seed)
    }
}

/// Renders a state to the prompt text it stands for: plain concatenation.
/// Steps already carry their trailing delimiter, so nothing is inserted.
pub fn render_state(state: &[String]) -> String {
    let mut out = String::with_capacity(state.iter().map(String::len).sum());
    for part in state {
        out.push_str(part);
    }
    out
}

/// Truncates `text` to at most `max_words` whitespace-separated words,
/// preserving the original spacing of what is kept. Returns the kept
/// prefix and whether truncation happened.
pub fn truncate_words(text: &str, max_words: usize) -> (&str, bool) {
    let mut words = 0usize;
    let mut in_word = false;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            in_word = false;
        } else if !in_word {
            in_word = true;
            words += 1;
            if words > max_words {
                return (&text[..i], true);
            }
        }
    }
    (text, false)
}

fn classify_step(text: &str, eos_markers: &[String]) -> StepTermination {
    if eos_markers.iter().any(|m| !m.is_empty() && text.contains(m.as_str())) {
        StepTermination::Eos
    } else {
        StepTermination::Delimiter
    }
}

/// Generator that replays a fixed script.
///
/// Steps are keyed by the rendered state text and consumed in order: the
/// first call for a state returns the first entry, the second call the
/// second, and so on. Completions are a plain table lookup. Used for
/// deterministic tests and trace replays.
#[derive(Debug, Clone, Default)]
pub struct ScriptedGenerator {
    steps: BTreeMap<String, Vec<String>>,
    completions: BTreeMap<String, String>,
    cursors: BTreeMap<String, usize>,
    eos_markers: Vec<String>,
}

impl ScriptedGenerator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Markers used to classify scripted steps as end-of-sequence.
    pub fn with_eos_markers<I, S>(mut self, markers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.eos_markers = markers.into_iter().map(Into::into).collect();
        self
    }

    /// Registers the ordered list of steps returned for a state key.
    pub fn with_steps<S, I, T>(mut self, state_key: S, steps: I) -> Self
    where
        S: Into<String>,
        I: IntoIterator<Item = T>,
        T: Into<String>,
    {
        self.steps
            .entry(state_key.into())
            .or_default()
            .extend(steps.into_iter().map(Into::into));
        self
    }

    /// Registers the completion returned for a state key.
    pub fn with_completion<S, T>(mut self, state_key: S, completion: T) -> Self
    where
        S: Into<String>,
        T: Into<String>,
    {
        self.completions.insert(state_key.into(), completion.into());
        self
    }

    pub fn from_tables(
        steps: BTreeMap<String, Vec<String>>,
        completions: BTreeMap<String, String>,
        eos_markers: Vec<String>,
    ) -> Self {
        Self {
            steps,
            completions,
            cursors: BTreeMap::new(),
            eos_markers,
        }
    }
}

impl Generator for ScriptedGenerator {
    fn next_step(
        &mut self,
        state: &[String],
        params: &SamplingParams,
        _seed: u64,
    ) -> Result<StepSample, GeneratorError> {
        let key = render_state(state);
        let entries = self
            .steps
            .get(&key)
            .ok_or_else(|| GeneratorError::ScriptExhausted {
                state_key: key.clone(),
            })?;
        let cursor = self.cursors.entry(key.clone()).or_insert(0);
        let raw = entries
            .get(*cursor)
            .ok_or_else(|| GeneratorError::ScriptExhausted {
                state_key: key.clone(),
            })?;
        *cursor += 1;

        let (kept, truncated) = truncate_words(raw, params.max_step_tokens);
        if truncated {
            return Ok(StepSample {
                text: kept.to_string(),
                terminated_by: StepTermination::Length,
            });
        }
        Ok(StepSample {
            text: raw.clone(),
            terminated_by: classify_step(raw, &self.eos_markers),
        })
    }

    fn complete(
        &mut self,
        state: &[String],
        _params: &SamplingParams,
        _seed: u64,
    ) -> Result<String, GeneratorError> {
        let key = render_state(state);
        self.completions
            .get(&key)
            .cloned()
            .ok_or(GeneratorError::ScriptExhausted { state_key: key })
    }
}
