//! HTTP clients for remote generation and scoring endpoints.
//!
//! The wire protocol is a plain JSON text-completion shape: generation
//! POSTs `{prompt, temperature, top_p, max_tokens, stop}` and expects
//! `{text}`; scoring POSTs `{previous_data, step}` and expects `{label}`
//! where the label is one of the strings `"positive"/"neutral"/"negative"`
//! or the integers `1/0/-1`. Anything else is a malformed response — a
//! mis-parsed label would silently corrupt search behaviour, so parsing
//! fails loudly.
//!
//! Requests are idempotent for a fixed seed, so transport errors and 5xx
//! responses are retried with exponential backoff; retry counts are kept
//! in [`RemoteStats`]. In-flight requests are bounded per client. With
//! `temperature == 0` the endpoint is expected to decode deterministically.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use hgs_core::generator::{
    render_state, truncate_words, Generator, GeneratorError, SamplingParams, StepSample,
    StepTermination,
};
use hgs_core::label::RewardLabel;
use hgs_core::reward::{RewardError, RewardModel, RewardRequest};

use crate::util::Semaphore;

/// Connection settings for one endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub url: String,
    /// Sent as `authorization: Bearer <token>` when present.
    pub auth_token: Option<String>,
    pub timeout: Duration,
    /// Upper bound on concurrent requests through this client.
    pub max_inflight: usize,
    /// Retries after the first attempt, for transport errors and 5xx.
    pub max_retries: u32,
    /// Initial backoff; doubles per retry.
    pub retry_backoff: Duration,
    /// Token cap for full completions (step requests use
    /// `max_step_tokens` from the sampling parameters).
    pub max_completion_tokens: usize,
}

impl RemoteConfig {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            auth_token: None,
            timeout: Duration::from_secs(30),
            max_inflight: 4,
            max_retries: 3,
            retry_backoff: Duration::from_millis(100),
            max_completion_tokens: 1024,
        }
    }
}

/// Request/retry counters, shared across clones of a client.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteStats {
    pub requests: u64,
    pub retries: u64,
}

#[derive(Debug, Clone)]
struct HttpFailure {
    status: Option<u16>,
    message: String,
}

#[derive(Debug, Clone)]
struct HttpClient {
    agent: ureq::Agent,
    config: RemoteConfig,
    inflight: Arc<Semaphore>,
    stats: Arc<Mutex<RemoteStats>>,
}

impl HttpClient {
    fn new(config: RemoteConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let inflight = Arc::new(Semaphore::new(config.max_inflight.max(1)));
        Self {
            agent,
            config,
            inflight,
            stats: Arc::new(Mutex::new(RemoteStats::default())),
        }
    }

    fn stats(&self) -> RemoteStats {
        *self.stats.lock().unwrap()
    }

    fn post_json<B: Serialize>(&self, body: &B) -> Result<String, HttpFailure> {
        let payload = serde_json::to_string(body).expect("request body serializes");
        let _permit = self.inflight.acquire();
        let mut attempt = 0u32;
        loop {
            self.stats.lock().unwrap().requests += 1;
            let outcome = self.attempt(&payload);
            match outcome {
                Ok(text) => return Ok(text),
                Err((retryable, failure)) => {
                    if !retryable || attempt >= self.config.max_retries {
                        return Err(failure);
                    }
                    let backoff = self.config.retry_backoff * 2u32.pow(attempt);
                    std::thread::sleep(backoff);
                    attempt += 1;
                    self.stats.lock().unwrap().retries += 1;
                }
            }
        }
    }

    /// One HTTP attempt. The boolean marks whether the failure is worth
    /// retrying (transport errors and 5xx; 4xx is final).
    fn attempt(&self, payload: &str) -> Result<String, (bool, HttpFailure)> {
        let mut request = self
            .agent
            .post(&self.config.url)
            .header("content-type", "application/json");
        if let Some(token) = &self.config.auth_token {
            request = request.header("authorization", format!("Bearer {token}"));
        }
        let mut response = request.send(payload).map_err(|e| {
            (
                true,
                HttpFailure {
                    status: None,
                    message: e.to_string(),
                },
            )
        })?;
        let status = response.status().as_u16();
        let body = response
            .body_mut()
            .read_to_string()
            .unwrap_or_else(|e| format!("<unreadable body: {e}>"));
        if (200..300).contains(&status) {
            return Ok(body);
        }
        let failure = HttpFailure {
            status: Some(status),
            message: excerpt(&body),
        };
        Err((status >= 500, failure))
    }
}

fn excerpt(body: &str) -> String {
    const CAP: usize = 200;
    if body.len() <= CAP {
        return body.to_string();
    }
    let mut end = CAP;
    while end > 0 && !body.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}…", &body[..end])
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    temperature: f64,
    top_p: f64,
    max_tokens: usize,
    stop: Vec<String>,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// Generator backed by a remote text-completion endpoint.
#[derive(Debug, Clone)]
pub struct RemoteGenerator {
    http: HttpClient,
    step_delimiter: String,
    eos_markers: Vec<String>,
}

impl RemoteGenerator {
    pub fn new(
        config: RemoteConfig,
        step_delimiter: impl Into<String>,
        eos_markers: Vec<String>,
    ) -> Self {
        Self {
            http: HttpClient::new(config),
            step_delimiter: step_delimiter.into(),
            eos_markers,
        }
    }

    pub fn stats(&self) -> RemoteStats {
        self.http.stats()
    }

    fn post(&self, request: &CompletionRequest<'_>) -> Result<String, GeneratorError> {
        let body = self
            .http
            .post_json(request)
            .map_err(|f| GeneratorError::Remote {
                status: f.status,
                message: f.message,
            })?;
        let parsed: CompletionResponse =
            serde_json::from_str(&body).map_err(|e| GeneratorError::Remote {
                status: None,
                message: format!("malformed response body ({e}): {}", excerpt(&body)),
            })?;
        Ok(parsed.text)
    }
}

impl Generator for RemoteGenerator {
    fn next_step(
        &mut self,
        state: &[String],
        params: &SamplingParams,
        _seed: u64,
    ) -> Result<StepSample, GeneratorError> {
        let prompt = render_state(state);
        let mut stop = params.stop_sequences.clone();
        if !stop.contains(&self.step_delimiter) {
            stop.push(self.step_delimiter.clone());
        }
        let text = self.post(&CompletionRequest {
            prompt: &prompt,
            temperature: params.temperature,
            top_p: params.top_p,
            max_tokens: params.max_step_tokens,
            stop,
        })?;

        if self.eos_markers.iter().any(|m| text.contains(m.as_str())) {
            return Ok(StepSample {
                text,
                terminated_by: StepTermination::Eos,
            });
        }
        let (_, truncated) = truncate_words(&text, params.max_step_tokens.saturating_sub(1));
        if truncated {
            return Ok(StepSample {
                text,
                terminated_by: StepTermination::Length,
            });
        }
        // Completion endpoints strip the stop sequence; steps carry their
        // trailing delimiter, so put it back.
        Ok(StepSample {
            text: format!("{text}{}", self.step_delimiter),
            terminated_by: StepTermination::Delimiter,
        })
    }

    fn complete(
        &mut self,
        state: &[String],
        params: &SamplingParams,
        _seed: u64,
    ) -> Result<String, GeneratorError> {
        let prompt = render_state(state);
        self.post(&CompletionRequest {
            prompt: &prompt,
            temperature: params.temperature,
            top_p: params.top_p,
            max_tokens: self.http.config.max_completion_tokens,
            stop: params.stop_sequences.clone(),
        })
    }
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    previous_data: &'a str,
    step: &'a str,
}

/// Reward model backed by a remote scoring endpoint.
#[derive(Debug, Clone)]
pub struct RemoteRewardModel {
    http: HttpClient,
}

impl RemoteRewardModel {
    pub fn new(config: RemoteConfig) -> Self {
        Self {
            http: HttpClient::new(config),
        }
    }

    pub fn stats(&self) -> RemoteStats {
        self.http.stats()
    }
}

/// Maps a response label value onto [`RewardLabel`]; anything unexpected
/// is an error, never a default.
fn parse_label(value: &serde_json::Value) -> Option<RewardLabel> {
    match value {
        serde_json::Value::String(s) => match s.as_str() {
            "negative" => Some(RewardLabel::Negative),
            "neutral" => Some(RewardLabel::Neutral),
            "positive" => Some(RewardLabel::Positive),
            _ => None,
        },
        serde_json::Value::Number(n) => RewardLabel::from_int(n.as_i64()?),
        _ => None,
    }
}

impl RewardModel for RemoteRewardModel {
    fn score_step(&mut self, request: &RewardRequest) -> Result<RewardLabel, RewardError> {
        if request.step.is_empty() {
            return Err(RewardError::EmptyStep);
        }
        let body = self
            .http
            .post_json(&ScoreRequest {
                previous_data: &request.previous_data,
                step: &request.step,
            })
            .map_err(|f| RewardError::Remote {
                status: f.status,
                message: f.message,
            })?;
        let parsed: serde_json::Value =
            serde_json::from_str(&body).map_err(|_| RewardError::MalformedResponse {
                raw: excerpt(&body),
            })?;
        let label = parsed
            .get("label")
            .and_then(parse_label)
            .ok_or_else(|| RewardError::MalformedResponse {
                raw: excerpt(&body),
            })?;
        Ok(label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_parsing() {
        use serde_json::json;
        assert_eq!(parse_label(&json!("positive")), Some(RewardLabel::Positive));
        assert_eq!(parse_label(&json!("neutral")), Some(RewardLabel::Neutral));
        assert_eq!(parse_label(&json!("negative")), Some(RewardLabel::Negative));
        assert_eq!(parse_label(&json!(1)), Some(RewardLabel::Positive));
        assert_eq!(parse_label(&json!(0)), Some(RewardLabel::Neutral));
        assert_eq!(parse_label(&json!(-1)), Some(RewardLabel::Negative));
        assert_eq!(parse_label(&json!(2)), None);
        assert_eq!(parse_label(&json!("ok")), None);
        assert_eq!(parse_label(&json!({"x": 1})), None);
    }

    #[test]
    fn excerpt_caps_length() {
        let long = "x".repeat(500);
        assert!(excerpt(&long).len() < 250);
        assert_eq!(excerpt("short"), "short");
    }
}
