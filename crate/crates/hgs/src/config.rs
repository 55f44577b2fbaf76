//! CLI configuration file and environment overrides.
//!
//! Every subcommand accepts `--config <file>`; individual flags override
//! file values, and a few connection settings can also come from the
//! environment (`HGS_GENERATOR_URL`, `HGS_REWARD_URL`, `HGS_AUTH_TOKEN`,
//! `HGS_REQUEST_TIMEOUT_SECS`). Precedence: flag, then environment, then
//! file, then built-in default.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use hgs_core::search::{NeutralPolicy, RootExhaustedPolicy};

use crate::files::FileError;

/// Optional values loadable from a JSON config file. Field names match
/// the long CLI flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub max_bandwidth: Option<usize>,
    pub max_iterations: Option<usize>,
    pub eos_markers: Option<Vec<String>>,
    pub step_delimiter: Option<String>,
    pub neutral_policy: Option<NeutralPolicy>,
    pub root_exhausted_policy: Option<RootExhaustedPolicy>,

    pub temperature: Option<f64>,
    pub top_p: Option<f64>,
    pub top_k: Option<u32>,
    pub max_step_tokens: Option<usize>,

    pub generator_url: Option<String>,
    pub reward_url: Option<String>,
    pub auth_token: Option<String>,
    pub request_timeout_secs: Option<u64>,
    pub max_inflight: Option<usize>,

    pub interpreter: Option<Vec<String>>,
    pub sandbox_timeout_secs: Option<u64>,
    pub process_budget: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, FileError> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn load_opt(path: Option<&Path>) -> Result<Self, FileError> {
        match path {
            Some(path) => Self::load(path),
            None => Ok(Self::default()),
        }
    }
}

/// Environment-sourced connection settings.
#[derive(Debug, Clone, Default)]
pub struct EnvConfig {
    pub generator_url: Option<String>,
    pub reward_url: Option<String>,
    pub auth_token: Option<String>,
    pub request_timeout_secs: Option<u64>,
}

impl EnvConfig {
    pub fn from_env() -> Self {
        Self {
            generator_url: std::env::var("HGS_GENERATOR_URL").ok(),
            reward_url: std::env::var("HGS_REWARD_URL").ok(),
            auth_token: std::env::var("HGS_AUTH_TOKEN").ok(),
            request_timeout_secs: std::env::var("HGS_REQUEST_TIMEOUT_SECS")
                .ok()
                .and_then(|v| v.parse().ok()),
        }
    }
}
