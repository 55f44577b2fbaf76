//! Reward-guided heuristic greedy search over stepwise generations.
//!
//! The crate is built around three contracts:
//!
//! - [`Generator`](generator::Generator) produces one reasoning step (or a
//!   full completion) conditioned on the state so far.
//! - [`RewardModel`](reward::RewardModel) scores a single step as
//!   negative / neutral / positive.
//! - [`run_search`](search::run_search) drives a greedy tree search over
//!   steps: advance on positive feedback, fall back to neutral siblings at
//!   full bandwidth, backtrack when everything is negative, and finalize
//!   with one full completion once the iteration budget runs out.
//!
//! On top of that, the [`mutation`] module provides a line-oriented
//! tokenizer and a single-operator mutation engine used to build step-level
//! reward datasets for code, and [`metrics`] computes label-level
//! precision/recall plus the penalty miss rate for evaluating reward
//! models.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the companion `hgs`
//! crate carries IO, the CLI, sandboxed execution, and file formats.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod generator;
pub mod label;
pub mod metrics;
pub mod mutation;
pub mod reward;
pub mod search;
pub mod seed;
pub mod synthetic;
pub mod trace;

pub use label::RewardLabel;
pub use search::{run_search, SearchConfig, SearchOutcome, SearchTree};
