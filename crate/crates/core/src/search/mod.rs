//! Heuristic greedy search driven by step-level reward feedback.
//!
//! The search expands one candidate step at a time from the current node
//! and scores it. A positive step is taken immediately; an end-of-sequence
//! step returns the transcript at once, whatever its reward. When a node
//! has used up its bandwidth without a positive step, the search descends
//! into a neutral child if one is still live, and otherwise backtracks.
//! Once the iteration budget is spent, one full completion is requested
//! from wherever the search stands.

mod tree;

pub use tree::{NodeId, SearchNode, SearchTree};

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{render_state, Generator, GeneratorError, InvalidSampling, SamplingParams};
use crate::label::RewardLabel;
use crate::reward::{RewardError, RewardModel, RewardRequest};
use crate::seed;

/// How to pick among live neutral children at full bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeutralPolicy {
    /// Lowest creation index first.
    FirstCreated,
    /// Uniform over live neutral children, from the seeded search RNG.
    SeededRandom,
}

/// What to do when a backtrack is requested at the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootExhaustedPolicy {
    /// Emit one completion from the bare prompt, like a plain
    /// chain-of-thought pass would.
    FinalizeFromRoot,
    /// Return an error carrying the explored tree.
    Fail,
}

/// Budgets and decoding controls for one search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Maximum children per node before fallback logic applies.
    pub max_bandwidth: usize,
    /// Expansion budget before a forced final completion.
    pub max_iterations: usize,
    /// Markers whose presence in a step ends the search.
    pub eos_markers: Vec<String>,
    /// A step ends at the first occurrence of this delimiter (or an eos
    /// marker, whichever comes first).
    pub step_delimiter: String,
    pub neutral_policy: NeutralPolicy,
    pub root_exhausted_policy: RootExhaustedPolicy,
    pub rng_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_bandwidth: 3,
            max_iterations: 32,
            eos_markers: vec!["<|eot|>".into()],
            step_delimiter: "\n".into(),
            neutral_policy: NeutralPolicy::FirstCreated,
            root_exhausted_policy: RootExhaustedPolicy::FinalizeFromRoot,
            rng_seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_bandwidth < 1 {
            return Err(ConfigError::Bandwidth);
        }
        if self.max_iterations < 1 {
            return Err(ConfigError::Iterations);
        }
        if self.eos_markers.is_empty() || self.eos_markers.iter().any(String::is_empty) {
            return Err(ConfigError::EosMarkers);
        }
        if self.step_delimiter.is_empty() {
            return Err(ConfigError::Delimiter);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("max_bandwidth must be >= 1")]
    Bandwidth,
    #[error("max_iterations must be >= 1")]
    Iterations,
    #[error("eos_markers must be non-empty and contain no empty marker")]
    EosMarkers,
    #[error("step_delimiter must be non-empty")]
    Delimiter,
}

/// How a search ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// A step contained an eos marker.
    Eos,
    /// Iteration budget spent; one completion was requested from the
    /// current node.
    BudgetFinalize,
    /// Backtrack requested at the root; completion from the bare prompt.
    RootExhausted,
}

/// Call counters for one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expansions: usize,
    pub reward_calls: usize,
    pub backtracks: usize,
    pub neutral_descents: usize,
}

impl SearchStats {
    /// Generator calls made: one per expansion plus the finalize
    /// completion when one happened.
    pub fn generator_calls(&self, finalized: bool) -> usize {
        self.expansions + usize::from(finalized)
    }
}

/// One step of the search's control flow, recorded in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchEvent {
    Expanded {
        parent: NodeId,
        child: NodeId,
        reward: RewardLabel,
        eos: bool,
    },
    Advanced {
        to: NodeId,
    },
    NeutralDescent {
        to: NodeId,
    },
    Backtracked {
        from: NodeId,
        to: NodeId,
    },
    RootExhaustion,
    Finalized,
}

/// Result of a completed search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// Full transcript: the final node's state, plus the finalize
    /// completion when the budget ran out.
    pub final_text: String,
    /// Root-to-terminal node ids.
    pub path: Vec<NodeId>,
    pub termination: Termination,
    pub iterations_used: usize,
    pub stats: SearchStats,
    /// The explored tree, for tracing and audits.
    pub tree: SearchTree,
    /// Control-flow log, in order.
    pub events: Vec<SearchEvent>,
    /// Snapshot of the configuration the search ran under.
    pub config: SearchConfig,
}

impl SearchOutcome {
    /// Whether a finalize completion was requested.
    pub fn finalized(&self) -> bool {
        matches!(
            self.termination,
            Termination::BudgetFinalize | Termination::RootExhausted
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchErrorKind {
    #[error("question must be non-empty")]
    EmptyQuestion,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sampling(#[from] InvalidSampling),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error("root exhausted: every explored branch from the root is negative")]
    RootExhausted,
}

/// Search failure, carrying the partially explored tree when generation
/// had already started.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind}")]
pub struct SearchError {
    pub kind: SearchErrorKind,
    pub tree: Option<SearchTree>,
}

impl SearchError {
    fn before_start(kind: impl Into<SearchErrorKind>) -> Self {
        Self {
            kind: kind.into(),
            tree: None,
        }
    }

    fn with_tree(kind: impl Into<SearchErrorKind>, tree: SearchTree) -> Self {
        Self {
            kind: kind.into(),
            tree: Some(tree),
        }
    }
}

/// Seeded RNG used for neutral tie-breaking.
#[derive(Debug, Clone)]
pub struct SearchRng(ChaCha8Rng);

impl SearchRng {
    pub fn from_config(config: &SearchConfig) -> Self {
        Self(seed::rng_from(config.rng_seed, "neutral-select", 0))
    }

    fn choose(&mut self, len: usize) -> usize {
        self.0.random_range(0..len)
    }
}

/// Decision at a node whose bandwidth is used up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullNodeDecision {
    Descend(NodeId),
    Backtrack,
}

/// True iff any eos marker occurs as a substring of `step`.
pub fn is_terminal(step: &str, config: &SearchConfig) -> bool {
    config
        .eos_markers
        .iter()
        .any(|m| !m.is_empty() && step.contains(m.as_str()))
}

/// Samples one step from `node`'s state, scores it, and links it as the
/// node's last child.
///
/// Calling this on a node whose bandwidth is already used up is a caller
/// bug and panics.
pub fn expand<G: Generator, R: RewardModel>(
    tree: &mut SearchTree,
    node: NodeId,
    generator: &mut G,
    reward_model: &mut R,
    config: &SearchConfig,
    sampling: &SamplingParams,
    step_seed: u64,
) -> Result<NodeId, SearchErrorKind> {
    assert!(
        tree.get(node).children.len() < config.max_bandwidth,
        "expand called on a node at full bandwidth"
    );
    let state = tree.get(node).state.clone();
    let sample = generator.next_step(&state, sampling, step_seed)?;
    let request = RewardRequest::new(render_state(&state), sample.text.clone());
    let reward = reward_model.score_step(&request)?;
    Ok(tree.add_child(node, sample.text, reward))
}

/// Picks a live neutral child per the configured policy, or decides to
/// backtrack when there is none.
///
/// Must only be called on a node at full bandwidth.
pub fn select_on_full(
    tree: &SearchTree,
    node: NodeId,
    config: &SearchConfig,
    rng: &mut SearchRng,
) -> FullNodeDecision {
    assert!(
        tree.get(node).children.len() >= config.max_bandwidth,
        "select_on_full called below full bandwidth"
    );
    let neutrals = tree.live_neutral_children(node);
    if neutrals.is_empty() {
        return FullNodeDecision::Backtrack;
    }
    let pick = match config.neutral_policy {
        NeutralPolicy::FirstCreated => neutrals[0],
        NeutralPolicy::SeededRandom => neutrals[rng.choose(neutrals.len())],
    };
    FullNodeDecision::Descend(pick)
}

/// Requests one full, unscored completion of `state`. Called once the
/// iteration budget is exhausted (or at root exhaustion).
pub fn finalize<G: Generator>(
    state: &[String],
    generator: &mut G,
    sampling: &SamplingParams,
    seed: u64,
) -> Result<String, GeneratorError> {
    generator.complete(state, sampling, seed)
}

/// Runs the full greedy search for `question`.
///
/// Performs at most `max_iterations` loop steps, each of which either
/// expands one child or moves the cursor (neutral descent / backtrack),
/// then finalizes with a single completion if no eos step was found. Total
/// generator calls are therefore bounded by `max_iterations + 1`.
pub fn run_search<G: Generator, R: RewardModel>(
    question: &str,
    generator: &mut G,
    reward_model: &mut R,
    config: &SearchConfig,
    sampling: &SamplingParams,
) -> Result<SearchOutcome, SearchError> {
    if question.is_empty() {
        return Err(SearchError::before_start(SearchErrorKind::EmptyQuestion));
    }
    config.validate().map_err(SearchError::before_start)?;
    sampling.validate().map_err(SearchError::before_start)?;

    let mut tree = SearchTree::new(question);
    let mut rng = SearchRng::from_config(config);
    let mut stats = SearchStats::default();
    let mut events = Vec::new();
    let mut cur = tree.root();

    let outcome = |final_text: String,
                   path: Vec<NodeId>,
                   termination: Termination,
                   iterations_used: usize,
                   stats: SearchStats,
                   tree: SearchTree,
                   events: Vec<SearchEvent>| SearchOutcome {
        final_text,
        path,
        termination,
        iterations_used,
        stats,
        tree,
        events,
        config: config.clone(),
    };

    for iteration in 1..=config.max_iterations {
        if tree.get(cur).children.len() < config.max_bandwidth {
            let step_seed = seed::derive_seed(config.rng_seed, "expand", stats.expansions as u64);
            let child = match expand(
                &mut tree, cur, generator, reward_model, config, sampling, step_seed,
            ) {
                Ok(child) => child,
                Err(kind) => return Err(SearchError::with_tree(kind, tree)),
            };
            stats.expansions += 1;
            stats.reward_calls += 1;

            let child_node = tree.get(child);
            let eos = is_terminal(&child_node.step, config);
            let reward = child_node.reward.expect("expanded child is scored");
            events.push(SearchEvent::Expanded {
                parent: cur,
                child,
                reward,
                eos,
            });

            if eos {
                // Return on eos regardless of the step's reward; the
                // verdict stays visible in the trace.
                let final_text = render_state(&tree.get(child).state);
                let path = tree.path_to(child);
                return Ok(outcome(
                    final_text,
                    path,
                    Termination::Eos,
                    iteration,
                    stats,
                    tree,
                    events,
                ));
            }
            if reward == RewardLabel::Positive {
                cur = child;
                events.push(SearchEvent::Advanced { to: child });
            }
        } else {
            match select_on_full(&tree, cur, config, &mut rng) {
                FullNodeDecision::Descend(child) => {
                    stats.neutral_descents += 1;
                    cur = child;
                    events.push(SearchEvent::NeutralDescent { to: child });
                }
                FullNodeDecision::Backtrack => match tree.get(cur).parent {
                    Some(parent) => {
                        tree.get_mut(cur).dead = true;
                        stats.backtracks += 1;
                        events.push(SearchEvent::Backtracked {
                            from: cur,
                            to: parent,
                        });
                        cur = parent;
                    }
                    None => {
                        events.push(SearchEvent::RootExhaustion);
                        match config.root_exhausted_policy {
                            RootExhaustedPolicy::Fail => {
                                return Err(SearchError::with_tree(
                                    SearchErrorKind::RootExhausted,
                                    tree,
                                ));
                            }
                            RootExhaustedPolicy::FinalizeFromRoot => {
                                let root_state = tree.get(tree.root()).state.clone();
                                let fin_seed = seed::derive_seed(config.rng_seed, "finalize", 0);
                                let completion =
                                    match finalize(&root_state, generator, sampling, fin_seed) {
                                        Ok(text) => text,
                                        Err(err) => {
                                            return Err(SearchError::with_tree(err, tree))
                                        }
                                    };
                                events.push(SearchEvent::Finalized);
                                let mut final_text = render_state(&root_state);
                                final_text.push_str(&completion);
                                return Ok(outcome(
                                    final_text,
                                    vec![tree.root()],
                                    Termination::RootExhausted,
                                    iteration,
                                    stats,
                                    tree,
                                    events,
                                ));
                            }
                        }
                    }
                },
            }
        }
    }

    // Budget exhausted: one full completion from the current node.
    let state = tree.get(cur).state.clone();
    let fin_seed = seed::derive_seed(config.rng_seed, "finalize", 0);
    let completion = match finalize(&state, generator, sampling, fin_seed) {
        Ok(text) => text,
        Err(err) => return Err(SearchError::with_tree(err, tree)),
    };
    events.push(SearchEvent::Finalized);
    let mut final_text = render_state(&state);
    final_text.push_str(&completion);
    let path = tree.path_to(cur);
    Ok(outcome(
        final_text,
        path,
        Termination::BudgetFinalize,
        config.max_iterations,
        stats,
        tree,
        events,
    ))
}
