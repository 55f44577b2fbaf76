//! Seeded synthetic reasoning trees and the oracle reward model over them.
//!
//! A [`SyntheticTree`] is a small labeled tree standing in for a reasoning
//! problem: each edge carries a step text and its true verdict, exactly one
//! root-to-leaf path is all-positive, and that leaf embeds the correct
//! answer followed by an eos marker. Wrong-answer leaves carry no eos
//! marker, and neutral edges always lead to internal dead-end subtrees that
//! bottom out in negative leaves — so a sampled path with no negative step
//! is correct by construction.
//!
//! [`SyntheticGenerator`] plays the tree like a language model: at each
//! state it proposes children in a seeded order (the positive child comes
//! first with probability `1 - noise_p`), cycling without replacement as
//! the same state is probed repeatedly. [`OracleRewardModel`] returns the
//! true edge label, optionally corrupted by a [`LabelNoise`] matrix seeded
//! per request.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::generator::{
    render_state, truncate_words, Generator, GeneratorError, SamplingParams, StepSample,
    StepTermination,
};
use crate::label::RewardLabel;
use crate::reward::{LabelNoise, RewardError, RewardModel, RewardRequest};
use crate::seed;

/// One node of a synthetic tree. The label belongs to the edge from the
/// parent; the root has none.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticNode {
    pub step: String,
    pub label: Option<RewardLabel>,
    pub children: Vec<usize>,
}

/// Shape parameters for one generated tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSpec {
    /// Length of the correct path, in steps (>= 1).
    pub depth: usize,
    /// Children per on-path node (>= 1); also the cap for filler nodes.
    pub branching: usize,
    /// Probability that a sampled child is drawn off the correct branch.
    pub noise_p: f64,
    pub eos_marker: String,
    pub delimiter: String,
}

impl Default for TreeSpec {
    fn default() -> Self {
        Self {
            depth: 3,
            branching: 3,
            noise_p: 0.0,
            eos_marker: "<|eot|>".into(),
            delimiter: "\n".into(),
        }
    }
}

/// A labeled reasoning tree with a unique all-positive solution path.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTree {
    pub question: String,
    pub correct_answer: String,
    pub noise_p: f64,
    pub eos_marker: String,
    pub delimiter: String,
    nodes: Vec<SyntheticNode>,
    order_seed: u64,
}

const STEP_PHRASES: [&str; 4] = [
    "compute the intermediate quantity",
    "apply the governing relation",
    "simplify the running expression",
    "combine the partial results",
];

impl SyntheticTree {
    /// Generates a seeded tree satisfying all construction invariants.
    /// `index` distinguishes trees within a suite.
    pub fn generate(spec: &TreeSpec, seed_value: u64, index: u64) -> Self {
        assert!(spec.depth >= 1 && spec.branching >= 1);
        assert!((0.0..1.0).contains(&spec.noise_p));
        let mut rng = seed::rng_from(seed_value, "syn-tree", index);
        let answer = rng.random_range(2u32..10_000).to_string();
        let question = format!("Q[{seed_value}/{index}] Determine the final value.\n");

        let mut tree = Self {
            question,
            correct_answer: answer.clone(),
            noise_p: spec.noise_p,
            eos_marker: spec.eos_marker.clone(),
            delimiter: spec.delimiter.clone(),
            nodes: vec![SyntheticNode {
                step: String::new(),
                label: None,
                children: Vec::new(),
            }],
            order_seed: seed::derive_seed(seed_value, "syn-order", index),
        };
        tree.grow_correct_path(0, 0, spec, &mut rng);
        debug_assert!(tree.validate().is_ok());
        tree
    }

    fn push_node(&mut self, parent: usize, step: String, label: RewardLabel) -> usize {
        let id = self.nodes.len();
        self.nodes.push(SyntheticNode {
            step,
            label: Some(label),
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        id
    }

    fn filler_step(&self, id: usize, rng: &mut ChaCha8Rng) -> String {
        let phrase = STEP_PHRASES[rng.random_range(0..STEP_PHRASES.len())];
        format!("[n{id}] {phrase}{}", self.delimiter)
    }

    fn wrong_leaf_step(&mut self, parent: usize, rng: &mut ChaCha8Rng) -> usize {
        let mut wrong = rng.random_range(2u32..10_000).to_string();
        while wrong == self.correct_answer {
            wrong = rng.random_range(2u32..10_000).to_string();
        }
        let id = self.nodes.len();
        let step = format!("[n{id}] The answer is: {wrong}.{}", self.delimiter);
        self.push_node(parent, step, RewardLabel::Negative)
    }

    /// Adds a small off-path subtree under `parent`: either a wrong-answer
    /// leaf or an internal node bottoming out in wrong leaves. Neutral
    /// nodes are always internal.
    fn grow_distractor(&mut self, parent: usize, rng: &mut ChaCha8Rng) {
        let neutral = rng.random::<f64>() < 0.35;
        if neutral {
            let id = self.nodes.len();
            let step = self.filler_step(id, rng);
            let node = self.push_node(parent, step, RewardLabel::Neutral);
            for _ in 0..rng.random_range(1..=2usize) {
                self.wrong_leaf_step(node, rng);
            }
        } else if rng.random::<f64>() < 0.7 {
            self.wrong_leaf_step(parent, rng);
        } else {
            let id = self.nodes.len();
            let step = self.filler_step(id, rng);
            let node = self.push_node(parent, step, RewardLabel::Negative);
            for _ in 0..rng.random_range(1..=2usize) {
                self.wrong_leaf_step(node, rng);
            }
        }
    }

    fn grow_correct_path(
        &mut self,
        parent: usize,
        level: usize,
        spec: &TreeSpec,
        rng: &mut ChaCha8Rng,
    ) {
        // The positive child's creation slot among its siblings is
        // irrelevant: sampling order is decided separately per state.
        let on_path = if level + 1 == spec.depth {
            let step = format!(
                "The answer is: {}.{}",
                self.correct_answer, self.eos_marker
            );
            self.push_node(parent, step, RewardLabel::Positive)
        } else {
            let id = self.nodes.len();
            let step = self.filler_step(id, rng);
            self.push_node(parent, step, RewardLabel::Positive)
        };
        for _ in 1..spec.branching {
            self.grow_distractor(parent, rng);
        }
        if level + 1 < spec.depth {
            self.grow_correct_path(on_path, level + 1, spec, rng);
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, index: usize) -> &SyntheticNode {
        &self.nodes[index]
    }

    pub fn root(&self) -> usize {
        0
    }

    fn is_leaf(&self, index: usize) -> bool {
        self.nodes[index].children.is_empty()
    }

    /// Follows positive-labeled edges from the root; the construction
    /// invariant guarantees this reaches the answer leaf.
    pub fn correct_path_steps(&self) -> Vec<String> {
        let mut steps = Vec::new();
        let mut cur = 0usize;
        loop {
            let next = self.nodes[cur]
                .children
                .iter()
                .copied()
                .find(|&c| self.nodes[c].label == Some(RewardLabel::Positive));
            match next {
                Some(c) => {
                    steps.push(self.nodes[c].step.clone());
                    cur = c;
                }
                None => return steps,
            }
        }
    }

    /// Checks every construction invariant; generation debug-asserts this
    /// and tests call it directly.
    pub fn validate(&self) -> Result<(), String> {
        if self.question.is_empty() {
            return Err("question must be non-empty".into());
        }
        let mut positive_leaf_paths = 0usize;
        let mut stack: Vec<(usize, bool)> = vec![(0, true)];
        while let Some((node, all_positive)) = stack.pop() {
            let n = &self.nodes[node];
            if node != 0 && n.label.is_none() {
                return Err(format!("non-root node {node} lacks a label"));
            }
            if self.is_leaf(node) {
                if node == 0 {
                    return Err("root must have children".into());
                }
                let label = n.label.unwrap();
                if label == RewardLabel::Neutral {
                    return Err(format!("leaf {node} has a neutral edge"));
                }
                if all_positive {
                    positive_leaf_paths += 1;
                    let expected_tail =
                        format!("The answer is: {}.{}", self.correct_answer, self.eos_marker);
                    if !n.step.ends_with(&expected_tail) {
                        return Err(format!("all-positive leaf {node} lacks answer + eos"));
                    }
                } else if n.step.contains(&self.eos_marker) {
                    return Err(format!("off-path leaf {node} carries an eos marker"));
                }
            } else {
                // Sibling steps must be distinct for state resolution.
                let mut seen: Vec<&str> = Vec::new();
                for &c in &n.children {
                    let s = self.nodes[c].step.as_str();
                    if seen.contains(&s) {
                        return Err(format!("duplicate sibling step under node {node}"));
                    }
                    seen.push(s);
                }
                for &c in &n.children {
                    let child_positive = self.nodes[c].label == Some(RewardLabel::Positive);
                    stack.push((c, all_positive && child_positive));
                }
            }
        }
        if positive_leaf_paths != 1 {
            return Err(format!(
                "expected exactly one all-positive path, found {positive_leaf_paths}"
            ));
        }
        Ok(())
    }

    /// Resolves a rendered transcript (question plus concatenated steps)
    /// to the node it identifies.
    fn resolve_rendered(&self, rendered: &str) -> Option<usize> {
        let mut rest = rendered.strip_prefix(self.question.as_str())?;
        let mut cur = 0usize;
        while !rest.is_empty() {
            let next = self.nodes[cur].children.iter().copied().find(|&c| {
                let step = &self.nodes[c].step;
                !step.is_empty() && rest.starts_with(step.as_str())
            })?;
            rest = &rest[self.nodes[next].step.len()..];
            cur = next;
        }
        Some(cur)
    }

    /// Sampling order for a node's children: a seeded permutation with the
    /// positive child in front with probability `1 - noise_p`. The order
    /// is a pure function of the tree seed and the node, so repeated
    /// probes of the same state walk the children without replacement.
    fn sample_order(&self, node: usize) -> Vec<usize> {
        let children = &self.nodes[node].children;
        let len = children.len();
        let mut order: Vec<usize> = (0..len).collect();
        if len <= 1 {
            return order;
        }
        let mut rng = seed::rng_from(self.order_seed, "child-order", node as u64);
        for i in (1..len).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        if let Some(pos) = (0..len).find(|&i| {
            self.nodes[children[i]].label == Some(RewardLabel::Positive)
        }) {
            let cur = order.iter().position(|&o| o == pos).unwrap();
            let on_branch = rng.random::<f64>() < 1.0 - self.noise_p;
            let target = if on_branch {
                0
            } else {
                rng.random_range(1..len)
            };
            order.swap(cur, target);
        }
        order
    }

    /// Random continuation from `node` to a leaf, one child per level:
    /// the positive child with probability `1 - noise_p`, otherwise
    /// uniform over the off-branch children.
    fn sample_continuation(&self, mut node: usize, rng: &mut ChaCha8Rng) -> String {
        let mut out = String::new();
        if self.is_leaf(node) && node != 0 {
            out.push_str(&self.eos_marker);
            return out;
        }
        while !self.is_leaf(node) {
            let children = &self.nodes[node].children;
            let positive = children
                .iter()
                .copied()
                .find(|&c| self.nodes[c].label == Some(RewardLabel::Positive));
            let next = match positive {
                Some(p) => {
                    let off: Vec<usize> =
                        children.iter().copied().filter(|&c| c != p).collect();
                    if off.is_empty() || rng.random::<f64>() < 1.0 - self.noise_p {
                        p
                    } else {
                        off[rng.random_range(0..off.len())]
                    }
                }
                None => children[rng.random_range(0..children.len())],
            };
            out.push_str(&self.nodes[next].step);
            node = next;
        }
        out
    }
}

/// A batch of synthetic trees addressed by their questions, shared between
/// the generator and the oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSuite {
    trees: Vec<SyntheticTree>,
    by_question: BTreeMap<String, usize>,
}

/// Shape parameters for a generated suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSpec {
    pub size: usize,
    pub seed: u64,
    pub min_depth: usize,
    pub max_depth: usize,
    pub branching: usize,
    pub noise_p: f64,
    pub eos_marker: String,
    pub delimiter: String,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            size: 100,
            seed: 0,
            min_depth: 2,
            max_depth: 4,
            branching: 3,
            noise_p: 0.3,
            eos_marker: "<|eot|>".into(),
            delimiter: "\n".into(),
        }
    }
}

impl SyntheticSuite {
    pub fn generate(spec: &SuiteSpec) -> Self {
        assert!(spec.size >= 1 && spec.min_depth >= 1 && spec.min_depth <= spec.max_depth);
        let mut rng = seed::rng_from(spec.seed, "suite-depths", 0);
        let trees: Vec<SyntheticTree> = (0..spec.size)
            .map(|i| {
                let tree_spec = TreeSpec {
                    depth: rng.random_range(spec.min_depth..=spec.max_depth),
                    branching: spec.branching,
                    noise_p: spec.noise_p,
                    eos_marker: spec.eos_marker.clone(),
                    delimiter: spec.delimiter.clone(),
                };
                SyntheticTree::generate(&tree_spec, spec.seed, i as u64)
            })
            .collect();
        Self::from_trees(trees)
    }

    pub fn from_trees(trees: Vec<SyntheticTree>) -> Self {
        let by_question = trees
            .iter()
            .enumerate()
            .map(|(i, t)| (t.question.clone(), i))
            .collect();
        Self { trees, by_question }
    }

    pub fn trees(&self) -> &[SyntheticTree] {
        &self.trees
    }

    /// Finds the tree whose question is a prefix of `rendered`. Questions
    /// are generated so that none is a prefix of another, which makes the
    /// greatest key at or below `rendered` the only candidate.
    pub fn find_by_prefix(&self, rendered: &str) -> Option<&SyntheticTree> {
        let (question, &idx) = self
            .by_question
            .range::<str, _>((
                core::ops::Bound::Unbounded,
                core::ops::Bound::Included(rendered),
            ))
            .next_back()?;
        rendered.starts_with(question.as_str()).then(|| &self.trees[idx])
    }
}

/// Plays a [`SyntheticSuite`] as a [`Generator`].
#[derive(Debug, Clone)]
pub struct SyntheticGenerator {
    suite: Arc<SyntheticSuite>,
    cursors: BTreeMap<String, usize>,
}

impl SyntheticGenerator {
    pub fn new(suite: Arc<SyntheticSuite>) -> Self {
        Self {
            suite,
            cursors: BTreeMap::new(),
        }
    }

    fn resolve<'a>(
        suite: &'a SyntheticSuite,
        rendered: &str,
    ) -> Result<(&'a SyntheticTree, usize), GeneratorError> {
        let tree = suite
            .find_by_prefix(rendered)
            .ok_or_else(|| GeneratorError::UnknownState {
                state_key: rendered.to_string(),
            })?;
        let node = tree
            .resolve_rendered(rendered)
            .ok_or_else(|| GeneratorError::UnknownState {
                state_key: rendered.to_string(),
            })?;
        Ok((tree, node))
    }
}

impl Generator for SyntheticGenerator {
    fn next_step(
        &mut self,
        state: &[String],
        params: &SamplingParams,
        _seed: u64,
    ) -> Result<StepSample, GeneratorError> {
        let rendered = render_state(state);
        let (tree, node) = Self::resolve(&self.suite, &rendered)?;
        let raw = if tree.is_leaf(node) {
            // The transcript already ends in an answer; a language model
            // would emit a bare stop here.
            tree.eos_marker.clone()
        } else {
            let order = tree.sample_order(node);
            let cursor = self.cursors.entry(rendered).or_insert(0);
            let child = tree.nodes[node].children[order[*cursor % order.len()]];
            *cursor += 1;
            tree.nodes[child].step.clone()
        };
        let (kept, truncated) = truncate_words(&raw, params.max_step_tokens);
        if truncated {
            return Ok(StepSample {
                text: kept.to_string(),
                terminated_by: StepTermination::Length,
            });
        }
        let terminated_by = if raw.contains(tree.eos_marker.as_str()) {
            StepTermination::Eos
        } else {
            StepTermination::Delimiter
        };
        Ok(StepSample {
            text: raw,
            terminated_by,
        })
    }

    fn complete(
        &mut self,
        state: &[String],
        _params: &SamplingParams,
        seed_value: u64,
    ) -> Result<String, GeneratorError> {
        let rendered = render_state(state);
        let (tree, node) = Self::resolve(&self.suite, &rendered)?;
        let mut rng = seed::rng_from(seed_value, "syn-complete", seed::fnv1a(rendered.as_bytes()));
        Ok(tree.sample_continuation(node, &mut rng))
    }
}

/// Scores steps with their true edge labels, optionally corrupted by a
/// per-request-seeded noise matrix.
#[derive(Debug, Clone)]
pub struct OracleRewardModel {
    suite: Arc<SyntheticSuite>,
    noise: LabelNoise,
    noise_seed: u64,
}

impl OracleRewardModel {
    /// Perfect oracle: returns true labels unchanged.
    pub fn perfect(suite: Arc<SyntheticSuite>) -> Self {
        Self {
            suite,
            noise: LabelNoise::identity(),
            noise_seed: 0,
        }
    }

    pub fn with_noise(suite: Arc<SyntheticSuite>, noise: LabelNoise, noise_seed: u64) -> Self {
        noise.validate().expect("noise rows must be distributions");
        Self {
            suite,
            noise,
            noise_seed,
        }
    }

    fn true_label(&self, request: &RewardRequest) -> Result<RewardLabel, RewardError> {
        let tree = self
            .suite
            .find_by_prefix(&request.previous_data)
            .ok_or_else(|| RewardError::UnknownStep {
                step: request.step.clone(),
            })?;
        let node = tree
            .resolve_rendered(&request.previous_data)
            .ok_or_else(|| RewardError::UnknownStep {
                step: request.step.clone(),
            })?;
        if request.step == tree.eos_marker && tree.is_leaf(node) && node != tree.root() {
            // Bare stop after an already-final transcript: a wasted step.
            return Ok(RewardLabel::Negative);
        }
        tree.nodes[node]
            .children
            .iter()
            .find(|&&c| tree.nodes[c].step == request.step)
            .map(|&c| tree.nodes[c].label.expect("non-root node is labeled"))
            .ok_or_else(|| RewardError::UnknownStep {
                step: request.step.clone(),
            })
    }
}

impl RewardModel for OracleRewardModel {
    fn score_step(&mut self, request: &RewardRequest) -> Result<RewardLabel, RewardError> {
        if request.step.is_empty() {
            return Err(RewardError::EmptyStep);
        }
        let label = self.true_label(request)?;
        Ok(self.noise.sample(label, self.noise_seed, request))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_tree() -> SyntheticTree {
        SyntheticTree::generate(
            &TreeSpec {
                depth: 3,
                branching: 2,
                noise_p: 0.0,
                ..TreeSpec::default()
            },
            7,
            0,
        )
    }

    #[test]
    fn generated_trees_validate() {
        for index in 0..50 {
            let tree = SyntheticTree::generate(
                &TreeSpec {
                    depth: 1 + (index as usize % 4),
                    branching: 1 + (index as usize % 3),
                    noise_p: 0.3,
                    ..TreeSpec::default()
                },
                11,
                index,
            );
            tree.validate().unwrap();
        }
    }

    #[test]
    fn zero_noise_next_step_takes_positive_child() {
        let tree = small_tree();
        let suite = Arc::new(SyntheticSuite::from_trees(vec![tree.clone()]));
        let mut gen = SyntheticGenerator::new(suite);
        let state = vec![tree.question.clone()];
        let step = gen
            .next_step(&state, &SamplingParams::default(), 0)
            .unwrap();
        assert_eq!(step.text, tree.correct_path_steps()[0]);
    }

    #[test]
    fn repeated_probes_walk_children_without_replacement() {
        let tree = SyntheticTree::generate(
            &TreeSpec {
                depth: 2,
                branching: 3,
                noise_p: 0.5,
                ..TreeSpec::default()
            },
            3,
            1,
        );
        let n_children = tree.node(0).children.len();
        let suite = Arc::new(SyntheticSuite::from_trees(vec![tree.clone()]));
        let mut gen = SyntheticGenerator::new(suite);
        let state = vec![tree.question.clone()];
        let mut seen = Vec::new();
        for _ in 0..n_children {
            let step = gen
                .next_step(&state, &SamplingParams::default(), 0)
                .unwrap();
            assert!(!seen.contains(&step.text), "duplicate before exhaustion");
            seen.push(step.text);
        }
    }

    #[test]
    fn zero_noise_completion_reaches_answer() {
        let tree = small_tree();
        let suite = Arc::new(SyntheticSuite::from_trees(vec![tree.clone()]));
        let mut gen = SyntheticGenerator::new(suite);
        let state = vec![tree.question.clone()];
        let completion = gen.complete(&state, &SamplingParams::default(), 5).unwrap();
        assert_eq!(completion, tree.correct_path_steps().concat());
        assert!(completion.ends_with(&format!(
            "The answer is: {}.{}",
            tree.correct_answer, tree.eos_marker
        )));
    }

    #[test]
    fn noise_frequency_at_roots() {
        // First probe of each root is off-branch with probability noise_p.
        let spec = TreeSpec {
            depth: 2,
            branching: 3,
            noise_p: 0.3,
            ..TreeSpec::default()
        };
        let mut off = 0usize;
        let total = 1000;
        for i in 0..total {
            let tree = SyntheticTree::generate(&spec, 21, i as u64);
            let first = &tree.nodes[tree.nodes[0].children[tree.sample_order(0)[0]]];
            if first.label != Some(RewardLabel::Positive) {
                off += 1;
            }
        }
        let frac = off as f64 / total as f64;
        assert!((frac - 0.3).abs() <= 0.05, "off-branch fraction {frac}");
    }

    #[test]
    fn oracle_returns_true_labels() {
        let tree = small_tree();
        let suite = Arc::new(SyntheticSuite::from_trees(vec![tree.clone()]));
        let mut oracle = OracleRewardModel::perfect(Arc::clone(&suite));
        let mut prev = tree.question.clone();
        for step in tree.correct_path_steps() {
            let label = oracle
                .score_step(&RewardRequest::new(prev.clone(), step.clone()))
                .unwrap();
            assert_eq!(label, RewardLabel::Positive);
            prev.push_str(&step);
        }
        // A distractor child of the root scores its own (non-positive) label.
        let root = tree.node(0);
        let off = root
            .children
            .iter()
            .find(|&&c| tree.node(c).label != Some(RewardLabel::Positive));
        if let Some(&c) = off {
            let label = oracle
                .score_step(&RewardRequest::new(
                    tree.question.clone(),
                    tree.node(c).step.clone(),
                ))
                .unwrap();
            assert_eq!(label, tree.node(c).label.unwrap());
        }
    }

    #[test]
    fn oracle_rejects_foreign_steps() {
        let tree = small_tree();
        let suite = Arc::new(SyntheticSuite::from_trees(vec![tree.clone()]));
        let mut oracle = OracleRewardModel::perfect(suite);
        let err = oracle
            .score_step(&RewardRequest::new(tree.question.clone(), "made up\n"))
            .unwrap_err();
        assert!(matches!(err, RewardError::UnknownStep { .. }));
    }

    #[test]
    fn bare_stop_at_leaf_scores_negative() {
        let tree = small_tree();
        let suite = Arc::new(SyntheticSuite::from_trees(vec![tree.clone()]));
        let mut gen = SyntheticGenerator::new(Arc::clone(&suite));
        let mut oracle = OracleRewardModel::perfect(suite);

        // Walk to any wrong leaf (one without an eos marker).
        fn find_wrong_leaf(tree: &SyntheticTree, node: usize, steps: &mut Vec<String>) -> bool {
            if tree.is_leaf(node) {
                return node != 0 && !tree.node(node).step.contains(&tree.eos_marker);
            }
            for &c in &tree.node(node).children {
                steps.push(tree.node(c).step.clone());
                if find_wrong_leaf(tree, c, steps) {
                    return true;
                }
                steps.pop();
            }
            false
        }
        let mut steps = Vec::new();
        assert!(find_wrong_leaf(&tree, 0, &mut steps), "tree has a wrong leaf");
        let mut state = vec![tree.question.clone()];
        state.extend(steps);
        let step = gen
            .next_step(&state, &SamplingParams::default(), 0)
            .unwrap();
        assert_eq!(step.text, tree.eos_marker);
        assert_eq!(step.terminated_by, StepTermination::Eos);
        let label = oracle
            .score_step(&RewardRequest::new(render_state(&state), step.text))
            .unwrap();
        assert_eq!(label, RewardLabel::Negative);
    }

    #[test]
    fn suite_prefix_lookup() {
        let suite = SyntheticSuite::generate(&SuiteSpec {
            size: 10,
            seed: 5,
            ..SuiteSpec::default()
        });
        for tree in suite.trees() {
            let rendered = format!("{}{}", tree.question, "[n1] anything\n");
            let found = suite.find_by_prefix(&rendered).unwrap();
            assert_eq!(found.question, tree.question);
        }
        assert!(suite.find_by_prefix("unrelated text").is_none());
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = TreeSpec::default();
        let a = SyntheticTree::generate(&spec, 9, 4);
        let b = SyntheticTree::generate(&spec, 9, 4);
        assert_eq!(a, b);
        let c = SyntheticTree::generate(&spec, 10, 4);
        assert_ne!(a.question, c.question);
    }
}
