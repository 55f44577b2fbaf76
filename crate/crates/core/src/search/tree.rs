//! Arena-backed search tree.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::label::RewardLabel;

/// Identifier of a node within one [`SearchTree`]; the root is always id 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One node of the reasoning tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchNode {
    pub id: NodeId,
    /// Absent only on the root.
    pub parent: Option<NodeId>,
    /// The reasoning step this node adds; empty on the root.
    pub step: String,
    /// `[prompt, step_1, …, step_i]` — the full transcript up to and
    /// including this node's step.
    pub state: Vec<String>,
    /// Verdict for `step`; absent on the root.
    pub reward: Option<RewardLabel>,
    /// Cumulative signed reward along the path from the root. Maintained
    /// for traces; the search never branches on it.
    pub value: i64,
    /// Children in creation order.
    pub children: Vec<NodeId>,
    /// Set once the search has backtracked out of this node's subtree;
    /// dead nodes are skipped by later neutral descents.
    #[serde(default, skip_serializing_if = "is_false")]
    pub dead: bool,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Tree of explored reasoning steps, stored as an arena indexed by
/// [`NodeId`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTree {
    nodes: Vec<SearchNode>,
}

impl SearchTree {
    /// Creates a tree whose root holds the bare question as its state.
    pub fn new(question: impl Into<String>) -> Self {
        let question = question.into();
        Self {
            nodes: vec![SearchNode {
                id: NodeId(0),
                parent: None,
                step: String::new(),
                state: vec![question],
                reward: None,
                value: 0,
                children: Vec::new(),
                dead: false,
            }],
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn get(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id.0]
    }

    pub fn get_mut(&mut self, id: NodeId) -> &mut SearchNode {
        &mut self.nodes[id.0]
    }

    /// Node count; at least 1, since the root always exists.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &SearchNode> {
        self.nodes.iter()
    }

    /// Appends a scored child under `parent` and returns its id. The
    /// child's state extends the parent's state by `step`, and its value
    /// adds the reward's numeric value to the parent's.
    pub fn add_child(&mut self, parent: NodeId, step: String, reward: RewardLabel) -> NodeId {
        let id = NodeId(self.nodes.len());
        let parent_node = &self.nodes[parent.0];
        let mut state = parent_node.state.clone();
        state.push(step.clone());
        let value = parent_node.value + reward.as_int();
        self.nodes.push(SearchNode {
            id,
            parent: Some(parent),
            step,
            state,
            reward: Some(reward),
            value,
            children: Vec::new(),
            dead: false,
        });
        self.nodes[parent.0].children.push(id);
        id
    }

    /// Root-to-node path of ids.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = Vec::new();
        let mut current = Some(id);
        while let Some(node) = current {
            path.push(node);
            current = self.nodes[node.0].parent;
        }
        path.reverse();
        path
    }

    /// Children of `id` that are neutral-rewarded and not yet dead, in
    /// creation order.
    pub fn live_neutral_children(&self, id: NodeId) -> Vec<NodeId> {
        self.nodes[id.0]
            .children
            .iter()
            .copied()
            .filter(|&c| {
                let child = &self.nodes[c.0];
                child.reward == Some(RewardLabel::Neutral) && !child.dead
            })
            .collect()
    }

    /// Checks parent/child link consistency, state recurrence, and value
    /// recurrence over the whole tree. Used by tests and debug assertions.
    pub fn check_well_formed(&self) -> Result<(), String> {
        for node in &self.nodes {
            match node.parent {
                None => {
                    if node.id != NodeId(0) {
                        return Err(alloc::format!("non-root node {} has no parent", node.id));
                    }
                    if node.state.len() != 1 || !node.step.is_empty() {
                        return Err("root must hold exactly the question and no step".to_string());
                    }
                }
                Some(parent) => {
                    let parent_node = &self.nodes[parent.0];
                    if !parent_node.children.contains(&node.id) {
                        return Err(alloc::format!(
                            "node {} missing from parent {}'s children",
                            node.id,
                            parent
                        ));
                    }
                    let mut expected_state = parent_node.state.clone();
                    expected_state.push(node.step.clone());
                    if node.state != expected_state {
                        return Err(alloc::format!("state recurrence violated at node {}", node.id));
                    }
                    let reward = node
                        .reward
                        .ok_or_else(|| alloc::format!("non-root node {} lacks a reward", node.id))?;
                    if node.value != parent_node.value + reward.as_int() {
                        return Err(alloc::format!("value recurrence violated at node {}", node.id));
                    }
                }
            }
            for &child in &node.children {
                if self.nodes[child.0].parent != Some(node.id) {
                    return Err(alloc::format!(
                        "child {} does not point back to parent {}",
                        child,
                        node.id
                    ));
                }
            }
        }
        Ok(())
    }
}
