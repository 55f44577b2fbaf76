//! Serializable search traces.
//!
//! A trace captures one finished search as a single JSON document:
//! `{config, nodes, path, termination, stats}`. Traces are the input to
//! the case-study renderer in the companion crate.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::label::RewardLabel;
use crate::search::{NodeId, SearchConfig, SearchOutcome, SearchStats, Termination};

/// One node as it appears in a trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub step: String,
    pub reward: Option<RewardLabel>,
    pub value: i64,
    pub children: Vec<NodeId>,
}

/// A finished search, ready for serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub config: SearchConfig,
    pub nodes: Vec<TraceNode>,
    pub path: Vec<NodeId>,
    pub termination: Termination,
    pub stats: SearchStats,
}

impl SearchTrace {
    pub fn from_outcome(outcome: &SearchOutcome) -> Self {
        let nodes = outcome
            .tree
            .nodes()
            .map(|n| TraceNode {
                id: n.id,
                parent: n.parent,
                step: n.step.clone(),
                reward: n.reward,
                value: n.value,
                children: n.children.clone(),
            })
            .collect();
        Self {
            config: outcome.config.clone(),
            nodes,
            path: outcome.path.clone(),
            termination: outcome.termination,
            stats: outcome.stats,
        }
    }

    /// Node lookup by id; trace nodes are stored in id order.
    pub fn node(&self, id: NodeId) -> Option<&TraceNode> {
        self.nodes.get(id.0)
    }
}
