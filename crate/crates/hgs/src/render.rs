//! Plain-text rendering of search traces: the accepted path with each
//! step tagged by its verdict, plus explored-but-rejected siblings.

use std::fmt::Write;

use hgs_core::label::RewardLabel;
use hgs_core::trace::SearchTrace;

fn tag(reward: Option<RewardLabel>) -> &'static str {
    match reward {
        Some(RewardLabel::Positive) => "[+]",
        Some(RewardLabel::Neutral) => "[0]",
        Some(RewardLabel::Negative) => "[-]",
        None => "[ ]",
    }
}

fn display_step(step: &str) -> String {
    let trimmed = step.trim_end_matches('\n');
    if trimmed.is_empty() {
        "(empty step)".to_string()
    } else {
        trimmed.replace('\n', "\\n")
    }
}

/// Renders a trace as an annotated path. Positive steps are `[+]`,
/// neutral `[0]`, negative `[-]`.
pub fn render_trace(trace: &SearchTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "termination: {:?}", trace.termination);
    let _ = writeln!(
        out,
        "stats: expansions={} reward_calls={} backtracks={} neutral_descents={}",
        trace.stats.expansions,
        trace.stats.reward_calls,
        trace.stats.backtracks,
        trace.stats.neutral_descents
    );
    let _ = writeln!(
        out,
        "nodes explored: {} (path length {})",
        trace.nodes.len(),
        trace.path.len()
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "accepted path:");
    for &id in &trace.path {
        let Some(node) = trace.node(id) else { continue };
        if node.parent.is_none() {
            let _ = writeln!(out, "  (root) value=0");
            continue;
        }
        let _ = writeln!(
            out,
            "  {} {}  (value {})",
            tag(node.reward),
            display_step(&node.step),
            node.value
        );
    }

    let off_path: Vec<_> = trace
        .nodes
        .iter()
        .filter(|n| n.parent.is_some() && !trace.path.contains(&n.id))
        .collect();
    if !off_path.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "explored and rejected:");
        for node in off_path {
            let _ = writeln!(
                out,
                "  {} {}  (under node {})",
                tag(node.reward),
                display_step(&node.step),
                node.parent.expect("checked")
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hgs_core::generator::{SamplingParams, ScriptedGenerator};
    use hgs_core::reward::{RewardRequest, TableRewardModel};
    use hgs_core::search::{run_search, SearchConfig};
    use hgs_core::trace::SearchTrace;

    #[test]
    fn renders_tagged_path() {
        let mut generator = ScriptedGenerator::new()
            .with_eos_markers(["<|eot|>"])
            .with_steps("Q?", ["bad\n", "good\n"])
            .with_steps("Q?good\n", ["The answer is: 3.<|eot|>"]);
        let mut reward = TableRewardModel::from_pairs([
            (RewardRequest::new("Q?", "bad\n"), RewardLabel::Negative),
            (RewardRequest::new("Q?", "good\n"), RewardLabel::Positive),
            (
                RewardRequest::new("Q?good\n", "The answer is: 3.<|eot|>"),
                RewardLabel::Positive,
            ),
        ]);
        let outcome = run_search(
            "Q?",
            &mut generator,
            &mut reward,
            &SearchConfig {
                max_bandwidth: 2,
                ..SearchConfig::default()
            },
            &SamplingParams::default(),
        )
        .unwrap();
        let text = render_trace(&SearchTrace::from_outcome(&outcome));
        assert!(text.contains("[+] good"));
        assert!(text.contains("[+] The answer is: 3.<|eot|>"));
        assert!(text.contains("[-] bad"));
        assert!(text.contains("termination: Eos"));
    }
}
