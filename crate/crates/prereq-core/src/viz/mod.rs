//! Radial layout and visual exports.
//!
//! Nodes are grouped by breadth-first depth and mapped to concentric
//! shells: the shell radius is `depth * RING_SPACING` and the nodes of a
//! shell are spread evenly over the full circle, ordered by root subtree
//! and then by id so sibling subtrees stay angularly grouped. Outcome
//! status picks the color: successes are blue (one shade per answering
//! tier), failures and skipped nodes are red (skipped lighter). An
//! optional toggle also paints retried-but-solved nodes red.

mod dot;
mod svg;

pub use dot::render_dot;
pub use svg::{render_svg, render_venn_svg};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cascade::{NodeStatus, RunResult};
use crate::graph::{ConceptGraph, NodeId};

/// Distance between consecutive shells, in canvas units (px).
pub const RING_SPACING: f64 = 100.0;
/// Node circle radius in the SVG output.
pub const NODE_RADIUS: f64 = 14.0;
/// Canvas padding beyond the outermost shell.
pub const CANVAS_MARGIN: f64 = 60.0;
/// Shell-zero radius when the forest has more than one root.
pub const MULTI_ROOT_RADIUS: f64 = 35.0;

/// Blue shades by answering tier (cycled when the cascade is deeper).
pub const SUCCESS_FILLS: [&str; 4] = ["#1f77b4", "#4f9fd8", "#86c5ea", "#b7ddf4"];
pub const FAIL_FILL: &str = "#d62728";
pub const FAILED_ALL_FILL: &str = "#8c1515";
pub const SKIPPED_FILL: &str = "#f2a0a0";
pub const RETRIED_FILL: &str = "#e05c5c";

/// Resolved color class of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorClass {
    Success {
        model_idx: usize,
    },
    /// Solved only after at least one failed attempt, painted red when the
    /// retried-as-red toggle is on.
    RetriedSuccess {
        model_idx: usize,
    },
    Fail,
    FailedAll,
    Skipped,
}

impl ColorClass {
    pub fn is_red(&self) -> bool {
        !matches!(self, ColorClass::Success { .. })
    }

    pub fn fill(&self) -> &'static str {
        match self {
            ColorClass::Success { model_idx } => SUCCESS_FILLS[model_idx % SUCCESS_FILLS.len()],
            ColorClass::RetriedSuccess { .. } => RETRIED_FILL,
            ColorClass::Fail => FAIL_FILL,
            ColorClass::FailedAll => FAILED_ALL_FILL,
            ColorClass::Skipped => SKIPPED_FILL,
        }
    }

    /// Stable class name carried into DOT/SVG attributes.
    pub fn css_class(&self) -> &'static str {
        match self {
            ColorClass::Success { .. } => "success",
            ColorClass::RetriedSuccess { .. } => "retried",
            ColorClass::Fail => "fail",
            ColorClass::FailedAll => "failed-all",
            ColorClass::Skipped => "skipped",
        }
    }
}

/// Layout options.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LayoutOptions {
    /// Paint retried-but-solved nodes in the red class. Off by default.
    pub retried_as_red: bool,
}

/// Polar placement of every node: shell index (BFS depth), radius, angle,
/// and resolved color class.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialLayout {
    /// node id -> (radius, angle in radians).
    pub positions: BTreeMap<NodeId, (f64, f64)>,
    pub shell_of: BTreeMap<NodeId, usize>,
    pub color_of: BTreeMap<NodeId, ColorClass>,
}

impl RadialLayout {
    pub fn max_radius(&self) -> f64 {
        self.positions.values().map(|&(r, _)| r).fold(0.0, f64::max)
    }

    pub fn red_count(&self) -> usize {
        self.color_of.values().filter(|c| c.is_red()).count()
    }
}

/// Visualization failures.
#[derive(Debug, thiserror::Error)]
pub enum VizError {
    #[error("run does not cover the graph: node \"{node_id}\" has no outcome")]
    MissingOutcome { node_id: String },
    #[error("graph structure error: {0}")]
    Graph(#[from] crate::graph::GraphError),
    #[error("venn rendering supports 2 or 3 sets, got {count}")]
    UnsupportedSetCount { count: usize },
}

/// Lays out a run on concentric shells (default options).
pub fn radial_layout(graph: &ConceptGraph, run: &RunResult) -> Result<RadialLayout, VizError> {
    radial_layout_with(graph, run, &LayoutOptions::default())
}

/// Lays out a run on concentric shells.
pub fn radial_layout_with(
    graph: &ConceptGraph,
    run: &RunResult,
    options: &LayoutOptions,
) -> Result<RadialLayout, VizError> {
    for node in graph.nodes() {
        if !run.outcomes.contains_key(&node.id) {
            return Err(VizError::MissingOutcome {
                node_id: node.id.to_string(),
            });
        }
    }
    let depths = graph.bfs_depths()?;

    // Group by shell, ordered by (root subtree, id) so each subtree's nodes
    // stay angularly adjacent.
    let mut shells: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for (id, &depth) in &depths {
        shells.entry(depth).or_default().push(id.clone());
    }
    for members in shells.values_mut() {
        members.sort_by_key(|id| {
            let root = graph
                .root_of(id.as_str())
                .cloned()
                .unwrap_or_else(|| id.clone());
            (root, id.clone())
        });
    }

    let mut positions = BTreeMap::new();
    let mut shell_of = BTreeMap::new();
    for (&depth, members) in &shells {
        // A lone root sits at the origin; multiple roots get a small ring
        // of their own so they do not overlap.
        let radius = if depth == 0 && members.len() > 1 {
            MULTI_ROOT_RADIUS
        } else {
            depth as f64 * RING_SPACING
        };
        let count = members.len() as f64;
        for (k, id) in members.iter().enumerate() {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / count;
            positions.insert(id.clone(), (radius, angle));
            shell_of.insert(id.clone(), depth);
        }
    }

    let mut color_of = BTreeMap::new();
    for (id, outcome) in &run.outcomes {
        let class = match outcome.status {
            NodeStatus::Success => {
                let model_idx = outcome.answering_model_idx.unwrap_or(0);
                if options.retried_as_red && outcome.attempts.len() > 1 {
                    ColorClass::RetriedSuccess { model_idx }
                } else {
                    ColorClass::Success { model_idx }
                }
            }
            NodeStatus::Fail => ColorClass::Fail,
            NodeStatus::FailedAll => ColorClass::FailedAll,
            NodeStatus::Skipped => ColorClass::Skipped,
        };
        color_of.insert(id.clone(), class);
    }

    Ok(RadialLayout {
        positions,
        shell_of,
        color_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{ModelSpec, ScriptedOracle};
    use crate::cascade::{evaluate_graph, CascadeConfig};
    use crate::graph::{ConceptNode, McqTask, TagSet, TaskSet};

    fn tags(labels: &[&str]) -> TagSet {
        labels.iter().copied().collect()
    }

    fn run_pair(node_count: usize) -> (ConceptGraph, RunResult) {
        let mut nodes = vec![ConceptNode::new("n00", None, "", tags(&["T"]))];
        for i in 1..node_count {
            let parent = format!("n{:02}", (i - 1) / 3);
            let parent_tags = nodes
                .iter()
                .find(|n: &&ConceptNode| n.id.as_str() == parent)
                .unwrap()
                .tags
                .clone();
            let mut t = parent_tags;
            t.insert(format!("T{i}"));
            nodes.push(ConceptNode::new(
                format!("n{:02}", i),
                Some(parent.as_str().into()),
                "",
                t,
            ));
        }
        let graph = ConceptGraph::new(nodes).unwrap();
        let tasks = TaskSet::from_tasks(
            graph
                .nodes()
                .map(|n| McqTask::new(n.id.clone(), "q", ["a", "b", "c", "d"], 0))
                .collect(),
        )
        .unwrap();
        let mut oracle = ScriptedOracle::new();
        for node in graph.nodes() {
            oracle.set("m", node.id.as_str(), 0);
        }
        let cascade = CascadeConfig::new(vec![ModelSpec::scripted("m")], 0);
        let run = evaluate_graph(&graph, &tasks, &cascade, &oracle, 0).unwrap();
        (graph, run)
    }

    #[test]
    fn single_root_sits_at_the_origin() {
        let (graph, run) = run_pair(1);
        let layout = radial_layout(&graph, &run).unwrap();
        assert_eq!(layout.positions["n00"], (0.0, 0.0));
        assert_eq!(layout.shell_of["n00"], 0);
    }

    #[test]
    fn three_children_are_evenly_spaced_on_ring_one() {
        let (graph, run) = run_pair(4);
        let layout = radial_layout(&graph, &run).unwrap();
        let expected = 2.0 * std::f64::consts::PI / 3.0;
        for (k, id) in ["n01", "n02", "n03"].iter().enumerate() {
            let (radius, angle) = layout.positions[*id];
            assert_eq!(radius, RING_SPACING);
            assert!((angle - expected * k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn shells_equal_bfs_depths() {
        let (graph, run) = run_pair(12);
        let layout = radial_layout(&graph, &run).unwrap();
        let depths = graph.bfs_depths().unwrap();
        for (id, depth) in depths {
            assert_eq!(layout.shell_of[&id], depth);
            let (radius, _) = layout.positions[&id];
            assert_eq!(radius, depth as f64 * RING_SPACING);
        }
    }

    #[test]
    fn angles_within_a_shell_are_unique() {
        let (graph, run) = run_pair(12);
        let layout = radial_layout(&graph, &run).unwrap();
        let mut seen: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
        for (id, &(_, angle)) in &layout.positions {
            let shell = layout.shell_of[id];
            let bits = angle.to_bits();
            let entry = seen.entry(shell).or_default();
            assert!(!entry.contains(&bits), "duplicate angle in shell {shell}");
            entry.push(bits);
        }
    }

    #[test]
    fn run_must_cover_graph() {
        let (graph, mut run) = run_pair(3);
        run.outcomes.remove("n02");
        assert!(matches!(
            radial_layout(&graph, &run),
            Err(VizError::MissingOutcome { .. })
        ));
    }

    #[test]
    fn color_classes_follow_status_and_toggle() {
        use crate::cascade::{NodeOutcome, NodeStatus};
        let (graph, mut run) = run_pair(2);
        // Make n00 a retried success (two attempts) by hand.
        let outcome = run.outcomes.get_mut("n00").unwrap();
        let extra = outcome.attempts[0].clone();
        outcome.attempts.push(extra);
        assert_eq!(outcome.status, NodeStatus::Success);
        let _ = NodeOutcome {
            node_id: "n00".into(),
            status: NodeStatus::Success,
            answering_model_idx: Some(0),
            attempts: vec![],
            path_fails_at_entry: 0,
        };

        let plain = radial_layout(&graph, &run).unwrap();
        assert_eq!(plain.color_of["n00"], ColorClass::Success { model_idx: 0 });

        let toggled = radial_layout_with(
            &graph,
            &run,
            &LayoutOptions {
                retried_as_red: true,
            },
        )
        .unwrap();
        assert_eq!(
            toggled.color_of["n00"],
            ColorClass::RetriedSuccess { model_idx: 0 }
        );
        assert!(toggled.color_of["n00"].is_red());
        assert_eq!(toggled.red_count(), plain.red_count() + 1);
    }
}
