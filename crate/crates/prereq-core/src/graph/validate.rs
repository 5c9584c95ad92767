//! Graph and task validation.
//!
//! Violations are data, not failures: validation always succeeds and returns
//! a report naming each offending node and the rule it breaks. The
//! inheritance rule requires every child's tag set to contain its parent's
//! tags plus one or two unique additions. The subset half is always an
//! error; the cardinality half defaults to a warning so that drifting
//! third-party datasets stay loadable, and can be promoted to an error.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::{ConceptGraph, McqTask, NodeId, TaskSet};

/// Violation severity. Errors make a graph unusable for evaluation;
/// warnings flag drift but keep the dataset loadable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

/// The rule a graph violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `parent_id` references the node itself.
    SelfParent,
    /// `parent_id` references a node that does not exist.
    DanglingParent,
    /// The parent chain loops back on itself.
    ParentCycle,
    /// A non-empty graph has no root node.
    NoRoot,
    /// The child's tags do not contain all of the parent's tags.
    InheritanceSubset,
    /// The child adds a number of unique tags outside `1..=2`.
    InheritanceCardinality,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ViolationKind::SelfParent => "self_parent",
            ViolationKind::DanglingParent => "dangling_parent",
            ViolationKind::ParentCycle => "parent_cycle",
            ViolationKind::NoRoot => "no_root",
            ViolationKind::InheritanceSubset => "inheritance_subset",
            ViolationKind::InheritanceCardinality => "inheritance_cardinality",
        };
        f.write_str(name)
    }
}

/// One broken rule on one node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub severity: Severity,
    pub node_id: NodeId,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(
            f,
            "{level}[{}] {}: {}",
            self.kind, self.node_id, self.message
        )
    }
}

/// All violations found in one validation pass.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    /// True when no violations at all were found.
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.violations
            .iter()
            .any(|v| v.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }

    fn push(&mut self, kind: ViolationKind, severity: Severity, node_id: &NodeId, message: String) {
        self.violations.push(Violation {
            kind,
            severity,
            node_id: node_id.clone(),
            message,
        });
    }
}

/// Knobs for validation strictness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Severity of the unique-tag cardinality rule. Defaults to
    /// [`Severity::Warning`].
    pub cardinality_severity: Severity,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            cardinality_severity: Severity::Warning,
        }
    }
}

/// Validates a graph with default strictness.
pub fn validate_graph(graph: &ConceptGraph) -> ValidationReport {
    validate_graph_with(graph, &ValidationConfig::default())
}

/// Validates a graph: parent link integrity, acyclicity, root existence,
/// and the tag inheritance rule. An empty report means every invariant
/// holds.
pub fn validate_graph_with(graph: &ConceptGraph, config: &ValidationConfig) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !graph.is_empty() && graph.roots().is_empty() {
        let first = graph.nodes().next().expect("non-empty graph");
        report.push(
            ViolationKind::NoRoot,
            Severity::Error,
            &first.id,
            "graph has nodes but no root (every node has a parent)".to_string(),
        );
    }

    for node in graph.nodes() {
        let parent_id = match &node.parent_id {
            None => continue,
            Some(p) => p,
        };
        if parent_id == &node.id {
            report.push(
                ViolationKind::SelfParent,
                Severity::Error,
                &node.id,
                "node is its own parent".to_string(),
            );
            continue;
        }
        let parent = match graph.node(parent_id.as_str()) {
            Some(p) => p,
            None => {
                report.push(
                    ViolationKind::DanglingParent,
                    Severity::Error,
                    &node.id,
                    format!("parent \"{parent_id}\" does not exist"),
                );
                continue;
            }
        };

        let missing = parent.tags.difference(&node.tags);
        if !missing.is_empty() {
            report.push(
                ViolationKind::InheritanceSubset,
                Severity::Error,
                &node.id,
                format!("missing inherited tag(s) from parent \"{parent_id}\": {missing}"),
            );
        }
        let unique = node.tags.difference(&parent.tags);
        if !(1..=2).contains(&unique.len()) {
            report.push(
                ViolationKind::InheritanceCardinality,
                config.cardinality_severity,
                &node.id,
                format!("adds {} unique tag(s), expected 1 or 2", unique.len()),
            );
        }
    }

    for node_id in parent_cycle_members(graph) {
        report.push(
            ViolationKind::ParentCycle,
            Severity::Error,
            &node_id,
            "parent chain forms a cycle".to_string(),
        );
    }

    report
}

/// Nodes that sit on a parent-link cycle, in id order.
fn parent_cycle_members(graph: &ConceptGraph) -> Vec<NodeId> {
    let mut resolved: BTreeSet<NodeId> = BTreeSet::new();
    let mut on_cycle: BTreeSet<NodeId> = BTreeSet::new();

    for start in graph.nodes() {
        if resolved.contains(&start.id) {
            continue;
        }
        let mut path: Vec<NodeId> = Vec::new();
        let mut seen: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut current = start;
        loop {
            if resolved.contains(&current.id) {
                break;
            }
            if let Some(&at) = seen.get(&current.id) {
                for id in &path[at..] {
                    on_cycle.insert(id.clone());
                }
                break;
            }
            seen.insert(current.id.clone(), path.len());
            path.push(current.id.clone());
            match current
                .parent_id
                .as_ref()
                .and_then(|p| graph.node(p.as_str()))
            {
                Some(parent) => current = parent,
                None => break, // root or dangling parent; chain terminates
            }
        }
        resolved.extend(path);
    }

    on_cycle.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Task validation
// ---------------------------------------------------------------------------

/// The rule a task violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskViolationKind {
    /// The task references a node that is not in the graph.
    UnknownNode,
    /// The question text is empty.
    EmptyQuestion,
    /// The option list does not have exactly four entries.
    OptionCount,
    /// An option is empty.
    EmptyOption,
    /// `correct_idx` is outside `0..=3`.
    IndexOutOfRange,
    /// A graph node has no task.
    MissingTask,
}

/// One broken rule on one task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskViolation {
    pub kind: TaskViolationKind,
    pub severity: Severity,
    pub node_id: NodeId,
    pub message: String,
}

/// Schema checks on a single task, independent of any graph.
pub fn validate_task_fields(task: &McqTask) -> Vec<TaskViolation> {
    let mut out = Vec::new();
    let mut push = |kind, severity, message: String| {
        out.push(TaskViolation {
            kind,
            severity,
            node_id: task.node_id.clone(),
            message,
        });
    };
    if task.question.trim().is_empty() {
        push(
            TaskViolationKind::EmptyQuestion,
            Severity::Error,
            "question is empty".to_string(),
        );
    }
    if task.options.len() != 4 {
        push(
            TaskViolationKind::OptionCount,
            Severity::Error,
            format!("{} options, expected exactly 4", task.options.len()),
        );
    }
    for (i, option) in task.options.iter().enumerate() {
        if option.trim().is_empty() {
            push(
                TaskViolationKind::EmptyOption,
                Severity::Error,
                format!("option {i} is empty"),
            );
        }
    }
    if task.correct_idx > 3 {
        push(
            TaskViolationKind::IndexOutOfRange,
            Severity::Error,
            format!("correct_idx {} outside 0..=3", task.correct_idx),
        );
    }
    out
}

/// Validates a task set against a graph: per-task schema checks, unknown
/// node references (error), and coverage (node without a task, warning).
pub fn validate_tasks(graph: &ConceptGraph, tasks: &TaskSet) -> Vec<TaskViolation> {
    let mut out = Vec::new();
    for task in tasks.iter() {
        out.extend(validate_task_fields(task));
        if !graph.contains(task.node_id.as_str()) {
            out.push(TaskViolation {
                kind: TaskViolationKind::UnknownNode,
                severity: Severity::Error,
                node_id: task.node_id.clone(),
                message: "task references a node that is not in the graph".to_string(),
            });
        }
    }
    for node in graph.nodes() {
        if tasks.get(node.id.as_str()).is_none() {
            out.push(TaskViolation {
                kind: TaskViolationKind::MissingTask,
                severity: Severity::Warning,
                node_id: node.id.clone(),
                message: "node has no task".to_string(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ConceptNode, TagSet};

    fn tags(labels: &[&str]) -> TagSet {
        labels.iter().copied().collect()
    }

    /// Five-node fixture whose tag chain reproduces the documented
    /// inheritance example for analog electronics.
    pub(crate) fn five_node_fixture() -> ConceptGraph {
        ConceptGraph::new(vec![
            ConceptNode::new(
                "n0",
                None,
                "Identify the component used to amplify weak signals.",
                tags(&["Analog Circuits", "Signal Processing"]),
            ),
            ConceptNode::new(
                "n1",
                Some("n0".into()),
                "Pick the device family for discrete amplification.",
                tags(&[
                    "Analog Circuits",
                    "Signal Processing",
                    "Electronic Components",
                    "Transistors",
                ]),
            ),
            ConceptNode::new(
                "n2",
                Some("n1".into()),
                "Select the building blocks of periodic signal generation.",
                tags(&[
                    "Analog Circuits",
                    "Signal Processing",
                    "Electronic Components",
                    "Transistors",
                    "Amplifiers",
                    "Oscillators",
                ]),
            ),
            ConceptNode::new(
                "n3",
                Some("n2".into()),
                "Assess loop stability of an amplifier with feedback.",
                tags(&[
                    "Analog Circuits",
                    "Signal Processing",
                    "Electronic Components",
                    "Transistors",
                    "Amplifiers",
                    "Oscillators",
                    "Feedback Loops",
                    "Phase Margin Analysis",
                ]),
            ),
            ConceptNode::new(
                "n4",
                Some("n2".into()),
                "Estimate noise contributions in an oscillator stage.",
                tags(&[
                    "Analog Circuits",
                    "Signal Processing",
                    "Electronic Components",
                    "Transistors",
                    "Amplifiers",
                    "Oscillators",
                    "Noise Analysis",
                ]),
            ),
        ])
        .unwrap()
    }

    #[test]
    fn five_node_fixture_is_clean() {
        let report = validate_graph(&five_node_fixture());
        assert!(report.is_clean(), "unexpected violations: {:?}", report);
    }

    #[test]
    fn child_adding_two_tags_is_valid() {
        // Parent carries the six-tag set, child adds exactly two.
        let g = five_node_fixture();
        let report = validate_graph(&g);
        assert!(!report.violations.iter().any(|v| v.node_id.as_str() == "n3"));
    }

    #[test]
    fn empty_graph_is_clean() {
        assert!(validate_graph(&ConceptGraph::empty()).is_clean());
    }

    #[test]
    fn dropped_parent_tag_is_subset_error() {
        let g = ConceptGraph::new(vec![
            ConceptNode::new("p", None, "", tags(&["A", "B"])),
            ConceptNode::new("c", Some("p".into()), "", tags(&["A", "C"])),
        ])
        .unwrap();
        let report = validate_graph(&g);
        let v: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::InheritanceSubset)
            .collect();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].node_id.as_str(), "c");
        assert_eq!(v[0].severity, Severity::Error);
        assert!(v[0].message.contains('B'));
    }

    #[test]
    fn zero_unique_tags_is_cardinality_warning() {
        let g = ConceptGraph::new(vec![
            ConceptNode::new("p", None, "", tags(&["A"])),
            ConceptNode::new("c", Some("p".into()), "", tags(&["A"])),
        ])
        .unwrap();
        let report = validate_graph(&g);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(
            report.violations[0].kind,
            ViolationKind::InheritanceCardinality
        );
        assert_eq!(report.violations[0].severity, Severity::Warning);
        assert!(!report.has_errors());
    }

    #[test]
    fn three_unique_tags_is_cardinality_violation_promotable_to_error() {
        let g = ConceptGraph::new(vec![
            ConceptNode::new("p", None, "", tags(&["A"])),
            ConceptNode::new("c", Some("p".into()), "", tags(&["A", "X", "Y", "Z"])),
        ])
        .unwrap();
        let default_report = validate_graph(&g);
        assert_eq!(default_report.violations.len(), 1);
        assert_eq!(
            default_report.violations[0].kind,
            ViolationKind::InheritanceCardinality
        );
        assert_eq!(default_report.violations[0].severity, Severity::Warning);

        let strict = ValidationConfig {
            cardinality_severity: Severity::Error,
        };
        let strict_report = validate_graph_with(&g, &strict);
        assert!(strict_report.has_errors());
    }

    #[test]
    fn cardinality_matches_set_difference_oracle() {
        // Direct set-difference oracle over every parent/child pair of a
        // hand-built fixture with deliberate drift.
        let nodes = vec![
            ConceptNode::new("a", None, "", tags(&["T"])),
            ConceptNode::new("b", Some("a".into()), "", tags(&["T", "U"])),
            ConceptNode::new("c", Some("a".into()), "", tags(&["T", "U", "V", "W"])),
            ConceptNode::new("d", Some("b".into()), "", tags(&["T", "U"])),
            ConceptNode::new(
                "e",
                Some("c".into()),
                "",
                tags(&["T", "U", "V", "W", "X", "Y", "Z"]),
            ),
        ];
        let g = ConceptGraph::new(nodes.clone()).unwrap();
        let report = validate_graph(&g);
        for node in &nodes {
            let parent = match &node.parent_id {
                Some(p) => nodes.iter().find(|n| &n.id == p).unwrap(),
                None => continue,
            };
            let unique: Vec<&str> = node
                .tags
                .iter()
                .filter(|t| !parent.tags.contains(t))
                .collect();
            let flagged = report
                .violations
                .iter()
                .any(|v| v.kind == ViolationKind::InheritanceCardinality && v.node_id == node.id);
            assert_eq!(
                flagged,
                !(1..=2).contains(&unique.len()),
                "cardinality flag mismatch on {}",
                node.id
            );
        }
    }

    #[test]
    fn dangling_parent_detected() {
        let g = ConceptGraph::new(vec![ConceptNode::new(
            "c",
            Some("ghost".into()),
            "",
            tags(&["A"]),
        )])
        .unwrap();
        let report = validate_graph(&g);
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::DanglingParent && v.node_id.as_str() == "c"));
    }

    #[test]
    fn parent_cycle_detected() {
        let g = ConceptGraph::new(vec![
            ConceptNode::new("a", Some("b".into()), "", tags(&["A"])),
            ConceptNode::new("b", Some("a".into()), "", tags(&["A"])),
        ])
        .unwrap();
        let report = validate_graph(&g);
        let cyclic: Vec<&str> = report
            .violations
            .iter()
            .filter(|v| v.kind == ViolationKind::ParentCycle)
            .map(|v| v.node_id.as_str())
            .collect();
        assert_eq!(cyclic, vec!["a", "b"]);
        // Zero roots is also reported.
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::NoRoot));
    }

    #[test]
    fn self_parent_detected() {
        let g = ConceptGraph::new(vec![
            ConceptNode::new("r", None, "", tags(&["A"])),
            ConceptNode::new("s", Some("s".into()), "", tags(&["A"])),
        ])
        .unwrap();
        let report = validate_graph(&g);
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::SelfParent && v.node_id.as_str() == "s"));
    }

    #[test]
    fn task_field_checks() {
        let good = McqTask::new("n0", "q?", ["a", "b", "c", "d"], 3);
        assert!(validate_task_fields(&good).is_empty());

        let five = McqTask {
            node_id: "n0".into(),
            question: "q?".into(),
            options: vec!["a".into(), "b".into(), "c".into(), "d".into(), "e".into()],
            correct_idx: 0,
        };
        assert!(validate_task_fields(&five)
            .iter()
            .any(|v| v.kind == TaskViolationKind::OptionCount));

        let bad_idx = McqTask::new("n0", "q?", ["a", "b", "c", "d"], 7);
        assert!(validate_task_fields(&bad_idx)
            .iter()
            .any(|v| v.kind == TaskViolationKind::IndexOutOfRange));
    }

    #[test]
    fn task_set_coverage_and_references() {
        let g = five_node_fixture();
        let mut tasks = TaskSet::new();
        tasks.insert(McqTask::new("n0", "q?", ["a", "b", "c", "d"], 1));
        tasks.insert(McqTask::new("zz", "q?", ["a", "b", "c", "d"], 1));
        let violations = validate_tasks(&g, &tasks);
        assert!(violations
            .iter()
            .any(|v| v.kind == TaskViolationKind::UnknownNode && v.node_id.as_str() == "zz"));
        // n1..n4 uncovered.
        assert_eq!(
            violations
                .iter()
                .filter(|v| v.kind == TaskViolationKind::MissingTask)
                .count(),
            4
        );
    }
}
