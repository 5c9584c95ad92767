//! Prerequisite graph data model.
//!
//! A concept graph is a forest of [`ConceptNode`]s linked by single parent
//! references. Every node carries a [`TagSet`] of complexity tags; a child's
//! tags must contain its parent's tags plus one or two unique additions, so
//! conceptual complexity grows strictly along every root-to-leaf path. Each
//! node is paired with a four-option [`McqTask`] whose ground truth is a
//! zero-based answer index.
//!
//! Graphs are immutable after construction: the child index, root list, and
//! depth map are derived once and shared freely across readers.

mod validate;

pub mod io;

pub use validate::{
    validate_graph, validate_graph_with, validate_task_fields, validate_tasks, Severity,
    TaskViolation, TaskViolationKind, ValidationConfig, ValidationReport, Violation, ViolationKind,
};

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::hash::sha256_hex;

// ---------------------------------------------------------------------------
// Identifiers and tag sets
// ---------------------------------------------------------------------------

/// Node identifier, unique within a graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

impl Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Ordered set of unique complexity tags.
///
/// Labels are trimmed on insertion and compared by exact, case-sensitive
/// string equality: `"Nonlinear Distortion"` and `"Non-linear Distortion"`
/// are distinct tags. Empty labels are discarded.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct TagSet {
    tags: BTreeSet<String>,
}

impl TagSet {
    pub fn new() -> Self {
        TagSet::default()
    }

    pub fn insert(&mut self, label: impl Into<String>) -> bool {
        let label = label.into();
        let trimmed = label.trim();
        if trimmed.is_empty() {
            return false;
        }
        self.tags.insert(trimmed.to_string())
    }

    pub fn contains(&self, label: &str) -> bool {
        self.tags.contains(label)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Tags in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tags.iter().map(String::as_str)
    }

    pub fn is_subset(&self, other: &TagSet) -> bool {
        self.tags.is_subset(&other.tags)
    }

    pub fn union(&self, other: &TagSet) -> TagSet {
        TagSet {
            tags: self.tags.union(&other.tags).cloned().collect(),
        }
    }

    pub fn intersection(&self, other: &TagSet) -> TagSet {
        TagSet {
            tags: self.tags.intersection(&other.tags).cloned().collect(),
        }
    }

    /// Tags in `self` that are not in `other`.
    pub fn difference(&self, other: &TagSet) -> TagSet {
        TagSet {
            tags: self.tags.difference(&other.tags).cloned().collect(),
        }
    }

    pub fn extend_from(&mut self, other: &TagSet) {
        for tag in &other.tags {
            self.tags.insert(tag.clone());
        }
    }
}

impl<S: Into<String>> FromIterator<S> for TagSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut set = TagSet::new();
        for label in iter {
            set.insert(label);
        }
        set
    }
}

impl From<Vec<String>> for TagSet {
    fn from(labels: Vec<String>) -> Self {
        labels.into_iter().collect()
    }
}

impl From<TagSet> for Vec<String> {
    fn from(set: TagSet) -> Self {
        set.tags.into_iter().collect()
    }
}

impl fmt::Display for TagSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for tag in &self.tags {
            if !first {
                f.write_str(", ")?;
            }
            f.write_str(tag)?;
            first = false;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Nodes and graphs
// ---------------------------------------------------------------------------

/// A single concept in the prerequisite hierarchy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptNode {
    pub id: NodeId,
    /// Parent reference; `None` marks a root.
    pub parent_id: Option<NodeId>,
    pub description: String,
    pub tags: TagSet,
}

impl ConceptNode {
    pub fn new(
        id: impl Into<NodeId>,
        parent_id: Option<NodeId>,
        description: impl Into<String>,
        tags: TagSet,
    ) -> Self {
        ConceptNode {
            id: id.into(),
            parent_id,
            description: description.into(),
            tags,
        }
    }

    pub fn is_root(&self) -> bool {
        self.parent_id.is_none()
    }
}

/// Structural errors that make a node collection unusable as a graph.
#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("nodes[{index}]: duplicate node id \"{id}\"")]
    DuplicateId { index: usize, id: NodeId },
    #[error("nodes[{index}]: empty node id")]
    EmptyId { index: usize },
    #[error("unknown node id \"{id}\"")]
    UnknownNode { id: NodeId },
    #[error("nodes unreachable from any root (parent cycle or dangling parent): {}",
            ids.iter().map(|n| n.as_str()).collect::<Vec<_>>().join(", "))]
    Unreachable { ids: Vec<NodeId> },
}

/// Immutable prerequisite forest with derived child, root, and depth indexes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptGraph {
    /// Nodes sorted by id.
    nodes: Vec<ConceptNode>,
    index: BTreeMap<NodeId, usize>,
    /// Children per node, sorted by id.
    children: BTreeMap<NodeId, Vec<NodeId>>,
    /// Root ids, sorted.
    roots: Vec<NodeId>,
}

impl ConceptGraph {
    /// Builds a graph from a node list.
    ///
    /// Rejects duplicate and empty ids outright; every other defect
    /// (dangling parents, cycles, inheritance violations) is left for
    /// [`validate_graph`] to report so that broken datasets can still be
    /// inspected.
    pub fn new(mut nodes: Vec<ConceptNode>) -> Result<Self, GraphError> {
        let mut seen: BTreeMap<NodeId, usize> = BTreeMap::new();
        for (index, node) in nodes.iter().enumerate() {
            if node.id.as_str().is_empty() {
                return Err(GraphError::EmptyId { index });
            }
            if seen.insert(node.id.clone(), index).is_some() {
                return Err(GraphError::DuplicateId {
                    index,
                    id: node.id.clone(),
                });
            }
        }
        nodes.sort_by(|a, b| a.id.cmp(&b.id));

        let mut index = BTreeMap::new();
        let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        let mut roots = Vec::new();
        for (i, node) in nodes.iter().enumerate() {
            index.insert(node.id.clone(), i);
        }
        for node in &nodes {
            match &node.parent_id {
                None => roots.push(node.id.clone()),
                Some(parent) => {
                    children
                        .entry(parent.clone())
                        .or_default()
                        .push(node.id.clone());
                }
            }
        }
        for list in children.values_mut() {
            list.sort();
        }

        Ok(ConceptGraph {
            nodes,
            index,
            children,
            roots,
        })
    }

    pub fn empty() -> Self {
        ConceptGraph::new(Vec::new()).expect("empty graph is always valid")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: &str) -> Option<&ConceptNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Nodes in lexicographic id order.
    pub fn nodes(&self) -> impl Iterator<Item = &ConceptNode> {
        self.nodes.iter()
    }

    /// Root ids in lexicographic order.
    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    /// Children of `id` in lexicographic order.
    pub fn children(&self, id: &str) -> &[NodeId] {
        self.children.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The resolved parent node, if the parent reference resolves.
    pub fn parent(&self, id: &str) -> Option<&ConceptNode> {
        self.node(id)
            .and_then(|n| n.parent_id.as_ref())
            .and_then(|p| self.node(p.as_str()))
    }

    /// Breadth-first depth of every node: roots are 0, each child is its
    /// parent's depth plus one.
    ///
    /// Fails when some node is unreachable from the roots, which happens
    /// exactly when the parent links contain a cycle or a dangling
    /// reference.
    pub fn bfs_depths(&self) -> Result<BTreeMap<NodeId, usize>, GraphError> {
        let mut depths = BTreeMap::new();
        let mut queue: VecDeque<(NodeId, usize)> =
            self.roots.iter().cloned().map(|r| (r, 0)).collect();
        while let Some((id, depth)) = queue.pop_front() {
            depths.insert(id.clone(), depth);
            for child in self.children(id.as_str()) {
                queue.push_back((child.clone(), depth + 1));
            }
        }
        if depths.len() != self.nodes.len() {
            let ids = self
                .nodes
                .iter()
                .filter(|n| !depths.contains_key(&n.id))
                .map(|n| n.id.clone())
                .collect();
            return Err(GraphError::Unreachable { ids });
        }
        Ok(depths)
    }

    /// Transitive closure of the children relation below `id`, excluding
    /// `id` itself.
    pub fn descendants(&self, id: &str) -> Result<BTreeSet<NodeId>, GraphError> {
        if !self.contains(id) {
            return Err(GraphError::UnknownNode {
                id: NodeId::from(id),
            });
        }
        let mut out = BTreeSet::new();
        let mut stack: Vec<NodeId> = self.children(id).to_vec();
        while let Some(next) = stack.pop() {
            if next.as_str() == id || !out.insert(next.clone()) {
                continue;
            }
            stack.extend(self.children(next.as_str()).iter().cloned());
        }
        Ok(out)
    }

    /// The root id of the tree containing `id` (the node itself for roots).
    ///
    /// Returns `None` when the parent chain does not terminate at a root.
    pub fn root_of(&self, id: &str) -> Option<&NodeId> {
        let mut current = self.node(id)?;
        let mut hops = 0;
        while let Some(parent_id) = &current.parent_id {
            current = self.node(parent_id.as_str())?;
            hops += 1;
            if hops > self.nodes.len() {
                return None; // parent cycle
            }
        }
        Some(&current.id)
    }

    /// Hex SHA-256 of the canonical serialized form.
    pub fn content_hash(&self) -> String {
        sha256_hex(io::serialize_graph(self).as_bytes())
    }
}

// ---------------------------------------------------------------------------
// MCQ tasks
// ---------------------------------------------------------------------------

/// A four-option multiple-choice question bound to a graph node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct McqTask {
    pub node_id: NodeId,
    pub question: String,
    /// Exactly four answer options.
    pub options: Vec<String>,
    /// Zero-based index of the correct option, in `0..=3`.
    pub correct_idx: u8,
}

impl McqTask {
    pub fn new(
        node_id: impl Into<NodeId>,
        question: impl Into<String>,
        options: [&str; 4],
        correct_idx: u8,
    ) -> Self {
        McqTask {
            node_id: node_id.into(),
            question: question.into(),
            options: options.iter().map(|s| s.to_string()).collect(),
            correct_idx,
        }
    }
}

/// The tasks of a dataset, keyed by node id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaskSet {
    tasks: BTreeMap<NodeId, McqTask>,
}

impl TaskSet {
    pub fn new() -> Self {
        TaskSet::default()
    }

    /// Builds a task set, rejecting duplicate node ids.
    pub fn from_tasks(tasks: Vec<McqTask>) -> Result<Self, GraphError> {
        let mut map = BTreeMap::new();
        for (index, task) in tasks.into_iter().enumerate() {
            if task.node_id.as_str().is_empty() {
                return Err(GraphError::EmptyId { index });
            }
            let id = task.node_id.clone();
            if map.insert(id.clone(), task).is_some() {
                return Err(GraphError::DuplicateId { index, id });
            }
        }
        Ok(TaskSet { tasks: map })
    }

    pub fn insert(&mut self, task: McqTask) -> Option<McqTask> {
        self.tasks.insert(task.node_id.clone(), task)
    }

    pub fn get(&self, node_id: &str) -> Option<&McqTask> {
        self.tasks.get(node_id)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Tasks in node-id order.
    pub fn iter(&self) -> impl Iterator<Item = &McqTask> {
        self.tasks.values()
    }
}
