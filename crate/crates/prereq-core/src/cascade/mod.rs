//! Strategic cascade evaluation over a prerequisite forest.
//!
//! The engine walks each tree depth-first (roots and children in
//! lexicographic id order) while driving an ordered cascade of models, most
//! compressed first. Each root-to-node path carries two pieces of state,
//! passed down by value so sibling branches stay independent:
//!
//! * the active model index, which never decreases along a path, and
//! * `path_fails`, the cumulative count of incorrect answers on the path.
//!
//! An incorrect answer increments `path_fails`; when the configured
//! comparator says the count has reached the threshold and a larger model
//! exists, the cascade upgrades. Under [`UpgradePolicy::RetrySameNode`] the
//! same node is asked again with the next model; under
//! [`UpgradePolicy::AdvanceAfterUpgrade`] the node stays failed and its
//! children inherit the larger model. When no upgrade is possible the node
//! is terminal — `FailedAll` if the last model answered, plain `Fail`
//! otherwise — and its entire subtree is pruned as `Skipped`: success on a
//! parent is a prerequisite for its descendants.

pub mod sweep;

pub use sweep::{simulate_threshold_sweep, SweepRow};

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, ModelSpec, QueryBackend, QueryContext, QueryRecord};
use crate::graph::{validate_graph, ConceptGraph, NodeId, TaskSet};
use crate::hash::short_id;

pub const RUN_SCHEMA_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// How `path_fails` is compared against the threshold.
///
/// `StrictGreater` is the default; `GreaterOrEqual` makes a threshold of 1
/// upgrade on the very first failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerComparator {
    #[default]
    StrictGreater,
    GreaterOrEqual,
}

impl TriggerComparator {
    pub fn fires(&self, path_fails: u32, threshold: u32) -> bool {
        match self {
            TriggerComparator::StrictGreater => path_fails > threshold,
            TriggerComparator::GreaterOrEqual => path_fails >= threshold,
        }
    }
}

/// What happens to the failed node when the cascade upgrades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpgradePolicy {
    /// Re-ask the same node with the next model.
    #[default]
    RetrySameNode,
    /// Leave the node failed; descendants inherit the next model.
    AdvanceAfterUpgrade,
}

/// Cascade parameters: ordered models (index 0 = most compressed),
/// threshold, comparator, and upgrade policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub models: Vec<ModelSpec>,
    pub threshold: u32,
    #[serde(default)]
    pub comparator: TriggerComparator,
    #[serde(default)]
    pub policy: UpgradePolicy,
}

impl CascadeConfig {
    pub fn new(models: Vec<ModelSpec>, threshold: u32) -> Self {
        CascadeConfig {
            models,
            threshold,
            comparator: TriggerComparator::default(),
            policy: UpgradePolicy::default(),
        }
    }

    pub fn model_index(&self, name: &str) -> Option<usize> {
        self.models.iter().position(|m| m.name == name)
    }

    fn check(&self) -> Result<(), EngineError> {
        if self.models.is_empty() {
            return Err(EngineError::NoModels);
        }
        let mut seen = std::collections::BTreeSet::new();
        for model in &self.models {
            model.check().map_err(EngineError::Backend)?;
            if !seen.insert(model.name.as_str()) {
                return Err(EngineError::DuplicateModelName {
                    name: model.name.clone(),
                });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Outcomes
// ---------------------------------------------------------------------------

/// Final status of one node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Success,
    Fail,
    /// The last model in the cascade answered and was wrong.
    FailedAll,
    /// Never attempted: an ancestor's terminal failure pruned this subtree.
    Skipped,
}

/// Everything recorded about one node in one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeOutcome {
    pub node_id: NodeId,
    pub status: NodeStatus,
    /// Index of the model that answered correctly; present iff `Success`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answering_model_idx: Option<usize>,
    pub attempts: Vec<QueryRecord>,
    /// Inherited `path_fails` when the node was entered (for skipped nodes,
    /// the count at the pruning ancestor).
    pub path_fails_at_entry: u32,
}

/// One cascade upgrade.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionEvent {
    pub node_id: NodeId,
    pub from_idx: usize,
    pub to_idx: usize,
    pub path_fails: u32,
}

/// Complete result of one evaluation run.
///
/// Timestamps are kept in memory only: serialized run files carry nothing
/// that varies between identical replays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: u32,
    pub config: CascadeConfig,
    pub graph_hash: String,
    pub seed: u64,
    pub outcomes: BTreeMap<NodeId, NodeOutcome>,
    pub transitions: Vec<TransitionEvent>,
    pub incomplete: bool,
    #[serde(skip)]
    pub started_unix: u64,
    #[serde(skip)]
    pub finished_unix: u64,
}

impl RunResult {
    /// Content id for artifact directories: graph + config + seed.
    pub fn run_id(&self) -> String {
        let config = serde_json::to_string(&self.config).expect("config serialization");
        short_id(format!("{}|{}|{}", self.graph_hash, config, self.seed).as_bytes())
    }

    pub fn count(&self, status: NodeStatus) -> usize {
        self.outcomes
            .values()
            .filter(|o| o.status == status)
            .count()
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("run serialization");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Engine failures.
#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("cascade has no models")]
    NoModels,
    #[error("duplicate model name \"{name}\" in cascade")]
    DuplicateModelName { name: String },
    #[error("graph failed validation: {0}")]
    InvalidGraph(String),
    #[error("graph structure error: {0}")]
    Graph(#[from] crate::graph::GraphError),
    #[error("{} node(s) have no task: {}", missing.len(),
            missing.iter().take(5).map(|n| n.as_str()).collect::<Vec<_>>().join(", "))]
    MissingTasks { missing: Vec<NodeId> },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("run aborted by transport failure: {source}")]
    Aborted {
        /// Outcomes gathered before the abort, flagged incomplete.
        partial: Box<RunResult>,
        source: BackendError,
    },
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

/// Evaluates every node of the graph against the cascade.
///
/// Preconditions: the graph validates without errors, every node has a
/// task, and the cascade declares at least one uniquely named model. A
/// transport failure aborts the run and returns the partial result inside
/// [`EngineError::Aborted`].
pub fn evaluate_graph(
    graph: &ConceptGraph,
    tasks: &TaskSet,
    cascade: &CascadeConfig,
    backend: &dyn QueryBackend,
    seed: u64,
) -> Result<RunResult, EngineError> {
    cascade.check()?;
    let report = validate_graph(graph);
    if report.has_errors() {
        let summary = report
            .errors()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(EngineError::InvalidGraph(summary));
    }
    let missing: Vec<NodeId> = graph
        .nodes()
        .filter(|n| tasks.get(n.id.as_str()).is_none())
        .map(|n| n.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(EngineError::MissingTasks { missing });
    }

    let started_unix = unix_now();
    let mut engine = Engine {
        graph,
        tasks,
        cascade,
        backend,
        outcomes: BTreeMap::new(),
        transitions: Vec::new(),
    };

    let mut abort: Option<BackendError> = None;
    for root in graph.roots() {
        let root_tag_count = graph.node(root.as_str()).expect("root exists").tags.len();
        if let Err(err) = engine.eval_node(root, 0, 0, root_tag_count) {
            abort = Some(err);
            break;
        }
    }

    let incomplete = abort.is_some();
    let result = RunResult {
        schema_version: RUN_SCHEMA_VERSION,
        config: cascade.clone(),
        graph_hash: graph.content_hash(),
        seed,
        outcomes: engine.outcomes,
        transitions: engine.transitions,
        incomplete,
        started_unix,
        finished_unix: unix_now(),
    };
    match abort {
        Some(source) => Err(EngineError::Aborted {
            partial: Box::new(result),
            source,
        }),
        None => {
            debug_assert_eq!(result.outcomes.len(), graph.len());
            Ok(result)
        }
    }
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

struct Engine<'a> {
    graph: &'a ConceptGraph,
    tasks: &'a TaskSet,
    cascade: &'a CascadeConfig,
    backend: &'a dyn QueryBackend,
    outcomes: BTreeMap<NodeId, NodeOutcome>,
    transitions: Vec<TransitionEvent>,
}

impl Engine<'_> {
    fn eval_node(
        &mut self,
        node_id: &NodeId,
        model_idx: usize,
        path_fails: u32,
        root_tag_count: usize,
    ) -> Result<(), BackendError> {
        if self.outcomes.contains_key(node_id) {
            return Ok(());
        }
        let node = self.graph.node(node_id.as_str()).expect("node exists");
        let task = self.tasks.get(node_id.as_str()).expect("task exists");
        let last_idx = self.cascade.models.len() - 1;
        let entry_fails = path_fails;

        let mut idx = model_idx;
        let mut fails = path_fails;
        let mut attempts: Vec<QueryRecord> = Vec::new();
        loop {
            let ctx = QueryContext {
                attempt_no: attempts.len() as u32 + 1,
                extra_tag_count: node.tags.len().saturating_sub(root_tag_count),
            };
            let record = self
                .backend
                .query_mcq(&self.cascade.models[idx], task, &ctx)?;
            let correct = record.is_correct(task.correct_idx);
            attempts.push(record);

            if correct {
                self.outcomes.insert(
                    node_id.clone(),
                    NodeOutcome {
                        node_id: node_id.clone(),
                        status: NodeStatus::Success,
                        answering_model_idx: Some(idx),
                        attempts,
                        path_fails_at_entry: entry_fails,
                    },
                );
                for child in self.graph.children(node_id.as_str()).to_vec() {
                    self.eval_node(&child, idx, fails, root_tag_count)?;
                }
                return Ok(());
            }

            fails += 1;
            let can_upgrade =
                self.cascade.comparator.fires(fails, self.cascade.threshold) && idx < last_idx;
            if can_upgrade {
                self.transitions.push(TransitionEvent {
                    node_id: node_id.clone(),
                    from_idx: idx,
                    to_idx: idx + 1,
                    path_fails: fails,
                });
                match self.cascade.policy {
                    UpgradePolicy::RetrySameNode => {
                        idx += 1;
                        continue;
                    }
                    UpgradePolicy::AdvanceAfterUpgrade => {
                        self.outcomes.insert(
                            node_id.clone(),
                            NodeOutcome {
                                node_id: node_id.clone(),
                                status: NodeStatus::Fail,
                                answering_model_idx: None,
                                attempts,
                                path_fails_at_entry: entry_fails,
                            },
                        );
                        for child in self.graph.children(node_id.as_str()).to_vec() {
                            self.eval_node(&child, idx + 1, fails, root_tag_count)?;
                        }
                        return Ok(());
                    }
                }
            }

            // Terminal failure: no upgrade possible. Prune the subtree.
            let status = if idx == last_idx {
                NodeStatus::FailedAll
            } else {
                NodeStatus::Fail
            };
            self.outcomes.insert(
                node_id.clone(),
                NodeOutcome {
                    node_id: node_id.clone(),
                    status,
                    answering_model_idx: None,
                    attempts,
                    path_fails_at_entry: entry_fails,
                },
            );
            for skipped in self
                .graph
                .descendants(node_id.as_str())
                .expect("node exists")
            {
                self.outcomes.insert(
                    skipped.clone(),
                    NodeOutcome {
                        node_id: skipped.clone(),
                        status: NodeStatus::Skipped,
                        answering_model_idx: None,
                        attempts: Vec::new(),
                        path_fails_at_entry: fails,
                    },
                );
            }
            return Ok(());
        }
    }
}
