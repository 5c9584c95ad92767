//! On-disk graph and task formats.
//!
//! Both files are UTF-8 JSON with LF line endings. The graph document is
//! `{"schema_version": 1, "nodes": [...]}` with nodes sorted by id on emit;
//! the task document is `{"schema_version": 1, "tasks": [...]}` sorted by
//! node id. `parse(serialize(x))` is structural identity.
//!
//! Multi-parent nodes cannot be expressed: each node carries a single
//! nullable `parent_id`, and documents that try to smuggle extra fields are
//! rejected.

use serde::{Deserialize, Serialize};

use crate::graph::{ConceptGraph, ConceptNode, McqTask, TaskSet};

pub const GRAPH_SCHEMA_VERSION: u32 = 1;
pub const TASK_SCHEMA_VERSION: u32 = 1;

/// Errors raised while reading a graph or task document.
#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema_version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("{0}")]
    Structure(#[from] super::GraphError),
    #[error("nodes[{index}] (\"{id}\"): parent_id \"{parent}\" does not exist")]
    DanglingParent {
        index: usize,
        id: String,
        parent: String,
    },
    #[error("tasks[{index}] (\"{id}\"): {message}")]
    InvalidTask {
        index: usize,
        id: String,
        message: String,
    },
}

fn json_error(err: serde_json::Error) -> ParseError {
    ParseError::Json {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Graph documents
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    schema_version: u32,
    nodes: Vec<ConceptNode>,
}

/// Parses a graph document. Duplicate ids, empty ids, and dangling parent
/// references are rejected here with positional context; softer invariants
/// are left to [`validate_graph`](super::validate_graph).
pub fn parse_graph(text: &str) -> Result<ConceptGraph, ParseError> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(json_error)?;
    if doc.schema_version != GRAPH_SCHEMA_VERSION {
        return Err(ParseError::SchemaVersion {
            found: doc.schema_version,
            expected: GRAPH_SCHEMA_VERSION,
        });
    }
    for (index, node) in doc.nodes.iter().enumerate() {
        if let Some(parent) = &node.parent_id {
            if !doc.nodes.iter().any(|n| &n.id == parent) {
                return Err(ParseError::DanglingParent {
                    index,
                    id: node.id.to_string(),
                    parent: parent.to_string(),
                });
            }
        }
    }
    Ok(ConceptGraph::new(doc.nodes)?)
}

/// Canonical serialization: pretty JSON, nodes sorted by id, trailing LF.
pub fn serialize_graph(graph: &ConceptGraph) -> String {
    let doc = GraphDoc {
        schema_version: GRAPH_SCHEMA_VERSION,
        nodes: graph.nodes().cloned().collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("graph serialization is infallible");
    out.push('\n');
    out
}

// ---------------------------------------------------------------------------
// Task documents
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskDoc {
    schema_version: u32,
    tasks: Vec<McqTask>,
}

/// Parses a task document. Task invariants (four non-empty options, answer
/// index in range) are enforced at this boundary.
pub fn parse_tasks(text: &str) -> Result<TaskSet, ParseError> {
    let doc: TaskDoc = serde_json::from_str(text).map_err(json_error)?;
    if doc.schema_version != TASK_SCHEMA_VERSION {
        return Err(ParseError::SchemaVersion {
            found: doc.schema_version,
            expected: TASK_SCHEMA_VERSION,
        });
    }
    for (index, task) in doc.tasks.iter().enumerate() {
        let violations = super::validate_task_fields(task);
        if let Some(first) = violations.first() {
            return Err(ParseError::InvalidTask {
                index,
                id: task.node_id.to_string(),
                message: first.message.clone(),
            });
        }
    }
    Ok(TaskSet::from_tasks(doc.tasks)?)
}

/// Canonical serialization: pretty JSON, tasks sorted by node id, trailing LF.
pub fn serialize_tasks(tasks: &TaskSet) -> String {
    let doc = TaskDoc {
        schema_version: TASK_SCHEMA_VERSION,
        tasks: tasks.iter().cloned().collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("task serialization is infallible");
    out.push('\n');
    out
}
