//! Tag-set algebra over run outcomes.
//!
//! Every node carries complexity tags, so a finished run projects onto tag
//! sets per model tier: tags passed, tags failed, tags past the complexity
//! horizon (failed even by the largest model), and tags of skipped
//! subtrees. A tag may legitimately sit in both the pass and fail set of
//! the same model — different nodes share tags — and the raw sets keep
//! that overlap.
//!
//! The monotonic capability closure makes the sets comparable across runs
//! by assuming any node a smaller model solved is solvable by every larger
//! one: pass sets become a running union (nested ascending), the failed-all
//! set is pinned to the largest model's fail set, and skipped absorbs
//! failed-all. The closure is idempotent.

mod report;
mod venn;

pub use report::{
    build_report, render_text_table, AnalysisReport, DeltaEntry, ANALYSIS_SCHEMA_VERSION,
};
pub use venn::{venn_regions, RegionSignature};

use serde::{Deserialize, Serialize};

use crate::cascade::{NodeStatus, RunResult};
use crate::graph::{ConceptGraph, TagSet};

/// Tag projections of one run, index-aligned with the cascade.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagOutcomeSets {
    pub pass_by_model: Vec<TagSet>,
    pub fail_by_model: Vec<TagSet>,
    pub failed_all: TagSet,
    pub skipped: TagSet,
    pub closure_applied: bool,
}

impl TagOutcomeSets {
    pub fn empty(model_count: usize) -> Self {
        TagOutcomeSets {
            pass_by_model: vec![TagSet::new(); model_count],
            fail_by_model: vec![TagSet::new(); model_count],
            failed_all: TagSet::new(),
            skipped: TagSet::new(),
            closure_applied: false,
        }
    }

    pub fn model_count(&self) -> usize {
        self.pass_by_model.len()
    }
}

/// Analysis failures.
#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("run is flagged incomplete; finish or re-run the evaluation first")]
    IncompleteRun,
    #[error("run graph hash {run_hash} does not match the provided graph ({graph_hash})")]
    GraphMismatch {
        run_hash: String,
        graph_hash: String,
    },
    #[error("outcome for unknown node \"{node_id}\"")]
    UnknownNode { node_id: String },
    #[error("attempt by model \"{model}\" not present in the run's cascade")]
    UnknownModel { model: String },
    #[error("outcome for node \"{node_id}\" is inconsistent: {message}")]
    InconsistentOutcome { node_id: String, message: String },
    #[error("delta requires larger > smaller, got larger={larger}, smaller={smaller}")]
    DeltaOrder { larger: usize, smaller: usize },
    #[error("model index {index} out of range for a {count}-model cascade")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("venn regions support 2 or 3 sets, got {count}")]
    UnsupportedSetCount { count: usize },
}

/// Projects a finished run onto raw tag outcome sets.
///
/// A tag enters `pass_by_model[i]` iff some node carrying it succeeded
/// with model `i` answering; `fail_by_model[i]` iff some node carrying it
/// has a recorded incorrect attempt by model `i` (so a retried-then-passed
/// node still registers the smaller model's failure); `failed_all` and
/// `skipped` collect the tags of nodes with those statuses.
pub fn collect_tag_sets(
    run: &RunResult,
    graph: &ConceptGraph,
) -> Result<TagOutcomeSets, AnalysisError> {
    if run.incomplete {
        return Err(AnalysisError::IncompleteRun);
    }
    let graph_hash = graph.content_hash();
    if run.graph_hash != graph_hash {
        return Err(AnalysisError::GraphMismatch {
            run_hash: run.graph_hash.clone(),
            graph_hash,
        });
    }

    let mut sets = TagOutcomeSets::empty(run.config.models.len());
    for outcome in run.outcomes.values() {
        let node =
            graph
                .node(outcome.node_id.as_str())
                .ok_or_else(|| AnalysisError::UnknownNode {
                    node_id: outcome.node_id.to_string(),
                })?;

        match outcome.status {
            NodeStatus::Success => {
                let idx = outcome.answering_model_idx.ok_or_else(|| {
                    AnalysisError::InconsistentOutcome {
                        node_id: outcome.node_id.to_string(),
                        message: "success without an answering model".to_string(),
                    }
                })?;
                let pass = sets.pass_by_model.get_mut(idx).ok_or_else(|| {
                    AnalysisError::InconsistentOutcome {
                        node_id: outcome.node_id.to_string(),
                        message: format!("answering model index {idx} out of range"),
                    }
                })?;
                pass.extend_from(&node.tags);
            }
            NodeStatus::FailedAll => sets.failed_all.extend_from(&node.tags),
            NodeStatus::Skipped => sets.skipped.extend_from(&node.tags),
            NodeStatus::Fail => {}
        }

        // Incorrect attempts: every attempt except the final one of a
        // successful node (retries only happen after a wrong answer).
        let attempt_count = outcome.attempts.len();
        for (i, attempt) in outcome.attempts.iter().enumerate() {
            let is_final_success = outcome.status == NodeStatus::Success && i + 1 == attempt_count;
            if is_final_success {
                continue;
            }
            let idx = run.config.model_index(&attempt.model_name).ok_or_else(|| {
                AnalysisError::UnknownModel {
                    model: attempt.model_name.clone(),
                }
            })?;
            sets.fail_by_model[idx].extend_from(&node.tags);
        }
    }
    Ok(sets)
}

/// Applies the monotonic capability closure. Idempotent; safe to call on
/// already-closed sets.
pub fn apply_monotonic_closure(sets: &TagOutcomeSets) -> TagOutcomeSets {
    let mut closed = sets.clone();

    // Success inheritance: each pass set absorbs every smaller tier's.
    let mut running = TagSet::new();
    for pass in &mut closed.pass_by_model {
        running.extend_from(pass);
        *pass = running.clone();
    }

    // Nested failure: a global failure is the largest model's failure.
    if let Some(last_fail) = closed.fail_by_model.last() {
        closed.failed_all = last_fail.clone();
    }

    // Overall complexity horizon: what failed everyone is out of reach,
    // so it joins the skipped set.
    closed.skipped = closed.skipped.union(&closed.failed_all);

    closed.closure_applied = true;
    closed
}

/// Tags gained by moving from tier `smaller` to tier `larger`:
/// `pass[larger] ∩ fail[smaller]`.
pub fn intelligence_delta(
    sets: &TagOutcomeSets,
    larger: usize,
    smaller: usize,
) -> Result<TagSet, AnalysisError> {
    if larger <= smaller {
        return Err(AnalysisError::DeltaOrder { larger, smaller });
    }
    let count = sets.model_count();
    if larger >= count {
        return Err(AnalysisError::IndexOutOfRange {
            index: larger,
            count,
        });
    }
    Ok(sets.pass_by_model[larger].intersection(&sets.fail_by_model[smaller]))
}
