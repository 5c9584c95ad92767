//! Threshold sweeps over synthetic cascades.
//!
//! Runs the evaluation engine repeatedly with seeded synthetic backends to
//! estimate how the upgrade threshold trades success count against query
//! load per tier. Every run seed derives deterministically from the master
//! seed, the threshold, the repetition, and the slot, so a report can be
//! reproduced bit-for-bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::backend::{CapabilityProfile, ModelSpec, SyntheticOracle};
use crate::cascade::{
    evaluate_graph, CascadeConfig, EngineError, NodeStatus, TriggerComparator, UpgradePolicy,
};
use crate::graph::{ConceptGraph, TaskSet};
use crate::hash::derive_seed;

/// Aggregates for one threshold value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold: u32,
    pub repetitions: u32,
    pub mean_success: f64,
    pub mean_failed_all: f64,
    pub mean_skipped: f64,
    /// Mean number of queries issued to each cascade slot.
    pub mean_queries_per_model: Vec<f64>,
}

/// Repeated seeded evaluations per threshold; one profile per cascade slot.
#[allow(clippy::too_many_arguments)]
pub fn simulate_threshold_sweep(
    graph: &ConceptGraph,
    tasks: &TaskSet,
    profiles: &[CapabilityProfile],
    thresholds: &[u32],
    repetitions: u32,
    seed: u64,
    comparator: TriggerComparator,
    policy: UpgradePolicy,
) -> Result<Vec<SweepRow>, EngineError> {
    if profiles.is_empty() {
        return Err(EngineError::NoModels);
    }
    let repetitions = repetitions.max(1);
    let mut rows = Vec::with_capacity(thresholds.len());

    for &threshold in thresholds {
        let mut success_total = 0u64;
        let mut failed_all_total = 0u64;
        let mut skipped_total = 0u64;
        let mut query_totals = vec![0u64; profiles.len()];

        for rep in 0..repetitions {
            let mut specs = Vec::with_capacity(profiles.len());
            let mut seeded = BTreeMap::new();
            for (slot, profile) in profiles.iter().enumerate() {
                let name = format!("synthetic-{slot}");
                let mut profile = *profile;
                profile.rng_seed = derive_seed(
                    seed,
                    &[
                        profile.rng_seed,
                        u64::from(threshold),
                        u64::from(rep),
                        slot as u64,
                    ],
                );
                specs.push(ModelSpec::synthetic(&name));
                seeded.insert(name, profile);
            }
            let backend = SyntheticOracle::new(seeded)?;
            let cascade = CascadeConfig {
                models: specs,
                threshold,
                comparator,
                policy,
            };
            let run = evaluate_graph(graph, tasks, &cascade, &backend, seed)?;

            success_total += run.count(NodeStatus::Success) as u64;
            failed_all_total += run.count(NodeStatus::FailedAll) as u64;
            skipped_total += run.count(NodeStatus::Skipped) as u64;
            for outcome in run.outcomes.values() {
                for attempt in &outcome.attempts {
                    if let Some(idx) = run.config.model_index(&attempt.model_name) {
                        query_totals[idx] += 1;
                    }
                }
            }
        }

        let reps = f64::from(repetitions);
        rows.push(SweepRow {
            threshold,
            repetitions,
            mean_success: success_total as f64 / reps,
            mean_failed_all: failed_all_total as f64 / reps,
            mean_skipped: skipped_total as f64 / reps,
            mean_queries_per_model: query_totals.iter().map(|&q| q as f64 / reps).collect(),
        });
    }
    Ok(rows)
}

/// Canonical JSON for the sweep report file: an array of per-threshold rows.
pub fn sweep_to_json(rows: &[SweepRow]) -> String {
    let mut out = serde_json::to_string_pretty(rows).expect("sweep serialization");
    out.push('\n');
    out
}
