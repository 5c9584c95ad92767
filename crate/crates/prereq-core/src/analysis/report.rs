//! Analysis report assembly and terminal rendering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    apply_monotonic_closure, collect_tag_sets, intelligence_delta, venn_regions, AnalysisError,
    TagOutcomeSets,
};
use crate::cascade::RunResult;
use crate::graph::{ConceptGraph, TagSet};

pub const ANALYSIS_SCHEMA_VERSION: u32 = 1;

/// One intelligence delta: the tags gained upgrading between two tiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaEntry {
    pub larger_idx: usize,
    pub smaller_idx: usize,
    pub larger: String,
    pub smaller: String,
    pub tags: TagSet,
}

/// Full analysis artifact: raw and closed sets, deltas for every ordered
/// tier pair, and Venn regions over the pass sets when the cascade has two
/// or three tiers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub model_names: Vec<String>,
    /// Whether deltas and Venn regions were computed on closed sets.
    pub monotonic: bool,
    pub raw: TagOutcomeSets,
    pub closed: TagOutcomeSets,
    pub deltas: Vec<DeltaEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub venn: Option<BTreeMap<String, TagSet>>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serialization");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// The sets the deltas and Venn regions were computed from.
    pub fn selected(&self) -> &TagOutcomeSets {
        if self.monotonic {
            &self.closed
        } else {
            &self.raw
        }
    }
}

/// Collects, closes, and cross-sections the tag sets of a finished run.
/// With `monotonic` set, deltas and Venn regions use the closed sets.
pub fn build_report(
    run: &RunResult,
    graph: &ConceptGraph,
    monotonic: bool,
) -> Result<AnalysisReport, AnalysisError> {
    let raw = collect_tag_sets(run, graph)?;
    let closed = apply_monotonic_closure(&raw);
    let selected = if monotonic { &closed } else { &raw };

    let mut deltas = Vec::new();
    let count = selected.model_count();
    for larger in 1..count {
        for smaller in 0..larger {
            deltas.push(DeltaEntry {
                larger_idx: larger,
                smaller_idx: smaller,
                larger: run.config.models[larger].name.clone(),
                smaller: run.config.models[smaller].name.clone(),
                tags: intelligence_delta(selected, larger, smaller)?,
            });
        }
    }

    let venn = if (2..=3).contains(&count) {
        let regions = venn_regions(&selected.pass_by_model)?;
        Some(
            regions
                .into_iter()
                .map(|(sig, set)| (sig.label(), set))
                .collect(),
        )
    } else {
        None
    };

    Ok(AnalysisReport {
        schema_version: ANALYSIS_SCHEMA_VERSION,
        model_names: run.config.models.iter().map(|m| m.name.clone()).collect(),
        monotonic,
        raw,
        closed,
        deltas,
        venn,
    })
}

fn format_set(set: &TagSet) -> String {
    if set.is_empty() {
        "(none)".to_string()
    } else {
        set.iter().collect::<Vec<_>>().join(", ")
    }
}

/// Plain-text table for terminals.
pub fn render_text_table(report: &AnalysisReport) -> String {
    let mut out = String::new();
    let sets = report.selected();
    let heading = if report.monotonic {
        "tag sets (monotonic closure applied)"
    } else {
        "tag sets (raw)"
    };
    out.push_str(heading);
    out.push('\n');

    let name_width = report
        .model_names
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(5)
        .max("model".len());
    out.push_str(&format!("{:<name_width$}  {}\n", "model", "pass / fail"));
    for (i, name) in report.model_names.iter().enumerate() {
        out.push_str(&format!(
            "{:<name_width$}  pass: {}\n",
            name,
            format_set(&sets.pass_by_model[i])
        ));
        out.push_str(&format!(
            "{:<name_width$}  fail: {}\n",
            "",
            format_set(&sets.fail_by_model[i])
        ));
    }
    out.push_str(&format!("failed_all: {}\n", format_set(&sets.failed_all)));
    out.push_str(&format!("skipped:    {}\n", format_set(&sets.skipped)));

    if !report.deltas.is_empty() {
        out.push_str("\nintelligence deltas (pass[larger] ∩ fail[smaller])\n");
        for delta in &report.deltas {
            out.push_str(&format!(
                "{} over {}: {}\n",
                delta.larger,
                delta.smaller,
                format_set(&delta.tags)
            ));
        }
    }

    if let Some(venn) = &report.venn {
        out.push_str("\nvenn regions over pass sets (A = first model)\n");
        for (label, set) in venn {
            out.push_str(&format!(
                "{:<4} ({}): {}\n",
                label,
                set.len(),
                format_set(set)
            ));
        }
    }
    out
}
