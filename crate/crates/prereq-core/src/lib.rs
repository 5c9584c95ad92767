//! Prerequisite-graph MCQ datasets and cascade evaluation over language
//! model tiers.
//!
//! The crate covers the full loop:
//!
//! * [`graph`] — the concept forest data model with tag inheritance, its
//!   validators, and the on-disk JSON formats;
//! * [`generate`] — two-phase agentic dataset generation (blueprint the
//!   tree, then translate every node into a tool-call MCQ) with bounded
//!   repair loops;
//! * [`backend`] — scripted, synthetic, and live chat-completion answer
//!   providers behind one query interface;
//! * [`cascade`] — the depth-first evaluation engine driving a model
//!   cascade with path-failure upgrade triggers and subtree pruning, plus
//!   seeded threshold sweeps;
//! * [`analysis`] — tag-set projections, the monotonic capability closure,
//!   intelligence deltas, and Venn regions;
//! * [`viz`] — radial shell layouts exported as DOT and SVG, and Venn
//!   diagram SVGs.
//!
//! # Example
//!
//! A two-tier cascade over a two-node graph: the small tier solves the
//! root, fails the child, and the retry trigger hands the child to the
//! larger tier. The intelligence delta then names what the upgrade bought.
//!
//! ```
//! use prereq_core::*;
//!
//! let graph = ConceptGraph::new(vec![
//!     ConceptNode::new("n0", None, "base concept", ["Basics"].into_iter().collect()),
//!     ConceptNode::new(
//!         "n1",
//!         Some("n0".into()),
//!         "deeper concept",
//!         ["Basics", "Stability"].into_iter().collect(),
//!     ),
//! ])?;
//! let tasks = TaskSet::from_tasks(vec![
//!     McqTask::new("n0", "pick one", ["a", "b", "c", "d"], 1),
//!     McqTask::new("n1", "pick one", ["a", "b", "c", "d"], 2),
//! ])?;
//!
//! let mut oracle = ScriptedOracle::new();
//! oracle.set("small", "n0", 1);
//! oracle.set("small", "n1", 0); // wrong
//! oracle.set("large", "n1", 2);
//!
//! let cascade = CascadeConfig {
//!     models: vec![ModelSpec::scripted("small"), ModelSpec::scripted("large")],
//!     threshold: 1,
//!     comparator: TriggerComparator::GreaterOrEqual,
//!     policy: UpgradePolicy::RetrySameNode,
//! };
//! let run = evaluate_graph(&graph, &tasks, &cascade, &oracle, 0)?;
//! assert_eq!(run.outcomes["n1"].answering_model_idx, Some(1));
//!
//! let sets = collect_tag_sets(&run, &graph)?;
//! let delta = intelligence_delta(&sets, 1, 0)?;
//! assert!(delta.contains("Stability"));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod analysis;
pub mod backend;
pub mod cascade;
pub mod generate;
pub mod graph;
pub mod hash;
pub mod viz;

pub use analysis::{
    apply_monotonic_closure, build_report, collect_tag_sets, intelligence_delta, render_text_table,
    venn_regions, AnalysisError, AnalysisReport, TagOutcomeSets,
};
pub use backend::{
    parse_answer, synthetic_answer, BackendError, CapabilityProfile, ChatProvider, Dispatcher,
    HttpChatModel, ModelKind, ModelSpec, QueryBackend, QueryContext, QueryRecord, ScriptedChat,
    ScriptedOracle, SyntheticOracle,
};
pub use cascade::{
    evaluate_graph, simulate_threshold_sweep, CascadeConfig, EngineError, NodeOutcome, NodeStatus,
    RunResult, SweepRow, TransitionEvent, TriggerComparator, UpgradePolicy,
};
pub use generate::{
    blueprint_graph, generate_dataset, translate_graph, translate_node, GenerationConfig,
    GenerationError, GenerationExchange, GenerationOutcome,
};
pub use graph::{
    io::{parse_graph, parse_tasks, serialize_graph, serialize_tasks, ParseError},
    validate_graph, validate_graph_with, validate_tasks, ConceptGraph, ConceptNode, GraphError,
    McqTask, NodeId, Severity, TagSet, TaskSet, ValidationConfig, ValidationReport, Violation,
    ViolationKind,
};
pub use viz::{
    radial_layout, radial_layout_with, render_dot, render_svg, render_venn_svg, ColorClass,
    LayoutOptions, RadialLayout, VizError,
};
