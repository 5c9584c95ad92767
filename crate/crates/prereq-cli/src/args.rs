//! Command-line interface definition.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use prereq_core::{TriggerComparator, UpgradePolicy};

#[derive(Parser, Debug)]
#[command(
    name = "prereq",
    version,
    about = "Generate, validate, evaluate, and analyze prerequisite-graph MCQ datasets over a model cascade"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a graph/task dataset with a generator model (two phases:
    /// blueprint, then MCQ translation).
    Generate {
        /// App config JSON with a `generation` section.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a graph file (and optionally its task file).
    Validate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        tasks: Option<PathBuf>,
        /// Treat unique-tag cardinality drift as an error instead of a warning.
        #[arg(long)]
        strict: bool,
    },
    /// Run the cascade over a graph/task pair and persist the run file.
    Evaluate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        tasks: PathBuf,
        /// App config JSON declaring backends and the cascade.
        #[arg(long)]
        config: PathBuf,
        /// Scripted answer table; forces every cascade model to scripted.
        #[arg(long)]
        oracle: Option<PathBuf>,
        #[arg(long)]
        threshold: Option<u32>,
        #[arg(long)]
        comparator: Option<ComparatorArg>,
        #[arg(long)]
        policy: Option<PolicyArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep upgrade thresholds with seeded synthetic model profiles.
    Simulate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        tasks: PathBuf,
        /// JSON file: {"profiles": [{base_success_prob, per_extra_tag_decay, rng_seed}, ...]}.
        #[arg(long)]
        profiles: PathBuf,
        /// Comma-separated threshold list.
        #[arg(long, default_value = "0,1,2")]
        thresholds: String,
        #[arg(long, default_value_t = 100)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "gt")]
        comparator: ComparatorArg,
        #[arg(long, default_value = "retry")]
        policy: PolicyArg,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Project a finished run onto tag sets, deltas, and Venn regions.
    Analyze {
        /// Run file produced by `evaluate`.
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        /// Compute deltas and Venn regions on closure-applied sets.
        #[arg(long)]
        monotonic: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Render a finished run as radial DOT/SVG and a Venn diagram SVG.
    Render {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        /// Emit the radial shell diagram (default when no target is given).
        #[arg(long)]
        radial: bool,
        /// Emit the Venn diagram over pass sets (2- or 3-tier cascades).
        #[arg(long)]
        venn: bool,
        /// Paint retried-but-solved nodes in the red class.
        #[arg(long)]
        retried_as_red: bool,
        /// Venn regions from closure-applied sets.
        #[arg(long)]
        monotonic: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ComparatorArg {
    /// path_fails > threshold
    Gt,
    /// path_fails >= threshold
    Gte,
}

impl From<ComparatorArg> for TriggerComparator {
    fn from(arg: ComparatorArg) -> Self {
        match arg {
            ComparatorArg::Gt => TriggerComparator::StrictGreater,
            ComparatorArg::Gte => TriggerComparator::GreaterOrEqual,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum PolicyArg {
    /// Re-ask the failed node with the next model.
    Retry,
    /// Keep the node failed; children inherit the next model.
    Advance,
}

impl From<PolicyArg> for UpgradePolicy {
    fn from(arg: PolicyArg) -> Self {
        match arg {
            PolicyArg::Retry => UpgradePolicy::RetrySameNode,
            PolicyArg::Advance => UpgradePolicy::AdvanceAfterUpgrade,
        }
    }
}
