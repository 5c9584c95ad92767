//! Subcommand implementations.
//!
//! Artifacts are content-addressed: each run's files land in
//! `<out>/run-<id>/` where the id hashes the graph, cascade config, and
//! seed, so `analyze` and `render` outputs always cluster with the run
//! that produced them, and re-running an identical configuration
//! reproduces identical files in place.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use prereq_core::backend::http::HttpChatModel;
use prereq_core::backend::{ChatProvider, ScriptedChat};
use prereq_core::cascade::sweep::sweep_to_json;
use prereq_core::generate::transcript_to_jsonl;
use prereq_core::{
    build_report, evaluate_graph, generate_dataset, parse_tasks, radial_layout_with, render_dot,
    render_svg, render_text_table, render_venn_svg, simulate_threshold_sweep, validate_graph_with,
    validate_tasks, venn_regions, BackendError, CascadeConfig, ConceptGraph, Dispatcher,
    EngineError, GenerationError, LayoutOptions, ModelKind, RunResult, ScriptedOracle, Severity,
    SyntheticOracle, TagSet, TaskSet, ValidationConfig,
};

use crate::args::{Command, ComparatorArg, PolicyArg};
use crate::config::{load_scripted_replies, AppConfig, ProfilesFile};
use crate::{read_file, write_file, CliError};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate { config, out } => generate(&config, out),
        Command::Validate {
            graph,
            tasks,
            strict,
        } => validate(&graph, tasks.as_deref(), strict),
        Command::Evaluate {
            graph,
            tasks,
            config,
            oracle,
            threshold,
            comparator,
            policy,
            seed,
            out,
        } => evaluate(
            &graph,
            &tasks,
            &config,
            oracle.as_deref(),
            threshold,
            comparator,
            policy,
            seed,
            out,
        ),
        Command::Simulate {
            graph,
            tasks,
            profiles,
            thresholds,
            reps,
            seed,
            comparator,
            policy,
            out,
        } => simulate(
            &graph,
            &tasks,
            &profiles,
            &thresholds,
            reps,
            seed,
            comparator,
            policy,
            &out,
        ),
        Command::Analyze {
            run,
            graph,
            monotonic,
            out,
        } => analyze(&run, &graph, monotonic, &out),
        Command::Render {
            run,
            graph,
            radial,
            venn,
            retried_as_red,
            monotonic,
            out,
        } => render(&run, &graph, radial, venn, retried_as_red, monotonic, &out),
    }
}

fn load_graph(path: &Path) -> Result<ConceptGraph, CliError> {
    let text = read_file(path)?;
    prereq_core::parse_graph(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn load_tasks(path: &Path) -> Result<TaskSet, CliError> {
    let text = read_file(path)?;
    parse_tasks(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn load_run(path: &Path) -> Result<RunResult, CliError> {
    let text = read_file(path)?;
    RunResult::from_json(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn check_run_matches_graph(run: &RunResult, graph: &ConceptGraph) -> Result<(), CliError> {
    let graph_hash = graph.content_hash();
    if run.graph_hash != graph_hash {
        return Err(CliError::data(format!(
            "run was produced from a different graph (run hash {}, graph hash {graph_hash})",
            run.graph_hash
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn validate(graph_path: &Path, tasks_path: Option<&Path>, strict: bool) -> Result<(), CliError> {
    let graph = load_graph(graph_path)?;
    let config = ValidationConfig {
        cardinality_severity: if strict {
            Severity::Error
        } else {
            Severity::Warning
        },
    };
    let report = validate_graph_with(&graph, &config);
    for violation in &report.violations {
        eprintln!("{violation}");
    }
    let mut error_count = report.errors().count();
    let mut warning_count = report.warnings().count();

    if let Some(tasks_path) = tasks_path {
        let tasks = load_tasks(tasks_path)?;
        for violation in validate_tasks(&graph, &tasks) {
            let level = match violation.severity {
                Severity::Error => {
                    error_count += 1;
                    "error"
                }
                Severity::Warning => {
                    warning_count += 1;
                    "warning"
                }
            };
            eprintln!("{level}[task] {}: {}", violation.node_id, violation.message);
        }
    }

    println!(
        "{}: {} node(s), {error_count} error(s), {warning_count} warning(s)",
        graph_path.display(),
        graph.len()
    );
    if error_count > 0 {
        return Err(CliError::data("validation failed".to_string()));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn evaluate(
    graph_path: &Path,
    tasks_path: &Path,
    config_path: &Path,
    oracle_path: Option<&Path>,
    threshold: Option<u32>,
    comparator: Option<ComparatorArg>,
    policy: Option<PolicyArg>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let graph = load_graph(graph_path)?;
    let tasks = load_tasks(tasks_path)?;
    let app = AppConfig::load(config_path)?;

    let mut cascade = app.cascade.clone();
    if let Some(threshold) = threshold {
        cascade.threshold = threshold;
    }
    if let Some(comparator) = comparator {
        cascade.comparator = comparator.into();
    }
    if let Some(policy) = policy {
        cascade.policy = policy.into();
    }
    if oracle_path.is_some() {
        for model in &mut cascade.models {
            model.kind = ModelKind::Scripted;
        }
    }
    let seed = seed.unwrap_or(app.seed);
    let out_dir = out.unwrap_or(app.output_dir);

    let backend = build_dispatcher(&cascade, oracle_path)?;
    match evaluate_graph(&graph, &tasks, &cascade, &backend, seed) {
        Ok(run) => {
            let run_dir = out_dir.join(format!("run-{}", run.run_id()));
            write_file(&run_dir.join("run.json"), &run.to_json())?;
            println!(
                "run {}: {} success, {} fail, {} failed_all, {} skipped, {} transition(s)",
                run.run_id(),
                run.count(prereq_core::NodeStatus::Success),
                run.count(prereq_core::NodeStatus::Fail),
                run.count(prereq_core::NodeStatus::FailedAll),
                run.count(prereq_core::NodeStatus::Skipped),
                run.transitions.len(),
            );
            Ok(())
        }
        Err(EngineError::Aborted { partial, source }) => {
            let run_dir = out_dir.join(format!("run-{}", partial.run_id()));
            write_file(&run_dir.join("run.json"), &partial.to_json())?;
            Err(CliError::transport(format!(
                "run aborted, partial outcomes persisted as incomplete: {source}"
            )))
        }
        Err(err) => Err(engine_error(err)),
    }
}

fn build_dispatcher(
    cascade: &CascadeConfig,
    oracle_path: Option<&Path>,
) -> Result<Dispatcher, CliError> {
    let mut dispatcher = Dispatcher::new();
    if let Some(path) = oracle_path {
        let text = read_file(path)?;
        let oracle = ScriptedOracle::from_json(&text)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        dispatcher = dispatcher.with_scripted(oracle);
    }
    if cascade
        .models
        .iter()
        .any(|m| m.kind == ModelKind::Synthetic)
    {
        let mut profiles = BTreeMap::new();
        for model in &cascade.models {
            if model.kind != ModelKind::Synthetic {
                continue;
            }
            let parse = |key: &str, default: f64| -> Result<f64, CliError> {
                match model.params.get(key) {
                    None => Ok(default),
                    Some(raw) => raw.parse().map_err(|_| {
                        CliError::data(format!(
                            "backend \"{}\": param {key} is not a number",
                            model.name
                        ))
                    }),
                }
            };
            let profile = prereq_core::CapabilityProfile::new(
                parse("base_success_prob", 1.0)?,
                parse("per_extra_tag_decay", 1.0)?,
                model
                    .params
                    .get("rng_seed")
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(0),
            );
            profiles.insert(model.name.clone(), profile);
        }
        let oracle = SyntheticOracle::new(profiles).map_err(backend_error)?;
        dispatcher = dispatcher.with_synthetic(oracle);
    }
    if cascade.models.iter().any(|m| m.kind == ModelKind::HttpChat) {
        dispatcher = dispatcher.with_http(HttpChatModel::new());
    }
    Ok(dispatcher)
}

fn backend_error(err: BackendError) -> CliError {
    match err {
        BackendError::Transport { .. } => CliError::transport(err.to_string()),
        other => CliError::data(other.to_string()),
    }
}

fn engine_error(err: EngineError) -> CliError {
    match err {
        EngineError::Backend(inner) => backend_error(inner),
        EngineError::Aborted { source, .. } => CliError::transport(source.to_string()),
        other => CliError::data(other.to_string()),
    }
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn simulate(
    graph_path: &Path,
    tasks_path: &Path,
    profiles_path: &Path,
    thresholds: &str,
    reps: u32,
    seed: u64,
    comparator: ComparatorArg,
    policy: PolicyArg,
    out: &Path,
) -> Result<(), CliError> {
    let graph = load_graph(graph_path)?;
    let tasks = load_tasks(tasks_path)?;
    let profiles = ProfilesFile::load(profiles_path)?;
    let thresholds = thresholds
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u32>()
                .map_err(|_| CliError::usage(format!("invalid threshold \"{part}\"")))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows = simulate_threshold_sweep(
        &graph,
        &tasks,
        &profiles,
        &thresholds,
        reps,
        seed,
        comparator.into(),
        policy.into(),
    )
    .map_err(engine_error)?;

    let id = prereq_core::hash::short_id(
        format!(
            "{}|{}|{:?}|{}|{}",
            graph.content_hash(),
            read_file(profiles_path)?,
            thresholds,
            reps,
            seed
        )
        .as_bytes(),
    );
    write_file(
        &out.join(format!("sweep-{id}")).join("sweep.json"),
        &sweep_to_json(&rows),
    )?;

    println!("threshold  mean_success  mean_queries_per_model");
    for row in &rows {
        println!(
            "{:<9}  {:<12.2}  {}",
            row.threshold,
            row.mean_success,
            row.mean_queries_per_model
                .iter()
                .map(|q| format!("{q:.2}"))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze / render
// ---------------------------------------------------------------------------

fn analyze(
    run_path: &Path,
    graph_path: &Path,
    monotonic: bool,
    out: &Path,
) -> Result<(), CliError> {
    let run = load_run(run_path)?;
    let graph = load_graph(graph_path)?;
    check_run_matches_graph(&run, &graph)?;
    let report =
        build_report(&run, &graph, monotonic).map_err(|e| CliError::data(e.to_string()))?;

    let file_name = if monotonic {
        "analysis-monotonic.json"
    } else {
        "analysis.json"
    };
    let run_dir = out.join(format!("run-{}", run.run_id()));
    write_file(&run_dir.join(file_name), &report.to_json())?;
    print!("{}", render_text_table(&report));
    Ok(())
}

fn render(
    run_path: &Path,
    graph_path: &Path,
    radial: bool,
    venn: bool,
    retried_as_red: bool,
    monotonic: bool,
    out: &Path,
) -> Result<(), CliError> {
    let run = load_run(run_path)?;
    let graph = load_graph(graph_path)?;
    check_run_matches_graph(&run, &graph)?;
    let run_dir = out.join(format!("run-{}", run.run_id()));
    let radial = radial || !venn; // default target

    if radial {
        let layout = radial_layout_with(&graph, &run, &LayoutOptions { retried_as_red })
            .map_err(|e| CliError::data(e.to_string()))?;
        write_file(&run_dir.join("radial.dot"), &render_dot(&layout, &graph))?;
        let svg = render_svg(&layout, &graph, &run).map_err(|e| CliError::data(e.to_string()))?;
        write_file(&run_dir.join("radial.svg"), &svg)?;
    }

    if venn {
        let report =
            build_report(&run, &graph, monotonic).map_err(|e| CliError::data(e.to_string()))?;
        let sets = report.selected();
        let count = sets.model_count();
        if !(2..=3).contains(&count) {
            return Err(CliError::data(format!(
                "venn rendering needs a 2- or 3-tier cascade, this run has {count}"
            )));
        }
        let regions =
            venn_regions(&sets.pass_by_model).map_err(|e| CliError::data(e.to_string()))?;
        let by_label: BTreeMap<String, TagSet> = regions
            .into_iter()
            .map(|(sig, set)| (sig.label(), set))
            .collect();
        let svg = render_venn_svg(&by_label, &report.model_names)
            .map_err(|e| CliError::data(e.to_string()))?;
        let file_name = if monotonic {
            "venn-monotonic.svg"
        } else {
            "venn.svg"
        };
        write_file(&run_dir.join(file_name), &svg)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

fn generate(config_path: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let app = AppConfig::load(config_path)?;
    let generation = app.generation.ok_or_else(|| {
        CliError::data(format!(
            "{}: config has no generation section",
            config_path.display()
        ))
    })?;
    let out_dir = out.unwrap_or(app.output_dir);

    let provider: Box<dyn ChatProvider> = match generation.generator_model.kind {
        ModelKind::HttpChat => {
            let mut http = HttpChatModel::new();
            http.default_endpoint = generation.generator_model.endpoint.clone();
            Box::new(http)
        }
        ModelKind::Scripted => {
            let path = generation
                .generator_model
                .params
                .get("responses_file")
                .ok_or_else(|| {
                    CliError::data("scripted generator needs a responses_file param".to_string())
                })?;
            Box::new(ScriptedChat::new(load_scripted_replies(Path::new(path))?))
        }
        ModelKind::Synthetic => {
            return Err(CliError::data(
                "synthetic backends cannot drive generation".to_string(),
            ))
        }
    };

    let outcome = generate_dataset(&generation, provider.as_ref()).map_err(|err| match err {
        GenerationError::Backend(inner) => backend_error(inner),
        other => CliError::data(other.to_string()),
    })?;

    let graph_text = prereq_core::serialize_graph(&outcome.graph);
    let tasks_text = prereq_core::serialize_tasks(&outcome.tasks);
    let id = prereq_core::hash::short_id(format!("{graph_text}|{tasks_text}").as_bytes());
    let gen_dir = out_dir.join(format!("gen-{id}"));
    write_file(&gen_dir.join("graph.json"), &graph_text)?;
    write_file(&gen_dir.join("tasks.json"), &tasks_text)?;
    write_file(
        &gen_dir.join("transcript.jsonl"),
        &transcript_to_jsonl(&outcome.transcript),
    )?;
    println!(
        "generated {} node(s), {} task(s), {} dropped",
        outcome.graph.len(),
        outcome.tasks.len(),
        outcome.dropped.len()
    );
    Ok(())
}
