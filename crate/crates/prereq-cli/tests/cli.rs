//! Subcommand behavior: exit codes, diagnostics, artifact layout.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn prereq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prereq"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("spawn prereq")
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn temp_out(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("prereq-cli-{label}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn validate_clean_fixture_exits_zero() {
    let output = prereq(&["validate", "--graph", "fixtures/five-node-graph.json"]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("0 error(s)"));
}

#[test]
fn validate_inheritance_violation_exits_one_and_prints_it() {
    let output = prereq(&["validate", "--graph", "fixtures/invalid-graph.json"]);
    assert_eq!(exit_code(&output), 1);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("inheritance_subset"), "stderr: {stderr}");
    assert!(stderr.contains("n1"));
}

#[test]
fn validate_strict_promotes_cardinality_warnings() {
    let relaxed = prereq(&["validate", "--graph", "fixtures/walkthrough-graph.json"]);
    assert_eq!(exit_code(&relaxed), 0);
    let strict = prereq(&[
        "validate",
        "--graph",
        "fixtures/walkthrough-graph.json",
        "--strict",
    ]);
    assert_eq!(exit_code(&strict), 1);
}

#[test]
fn usage_errors_exit_sixty_four() {
    let unknown_flag = prereq(&["validate", "--graph", "x.json", "--bogus"]);
    assert_eq!(exit_code(&unknown_flag), 64);

    let missing_arg = prereq(&["evaluate", "--graph", "x.json"]);
    assert_eq!(exit_code(&missing_arg), 64);

    let no_subcommand = prereq(&[]);
    assert_eq!(exit_code(&no_subcommand), 64);
}

#[test]
fn help_exits_zero() {
    let output = prereq(&["--help"]);
    assert_eq!(exit_code(&output), 0);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("evaluate"));
    assert!(stdout.contains("render"));
}

#[test]
fn missing_input_file_is_a_data_error() {
    let output = prereq(&["validate", "--graph", "fixtures/does-not-exist.json"]);
    assert_eq!(exit_code(&output), 1);
    assert!(String::from_utf8_lossy(&output.stderr).contains("cannot read"));
}

#[test]
fn evaluate_writes_run_file_under_run_id_dir() {
    let out = temp_out("evaluate");
    let output = prereq(&[
        "evaluate",
        "--graph",
        "fixtures/walkthrough-graph.json",
        "--tasks",
        "fixtures/walkthrough-tasks.json",
        "--config",
        "fixtures/walkthrough-config.json",
        "--oracle",
        "fixtures/walkthrough-oracle.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let run_dirs: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(run_dirs.len(), 1);
    assert!(run_dirs[0]
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .starts_with("run-"));
    assert!(run_dirs[0].join("run.json").exists());
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn analyze_rejects_mismatched_graph() {
    let out = temp_out("mismatch");
    let evaluated = prereq(&[
        "evaluate",
        "--graph",
        "fixtures/horizon-graph.json",
        "--tasks",
        "fixtures/horizon-tasks.json",
        "--config",
        "fixtures/horizon-config.json",
        "--oracle",
        "fixtures/horizon-oracle.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&evaluated), 0, "{evaluated:?}");
    let run_dir = std::fs::read_dir(&out)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let run_file = run_dir.join("run.json");

    let output = prereq(&[
        "analyze",
        "--run",
        run_file.to_str().unwrap(),
        "--graph",
        "fixtures/walkthrough-graph.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 1);
    assert!(String::from_utf8_lossy(&output.stderr).contains("different graph"));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn render_retried_as_red_marks_four_nodes() {
    // The horizon run has one retried success, one failed-all, and two
    // skips: exactly four red-class nodes with the toggle, three without.
    let out = temp_out("render");
    let evaluated = prereq(&[
        "evaluate",
        "--graph",
        "fixtures/horizon-graph.json",
        "--tasks",
        "fixtures/horizon-tasks.json",
        "--config",
        "fixtures/horizon-config.json",
        "--oracle",
        "fixtures/horizon-oracle.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&evaluated), 0);
    let run_dir = std::fs::read_dir(&out)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let run_file = run_dir.join("run.json");

    let red_count = |svg: &str| -> usize {
        ["\"retried\"", "\"fail\"", "\"failed-all\"", "\"skipped\""]
            .iter()
            .map(|class| svg.matches(&format!("class={class}")).count())
            .sum()
    };

    let toggled = prereq(&[
        "render",
        "--run",
        run_file.to_str().unwrap(),
        "--graph",
        "fixtures/horizon-graph.json",
        "--radial",
        "--retried-as-red",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&toggled), 0, "{toggled:?}");
    let svg = std::fs::read_to_string(run_dir.join("radial.svg")).unwrap();
    assert_eq!(red_count(&svg), 4, "with toggle");

    let plain = prereq(&[
        "render",
        "--run",
        run_file.to_str().unwrap(),
        "--graph",
        "fixtures/horizon-graph.json",
        "--radial",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&plain), 0);
    let svg = std::fs::read_to_string(run_dir.join("radial.svg")).unwrap();
    assert_eq!(red_count(&svg), 3, "without toggle");
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn simulate_writes_sweep_report() {
    let out = temp_out("simulate");
    let output = prereq(&[
        "simulate",
        "--graph",
        "fixtures/horizon-graph.json",
        "--tasks",
        "fixtures/horizon-tasks.json",
        "--profiles",
        "fixtures/profiles.json",
        "--thresholds",
        "0,1",
        "--reps",
        "10",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let sweep_dir = std::fs::read_dir(&out)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(sweep_dir.join("sweep.json")).unwrap())
            .unwrap();
    let rows = report.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["threshold"], 0);
    assert_eq!(
        rows[0]["mean_queries_per_model"].as_array().unwrap().len(),
        3
    );
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn generate_with_scripted_replies_emits_dataset() {
    let out = temp_out("generate");
    let output = prereq(&[
        "generate",
        "--config",
        "fixtures/generate-config.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 0, "{output:?}");
    let gen_dir = std::fs::read_dir(&out)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    assert!(gen_dir
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .starts_with("gen-"));

    let graph_text = std::fs::read_to_string(gen_dir.join("graph.json")).unwrap();
    let graph = prereq_core::parse_graph(&graph_text).unwrap();
    assert_eq!(graph.len(), 3);
    assert!(prereq_core::validate_graph(&graph).is_clean());

    let tasks_text = std::fs::read_to_string(gen_dir.join("tasks.json")).unwrap();
    let tasks = prereq_core::parse_tasks(&tasks_text).unwrap();
    assert_eq!(tasks.len(), 3);

    let transcript = std::fs::read_to_string(gen_dir.join("transcript.jsonl")).unwrap();
    assert_eq!(transcript.lines().count(), 4); // 1 blueprint + 3 translations

    // The generated pair is immediately evaluable.
    let eval_out = temp_out("generate-eval");
    let mut oracle = prereq_core::ScriptedOracle::new();
    for task in tasks.iter() {
        oracle.set("blueprint-bot", task.node_id.as_str(), task.correct_idx);
    }
    let oracle_path = out.join("oracle.json");
    std::fs::write(&oracle_path, oracle.to_json()).unwrap();
    let evaluated = prereq(&[
        "evaluate",
        "--graph",
        gen_dir.join("graph.json").to_str().unwrap(),
        "--tasks",
        gen_dir.join("tasks.json").to_str().unwrap(),
        "--config",
        "fixtures/generate-config.json",
        "--oracle",
        oracle_path.to_str().unwrap(),
        "--out",
        eval_out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&evaluated), 0, "{evaluated:?}");
    assert!(String::from_utf8_lossy(&evaluated.stdout).contains("3 success"));

    let _ = std::fs::remove_dir_all(&out);
    let _ = std::fs::remove_dir_all(&eval_out);
}

#[test]
fn walkthrough_analysis_reports_horizon_tags_and_six_tag_region() {
    let out = temp_out("walkthrough-analyze");
    let evaluated = prereq(&[
        "evaluate",
        "--graph",
        "fixtures/walkthrough-graph.json",
        "--tasks",
        "fixtures/walkthrough-tasks.json",
        "--config",
        "fixtures/walkthrough-config.json",
        "--oracle",
        "fixtures/walkthrough-oracle.json",
        "--policy",
        "advance",
        "--comparator",
        "gte",
        "--threshold",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&evaluated), 0, "{evaluated:?}");
    let run_dir = std::fs::read_dir(&out)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let run_file = run_dir.join("run.json");

    let analyzed = prereq(&[
        "analyze",
        "--run",
        run_file.to_str().unwrap(),
        "--graph",
        "fixtures/walkthrough-graph.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&analyzed), 0, "{analyzed:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("analysis.json")).unwrap())
            .unwrap();
    assert_eq!(
        report["raw"]["failed_all"],
        serde_json::json!(["Negative Feedback Systems", "Noise Reduction Techniques"])
    );

    // Monotonic variant lands in its own file.
    let monotonic = prereq(&[
        "analyze",
        "--run",
        run_file.to_str().unwrap(),
        "--graph",
        "fixtures/walkthrough-graph.json",
        "--monotonic",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&monotonic), 0);
    assert!(run_dir.join("analysis-monotonic.json").exists());

    // The pre-closure Venn diagram shows the six-tag mid-exclusive region.
    let rendered = prereq(&[
        "render",
        "--run",
        run_file.to_str().unwrap(),
        "--graph",
        "fixtures/walkthrough-graph.json",
        "--venn",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&rendered), 0, "{rendered:?}");
    let venn = std::fs::read_to_string(run_dir.join("venn.svg")).unwrap();
    assert!(
        venn.contains("B (6):"),
        "six-tag region missing from venn legend"
    );
    assert!(venn.contains("Advanced Modulation Techniques"));

    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn transport_failure_exits_two_and_persists_partial_run() {
    let out = temp_out("transport");
    std::fs::create_dir_all(&out).unwrap();
    // An http backend pointing at a port nobody listens on.
    let config = serde_json::json!({
        "schema_version": 1,
        "output_dir": "out",
        "backends": [{
            "name": "dead-endpoint",
            "kind": "http_chat",
            "endpoint": "http://127.0.0.1:9",
            "params": {"max_retries": "0", "timeout_secs": "1"}
        }],
        "cascade": {"models": ["dead-endpoint"], "threshold": 0}
    });
    let config_path = out.join("config.json");
    std::fs::write(&config_path, config.to_string()).unwrap();

    let output = prereq(&[
        "evaluate",
        "--graph",
        "fixtures/horizon-graph.json",
        "--tasks",
        "fixtures/horizon-tasks.json",
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&output), 2, "{output:?}");
    assert!(String::from_utf8_lossy(&output.stderr).contains("aborted"));

    let run_dir = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_str().unwrap().starts_with("run-"))
        .expect("partial run dir");
    let run: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["incomplete"], serde_json::json!(true));
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn input_files_are_never_mutated() {
    let before = std::fs::read(workspace_root().join("fixtures/walkthrough-graph.json")).unwrap();
    let out = temp_out("immutability");
    let _ = prereq(&[
        "evaluate",
        "--graph",
        "fixtures/walkthrough-graph.json",
        "--tasks",
        "fixtures/walkthrough-tasks.json",
        "--config",
        "fixtures/walkthrough-config.json",
        "--oracle",
        "fixtures/walkthrough-oracle.json",
        "--out",
        out.to_str().unwrap(),
    ]);
    let after = std::fs::read(workspace_root().join("fixtures/walkthrough-graph.json")).unwrap();
    assert_eq!(before, after);
    let _ = std::fs::remove_dir_all(&out);
}
