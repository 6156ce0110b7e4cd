//! Command-line behavior: exit codes, error messages, report schema.

use std::process::Command;

fn sfn() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sfn"))
}

#[test]
fn build_rejects_divergent_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let out = sfn()
        .args(["build", "--mode", "centralized", "--n", "50", "--gamma", "0.8"])
        .arg("--out")
        .arg(dir.path().join("g.edges"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("gamma"), "stderr: {stderr}");
}

#[test]
fn build_requires_an_output_path() {
    let out = sfn()
        .args(["build", "--mode", "centralized", "--n", "50", "--gamma", "2.5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2)); // clap usage error
}

#[test]
fn cluster_names_max_degree_when_no_cores() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.edges");
    let status = sfn()
        .args(["build", "--mode", "centralized", "--n", "60", "--gamma", "2.5", "--seed", "3"])
        .arg("--out")
        .arg(&edges)
        .status()
        .unwrap();
    assert!(status.success());

    let out = sfn()
        .args(["cluster", "--mode", "centralized", "--threshold", "100000"])
        .arg("--input")
        .arg(&edges)
        .arg("--out")
        .arg(dir.path().join("c.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("maximum degree"), "stderr: {stderr}");
}

#[test]
fn reports_validate_against_the_shipped_schema() {
    let schema: serde_json::Value = serde_json::from_str(include_str!(
        "../../../schemas/run_report.schema.json"
    ))
    .unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.edges");
    assert!(sfn()
        .args(["build", "--mode", "distributed", "--n", "300", "--gamma", "2.5", "--seed", "4"])
        .arg("--out")
        .arg(&edges)
        .status()
        .unwrap()
        .success());
    assert!(sfn()
        .args(["cluster", "--mode", "distributed", "--threshold", "5", "--seed", "4"])
        .arg("--input")
        .arg(&edges)
        .arg("--out")
        .arg(dir.path().join("c.json"))
        .status()
        .unwrap()
        .success());

    for name in ["g.edges.report.json", "c.json.report.json"] {
        let raw = std::fs::read_to_string(dir.path().join(name)).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&raw).unwrap();
        let result = compiled.validate(&doc);
        if let Err(errors) = result {
            let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
            panic!("{name} violates the schema: {msgs:?}");
        }
    }
}

#[test]
fn cluster_report_partitions_the_node_count() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.edges");
    assert!(sfn()
        .args(["build", "--mode", "centralized", "--n", "500", "--gamma", "2.5", "--seed", "9"])
        .arg("--out")
        .arg(&edges)
        .status()
        .unwrap()
        .success());
    assert!(sfn()
        .args(["cluster", "--mode", "centralized", "--threshold", "10", "--seed", "2"])
        .arg("--input")
        .arg(&edges)
        .arg("--out")
        .arg(dir.path().join("c.json"))
        .status()
        .unwrap()
        .success());

    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("c.json.report.json")).unwrap(),
    )
    .unwrap();
    let sizes: u64 = report["cluster_sizes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .sum();
    let isolated = report["isolated"].as_u64().unwrap();
    let cores = report["n_cores"].as_u64().unwrap();
    assert_eq!(sizes + isolated + cores, 500);

    // variance equals the squared standard deviation
    let stats = &report["cluster_size_stats"];
    let std = stats["std"].as_f64().unwrap();
    let var = stats["variance"].as_f64().unwrap();
    assert!((var - std * std).abs() < 1e-9);
}

#[test]
fn stats_uses_the_header_gamma_and_reports_consistent_distance() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.edges");
    assert!(sfn()
        .args(["build", "--mode", "centralized", "--n", "400", "--gamma", "2.5", "--seed", "5"])
        .arg("--out")
        .arg(&edges)
        .status()
        .unwrap()
        .success());
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("g.edges.report.json")).unwrap(),
    )
    .unwrap();
    let built_distance = report["trace_distance"].as_f64().unwrap();

    // no --gamma flag: picked up from the edge-list header
    let out = sfn()
        .args(["stats"])
        .arg("--input")
        .arg(&edges)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let first = stdout.lines().next().unwrap();
    assert!(first.starts_with("# trace_distance="), "got {first}");
    let reported: f64 = first
        .split('=')
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((reported - built_distance).abs() < 1e-12);
    assert!(stdout.lines().nth(1).unwrap().starts_with("k,empirical,theoretical"));
}

#[test]
fn stats_json_format_carries_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.edges");
    assert!(sfn()
        .args(["build", "--mode", "centralized", "--n", "200", "--gamma", "2.5", "--seed", "6"])
        .arg("--out")
        .arg(&edges)
        .status()
        .unwrap()
        .success());
    let out = sfn()
        .args(["stats", "--format", "json"])
        .arg("--input")
        .arg(&edges)
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["trace_distance"].is_f64());
    assert!(doc["fidelity"].is_f64());
    assert!(!doc["per_degree"].as_array().unwrap().is_empty());
}

#[test]
fn stats_sweep_emits_one_row_per_budget() {
    let out = sfn()
        .args([
            "stats", "--sweep", "0.5:1.5:0.5", "--n", "200", "--gamma", "2.5", "--seed", "3",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<&str> = stdout.lines().collect();
    assert_eq!(rows[1], "multiple,iterations,trace_distance");
    assert_eq!(rows.len(), 2 + 3); // header comment + column row + 3 budgets
    assert!(rows[2].starts_with("0.5,100,"));
    assert!(rows[4].starts_with("1.5,300,"));
}
