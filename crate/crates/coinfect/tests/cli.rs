//! End-to-end checks of the command-line surface: artifact layout,
//! deterministic output, document round-trip, and error records.

use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_coinfect");

const DEMO_PARAMS: &str = r#"
r = 1.0
K = 2.0
alpha1 = 2.0
alpha2 = 1.0
alpha3 = 0.5
mu1 = 1.0
mu2 = 1.0
mu3 = 1.0
eta1 = 3.0
eta2 = 1.2
gamma1 = 0.2
gamma2 = 0.1
"#;

const SCALED_PARAMS: &str = r#"
mode = "scaled"
r = 1.0
a1 = 2.0
a2 = 1.0
a3 = 0.5
mu1 = 1.0
mu2 = 1.0
mu3 = 1.0
eta1 = 0.4
eta2 = 1.2
gamma1 = 0.2
gamma2 = 0.1
"#;

fn write_params(dir: &Path, contents: &str) -> std::path::PathBuf {
    let path = dir.join("params.toml");
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> std::process::Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

#[test]
fn analyze_emits_equilibria_and_verdict_tables() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), DEMO_PARAMS);
    let out = run(
        &[
            "analyze",
            "--params",
            params.to_str().unwrap(),
            "--K",
            "0.3",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let eq = std::fs::read_to_string(dir.path().join("equilibria.csv")).unwrap();
    assert!(eq.starts_with("label,S,I1,I2,I12,admissible,residual\n"));
    let verdicts = std::fs::read_to_string(dir.path().join("verdicts.csv")).unwrap();
    assert!(verdicts.starts_with("label,K,max_real_part,classification,closed_form,agreement\n"));
    // Below sigma_1 the disease-free state is the single stable row.
    let stable_rows: Vec<&str> = verdicts
        .lines()
        .filter(|l| l.split(',').nth(3) == Some("Stable"))
        .collect();
    assert_eq!(stable_rows.len(), 1);
    assert!(stable_rows[0].starts_with("G2,"));
}

#[test]
fn analyze_doc_format_parses() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), DEMO_PARAMS);
    let out = run(
        &[
            "analyze",
            "--params",
            params.to_str().unwrap(),
            "--K",
            "2.0",
            "--format",
            "doc",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("analysis.json")).unwrap())
            .unwrap();
    assert_eq!(doc["K"], 2.0);
    let stable: Vec<&serde_json::Value> = doc["candidates"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["classification"] == "Stable")
        .collect();
    assert_eq!(stable.len(), 1);
    assert_eq!(stable[0]["label"], "G6");
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), DEMO_PARAMS);
    let mut tables = Vec::new();
    for (threads, sub) in [("1", "a"), ("4", "b")] {
        let out_dir = dir.path().join(sub);
        let out = run(
            &[
                "sweep",
                "--params",
                params.to_str().unwrap(),
                "--K-range",
                "0.1:10",
                "--grid",
                "200",
                "--out",
                out_dir.to_str().unwrap(),
            ],
            &[("COINFECT_THREADS", threads)],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        tables.push(std::fs::read(out_dir.join("sweep.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1], "sweep output depends on worker count");

    let text = String::from_utf8(tables.pop().unwrap()).unwrap();
    assert_eq!(text.lines().count(), 201);
    // Piecewise-constant stable label with exactly three change points.
    let labels: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    let changes = labels.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(changes, 3, "labels: {labels:?}");
}

#[test]
fn diagram_document_roundtrips_and_ships_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), DEMO_PARAMS);
    let out = run(
        &[
            "diagram",
            "--params",
            params.to_str().unwrap(),
            "--K-range",
            "0.1:10",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let doc = std::fs::read_to_string(dir.path().join("diagram.json")).unwrap();
    let parsed: coinfect::branch::TransitionDiagram = serde_json::from_str(&doc).unwrap();
    let p = coinfect::params::parse_str(DEMO_PARAMS)
        .unwrap()
        .materialize(None)
        .unwrap();
    let recomputed = coinfect::branch::transition_diagram(&p, 10.0, 64).unwrap();
    assert_eq!(parsed, recomputed, "re-parsed document differs from in-memory diagram");

    let script = std::fs::read_to_string(dir.path().join("plot_diagram.py")).unwrap();
    assert!(script.contains("sweep.csv"));
    assert!(dir.path().join("sweep.csv").exists());
}

#[test]
fn scaled_sweep_keeps_one_label() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), SCALED_PARAMS);
    let out = run(
        &[
            "sweep",
            "--params",
            params.to_str().unwrap(),
            "--scaled",
            "--K-range",
            "0.01:100",
            "--grid",
            "60",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let labels: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert!(labels.iter().all(|&l| l == "G3"), "labels: {labels:?}");
}

#[test]
fn simulate_emits_trajectory_table() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), DEMO_PARAMS);
    let out = run(
        &[
            "simulate",
            "--params",
            params.to_str().unwrap(),
            "--K",
            "2.0",
            "--y0",
            "0.8,0.2,0.3,0.1,0.0",
            "--horizon",
            "200",
            "--stride",
            "10",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,S,I1,I2,I12,R,N"));
    let first: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[1], 0.8);
    // N is the sum of the five compartments.
    let n: f64 = first[1..6].iter().sum();
    assert!((first[6] - n).abs() < 1e-12);
    // The run converges toward G6 = (1, 1/6, 0, 1/3).
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((last[1] - 1.0).abs() < 1e-3, "terminal S = {}", last[1]);
}

#[test]
fn errors_produce_machine_readable_records() {
    let dir = tempfile::tempdir().unwrap();

    // Missing parameter file -> params module.
    let out = run(
        &["analyze", "--params", "/nonexistent/x.toml", "--K", "1"],
        &[],
    );
    assert!(!out.status.success());
    let record: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr is a JSON record");
    assert_eq!(record["module"], "params");

    // Degenerate rates -> params module.
    let bad = dir.path().join("bad.toml");
    std::fs::write(
        &bad,
        DEMO_PARAMS.replace("eta2 = 1.2", "eta2 = 1.5"),
    )
    .unwrap();
    let out = run(&["analyze", "--params", bad.to_str().unwrap(), "--K", "1"], &[]);
    assert!(!out.status.success());
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["module"], "params");
    assert!(record["error"].as_str().unwrap().contains("degenerate"));

    // --scaled against a direct-mode file -> cli module.
    let params = write_params(dir.path(), DEMO_PARAMS);
    let out = run(
        &[
            "sweep",
            "--params",
            params.to_str().unwrap(),
            "--scaled",
            "--K-range",
            "0.1:1",
        ],
        &[],
    );
    assert!(!out.status.success());
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["module"], "cli");

    // Bad worker-count environment variable -> cli module.
    let out = run(
        &[
            "sweep",
            "--params",
            params.to_str().unwrap(),
            "--K-range",
            "0.1:1",
        ],
        &[("COINFECT_THREADS", "zero")],
    );
    assert!(!out.status.success());
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["module"], "cli");
}

#[test]
fn stdout_mode_prints_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let params = write_params(dir.path(), DEMO_PARAMS);
    let out = run(
        &[
            "analyze",
            "--params",
            params.to_str().unwrap(),
            "--K",
            "0.8",
        ],
        &[],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# ==> equilibria.csv <=="));
    assert!(text.contains("# ==> verdicts.csv <=="));
    assert!(text.contains("G3"));
}
