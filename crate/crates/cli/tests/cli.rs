use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn billboard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billboard"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = billboard(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn d1_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/d1")
}

/// Generates and prices a small dataset, returning its directory.
fn priced(dir: &Path) -> String {
    let raw = dir.join("raw");
    let out = dir.join("priced");
    ok(&[
        "gen", "--out", raw.to_str().unwrap(), "--seed", "4", "--billboards", "24",
        "--trajectories", "300", "--clusters", "3", "--width-km", "3", "--height-km", "3",
        "--spread-m", "300", "--step-m", "60", "--short-limit-m", "800", "--min-length-m", "100",
        "--max-length-m", "2500",
    ]);
    ok(&[
        "cost", "--dataset", raw.to_str().unwrap(), "--lambda", "80", "--prob-model",
        "panel-half", "--seed", "2", "--out", out.to_str().unwrap(),
    ]);
    out.to_str().unwrap().to_string()
}

#[test]
fn select_on_d1_matches_known_optimum() {
    let d1 = d1_dir();
    let out = ok(&[
        "select", "--dataset", d1.to_str().unwrap(), "--lambda", "100", "--prob-model",
        "panel:20", "--algo", "exact", "--budget", "5", "--no-timing",
    ]);
    let record: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(record["chosen_ids"], serde_json::json!([1, 6]));
    assert!((record["influence"].as_f64().unwrap() - 2.8).abs() < 1e-9);
    assert_eq!(record["wall_ms"].as_f64(), Some(0.0));
    for key in ["algorithm", "budget", "lambda", "theta", "cost", "enum_calls", "estimator_calls"] {
        assert!(record.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn ingest_writes_a_loadable_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    let d1 = d1_dir();
    ok(&[
        "ingest", "--billboards", d1.join("billboards.csv").to_str().unwrap(),
        "--trajectories", d1.join("trajectories.jsonl").to_str().unwrap(),
        "--out", manifest.to_str().unwrap(), "--ref-lat", "40.75", "--ref-lng", "-73.99",
    ]);
    let stats: Value = serde_json::from_str(&ok(&[
        "index", "--dataset", manifest.to_str().unwrap(), "--lambda", "100", "--prob-model",
        "panel:20",
    ]))
    .unwrap();
    assert_eq!(stats["billboards"], 6);
    assert_eq!(stats["trajectories"], 12);
}

#[test]
fn partition_file_feeds_the_dp_selectors() {
    let dir = tempfile::tempdir().unwrap();
    let data = priced(dir.path());
    let pfile = dir.path().join("p.json");
    let base = ["--dataset", &data, "--lambda", "80", "--prob-model", "panel-half"];
    let mut args = vec!["partition"];
    args.extend(base);
    args.extend(["--theta", "0.2", "--out", pfile.to_str().unwrap()]);
    ok(&args);
    let partition: Value = serde_json::from_str(&fs::read_to_string(&pfile).unwrap()).unwrap();
    assert_eq!(partition["version"], 1);

    let matrices = dir.path().join("m.json");
    let run = |algo: &str, dump: bool| {
        let mut args = vec!["select"];
        args.extend(base);
        args.extend(["--algo", algo, "--budget", "6000", "--partition", pfile.to_str().unwrap(), "--no-timing"]);
        if dump {
            args.extend(["--dump-matrices", matrices.to_str().unwrap()]);
        }
        let v: Value = serde_json::from_str(&ok(&args)).unwrap();
        v
    };
    let part = run("partsel", false);
    let lazy = run("lazyprobe", true);
    assert!(part["cost"].as_u64().unwrap() <= 6000);
    assert!(lazy["enum_calls"].as_u64() <= part["enum_calls"].as_u64());
    assert_eq!(lazy["theta"].as_f64(), Some(0.2));
    let dumped: Value = serde_json::from_str(&fs::read_to_string(&matrices).unwrap()).unwrap();
    assert!(dumped["theta"].is_array() && dumped["traceback"].is_array());
}

#[test]
fn repeated_runs_print_identical_records() {
    let dir = tempfile::tempdir().unwrap();
    let data = priced(dir.path());
    for algo in ["greedy", "enum", "topk", "anneal", "partsel", "lazyprobe"] {
        let args = [
            "select", "--dataset", &data, "--lambda", "80", "--prob-model", "panel-half",
            "--algo", algo, "--budget", "5000", "--theta", "0.1", "--seed", "3",
            "--restarts", "3", "--no-timing",
        ];
        assert_eq!(ok(&args), ok(&args), "{algo}");
    }
}

#[test]
fn bench_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = priced(dir.path());
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        serde_json::json!({
            "dataset": format!("{data}/manifest.json"),
            "budgets": [3000, 5000],
            "lambdas": [80.0],
            "models": ["panel-half"],
            "algorithms": ["greedy", "lazyprobe"],
            "timing": false
        })
        .to_string(),
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let json = ok(&["bench", "--spec", spec.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    let table: Value = serde_json::from_str(&json).unwrap();
    assert_eq!(table["schema_version"], 1);
    assert_eq!(table["rows"].as_array().unwrap().len(), 4);
    assert_eq!(fs::read_to_string(&csv).unwrap().lines().count(), 5);
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let d1 = d1_dir();
    let d1 = d1.to_str().unwrap();
    let cases: [&[&str]; 4] = [
        &["select", "--dataset", d1, "--lambda", "100", "--prob-model", "panel:20", "--algo", "magic", "--budget", "1"],
        &["select", "--dataset", d1, "--lambda", "100", "--prob-model", "panel:20", "--algo", "partsel", "--budget", "1"],
        &["index", "--dataset", "/definitely/missing", "--lambda", "100", "--prob-model", "panel-half"],
        &["partition", "--dataset", d1, "--lambda", "100", "--prob-model", "panel:20", "--theta", "1.5"],
    ];
    for args in cases {
        let out = billboard(args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}
