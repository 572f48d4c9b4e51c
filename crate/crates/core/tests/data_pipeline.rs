use std::fs;
use std::path::Path;

use billboard_core::data::costs::{assign_costs, cost_from_influence, draw_betas};
use billboard_core::data::experiment::{run_experiment, ExperimentSpec, SCHEMA_VERSION};
use billboard_core::data::io::{
    ingest, load_instance, save_dataset, DatasetManifest, BILLBOARD_FILE, MANIFEST_FILE,
    TRAJECTORY_FILE,
};
use billboard_core::data::synthetic::{generate_synthetic, SyntheticConfig};
use billboard_core::model::{influence_naive, ProbabilityModel};
use billboard_core::Error;

fn small_config(seed: u64) -> SyntheticConfig {
    SyntheticConfig {
        width_km: 3.0,
        height_km: 3.0,
        billboards: 25,
        trajectories: 200,
        clusters: 3,
        cluster_spread_m: 300.0,
        step_m: 60.0,
        short_limit_m: 800.0,
        min_length_m: 100.0,
        max_length_m: 2500.0,
        seed,
        ..SyntheticConfig::default()
    }
}

fn read_all(dir: &Path) -> Vec<Vec<u8>> {
    [BILLBOARD_FILE, TRAJECTORY_FILE, MANIFEST_FILE]
        .iter()
        .map(|f| fs::read(dir.join(f)).unwrap())
        .collect()
}

#[test]
fn synthetic_generation_is_byte_reproducible() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    generate_synthetic(&small_config(3), a.path()).unwrap();
    generate_synthetic(&small_config(3), b.path()).unwrap();
    generate_synthetic(&small_config(4), c.path()).unwrap();
    assert_eq!(read_all(a.path()), read_all(b.path()));
    assert_ne!(read_all(a.path()), read_all(c.path()));
}

#[test]
fn ingest_load_save_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let written = generate_synthetic(&small_config(7), dir.path()).unwrap();

    let manifest = ingest(
        &dir.path().join(BILLBOARD_FILE),
        &dir.path().join(TRAJECTORY_FILE),
        Some((written.ref_lat, written.ref_lng)),
    )
    .unwrap();
    assert_eq!(manifest.checksum, written.checksum);
    let data = load_instance(&manifest).unwrap();
    assert_eq!(data.billboards.len(), 25);
    assert_eq!(data.trajectories.len(), 200);

    let out = tempfile::tempdir().unwrap();
    save_dataset(out.path(), &data, None).unwrap();
    let reread = load_instance(&DatasetManifest::read(&out.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(reread.billboard_source_ids, data.billboard_source_ids);
    assert_eq!(reread.trajectory_source_ids, data.trajectory_source_ids);
    for (x, y) in reread.billboards.iter().zip(&data.billboards) {
        assert!((x.location.x - y.location.x).abs() < 1e-6);
        assert!((x.location.y - y.location.y).abs() < 1e-6);
        assert_eq!((x.id, x.cost, x.panel_size), (y.id, y.cost, y.panel_size));
    }
}

#[test]
fn sparse_source_ids_become_dense() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.csv");
    let t = dir.path().join("t.jsonl");
    fs::write(&b, "id,lat,lng,panel_size\n907,40.75,-73.99,12\n15,40.751,-73.99,8\n").unwrap();
    fs::write(&t, "{\"id\": 42, \"points\": [[40.7501, -73.99]]}\n\n{\"id\": 7, \"points\": [[40.9, -73.5]]}\n").unwrap();
    let data = load_instance(&ingest(&b, &t, None).unwrap()).unwrap();
    assert_eq!(data.billboard_source_ids, vec![907, 15]);
    assert_eq!(data.trajectory_source_ids, vec![42, 7]);
    assert_eq!(data.dense_billboard_id(15), Some(1));
    assert_eq!(data.source_billboard_id(0), 907);
    assert!(!data.has_costs);
}

#[test]
fn malformed_inputs_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.csv");
    let t = dir.path().join("t.jsonl");
    fs::write(&b, "id,lat,lng,panel_size\n1,40.75,-73.99,12\n2,40.75,oops,8\n").unwrap();
    fs::write(&t, "{\"id\": 1, \"points\": [[40.75, -73.99]]}\n").unwrap();
    match ingest(&b, &t, None) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
    fs::write(&b, "id,lat,lng,panel_size\n1,40.75,-73.99,12\n").unwrap();
    fs::write(&t, "{\"id\": 1, \"points\": [[40.75, -73.99]]}\n{\"id\": 2, \"points\": []}\n").unwrap();
    match ingest(&b, &t, None) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn costs_follow_standalone_influence() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = generate_synthetic(&small_config(11), dir.path()).unwrap();
    let data = load_instance(&manifest).unwrap();
    let inst = data.instance(100.0, ProbabilityModel::PanelHalfMax, 0).unwrap();
    let priced = assign_costs(&inst, 5);
    let betas = draw_betas(inst.universe.len(), 5);
    for (b, beta) in priced.universe.iter().zip(&betas) {
        let standalone = influence_naive(&inst, &[b.id]).unwrap();
        assert_eq!(b.cost, cost_from_influence(standalone, *beta));
        assert_eq!(b.cost % 1000, 0);
        assert!(b.cost >= 1000);
    }
    assert_eq!(assign_costs(&inst, 5).universe, priced.universe);
}

#[test]
fn experiment_runs_end_to_end_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    generate_synthetic(&small_config(2), &dir.path().join("data")).unwrap();
    let spec_path = dir.path().join("spec.json");
    fs::write(
        &spec_path,
        r#"{
            "dataset": "data/manifest.json",
            "budgets": [3000, 6000],
            "lambdas": [80.0],
            "thetas": [0.2],
            "models": ["panel-half", "uniform:0.3"],
            "algorithms": ["greedy", "enum", "partsel", "lazyprobe", "topk", "anneal"],
            "repetitions": 2,
            "seed": 9,
            "cost_seed": 1,
            "timing": false
        }"#,
    )
    .unwrap();
    let spec = ExperimentSpec::read(&spec_path).unwrap();
    let first = run_experiment(&spec).unwrap();
    let second = run_experiment(&spec).unwrap();
    assert_eq!(first.schema_version, SCHEMA_VERSION);
    assert_eq!(first.rows.len(), 2 * 2 * 6);
    assert_eq!(first.to_json().unwrap(), second.to_json().unwrap());
    assert_eq!(first.to_csv().unwrap(), second.to_csv().unwrap());
    assert!(first.rows.iter().all(|r| r.wall_ms == 0.0 && r.cost <= r.budget as f64));
    let csv = first.to_csv().unwrap();
    assert!(csv.lines().next().unwrap().contains("schema_version"));
    assert_eq!(csv.lines().count(), first.rows.len() + 1);
}

#[test]
fn experiment_rejects_unknown_algorithms() {
    let spec: ExperimentSpec = serde_json::from_str(
        r#"{"dataset": "x", "budgets": [1], "lambdas": [50.0], "models": ["panel-half"], "algorithms": ["magic"]}"#,
    )
    .unwrap();
    assert!(matches!(spec.validate(), Err(Error::UnknownAlgorithm(_))));
}

#[test]
fn d1_table_exact_dominates_and_lazy_matches_partsel() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/d1/manifest.json");
    let spec = serde_json::json!({
        "dataset": manifest,
        "budgets": (0..=10).collect::<Vec<u64>>(),
        "lambdas": [100.0],
        "thetas": [0.0, 0.25],
        "models": ["panel:20"],
        "algorithms": ["greedy", "enum", "partsel", "lazyprobe", "topk", "exact"],
        "timing": false
    });
    fs::write(&spec_path, spec.to_string()).unwrap();
    let table = run_experiment(&ExperimentSpec::read(&spec_path).unwrap()).unwrap();
    let exact: Vec<_> = table.rows.iter().filter(|r| r.algorithm == "exact").collect();
    assert_eq!(exact.len(), 11);
    for row in &table.rows {
        let opt = exact.iter().find(|e| e.budget == row.budget).unwrap();
        assert!(row.influence <= opt.influence + 1e-9, "{} at {}", row.algorithm, row.budget);
        if row.algorithm == "lazyprobe" {
            let part = table
                .rows
                .iter()
                .find(|p| p.algorithm == "partsel" && p.budget == row.budget && p.theta == row.theta)
                .unwrap();
            assert!((part.influence - row.influence).abs() <= 1e-9);
        }
    }
}

#[test]
fn empty_algorithm_list_gives_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    generate_synthetic(&small_config(1), &dir.path().join("data")).unwrap();
    let spec_path = dir.path().join("spec.json");
    fs::write(
        &spec_path,
        r#"{"dataset": "data/manifest.json", "budgets": [1000], "lambdas": [50.0], "models": ["panel-half"], "algorithms": []}"#,
    )
    .unwrap();
    let table = run_experiment(&ExperimentSpec::read(&spec_path).unwrap()).unwrap();
    assert!(table.rows.is_empty());
}
