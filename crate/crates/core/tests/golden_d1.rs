//! D1 loaded from disk and checked against frozen goldens produced by an
//! independent brute-force implementation.

use std::path::PathBuf;

use serde_json::Value;

use billboard_core::baselines::{exact_opt, top_k, DEFAULT_EXACT_CAP};
use billboard_core::data::io::{load_instance, DatasetManifest, MANIFEST_FILE};
use billboard_core::fixtures;
use billboard_core::index::InfluenceIndex;
use billboard_core::model::{influence_naive, ProbabilityModel, ProblemInstance};
use billboard_core::select::{enum_sel, estimate_bound, greedy_sel, Selection};

const TOL: f64 = 1e-9;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/d1")
}

fn golden() -> Value {
    let text = std::fs::read_to_string(fixture_dir().join("golden.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

struct Loaded {
    instance: ProblemInstance,
    sources: Vec<u64>,
}

fn load() -> Loaded {
    let manifest = DatasetManifest::read(&fixture_dir().join(MANIFEST_FILE)).unwrap();
    let data = load_instance(&manifest).unwrap();
    let g = golden();
    let model: ProbabilityModel = g["model"].as_str().unwrap().parse().unwrap();
    let instance = data
        .instance(g["lambda"].as_f64().unwrap(), model, 0)
        .unwrap();
    Loaded {
        instance,
        sources: data.billboard_source_ids,
    }
}

fn to_source(sources: &[u64], s: &Selection) -> Vec<u64> {
    let mut ids: Vec<u64> = s.chosen.iter().map(|&b| sources[b as usize]).collect();
    ids.sort_unstable();
    ids
}

fn ids(v: &Value) -> Vec<u64> {
    v.as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect()
}

fn assert_matches(label: &str, budget: u64, sources: &[u64], got: &Selection, want: &Value) {
    assert_eq!(
        to_source(sources, got),
        ids(&want["chosen"]),
        "{label} at L={budget}"
    );
    let w = want["influence"].as_f64().unwrap();
    assert!(
        (got.influence - w).abs() <= TOL,
        "{label} at L={budget}: {} vs {w}",
        got.influence
    );
    assert!(got.cost <= budget, "{label} at L={budget} over budget");
}

#[test]
fn files_reproduce_the_planar_fixture() {
    let loaded = load();
    let reference = fixtures::d1();
    assert_eq!(loaded.sources, vec![1, 2, 3, 4, 5, 6]);
    for (dense, (got, want)) in loaded
        .instance
        .universe
        .iter()
        .zip(&reference.universe)
        .enumerate()
    {
        assert_eq!(got.id, dense as u32);
        assert!((got.location.x - want.location.x).abs() < 1e-6);
        assert!((got.location.y - want.location.y).abs() < 1e-6);
        assert_eq!(got.cost, want.cost);
        assert_eq!(got.panel_size, want.panel_size);
    }
    for (got, want) in loaded.instance.trajectories.iter().zip(&reference.trajectories) {
        assert_eq!(got.points.len(), want.points.len());
        for (p, q) in got.points.iter().zip(&want.points) {
            assert!((p.x - q.x).abs() < 1e-6 && (p.y - q.y).abs() < 1e-6);
        }
    }
}

#[test]
fn standalone_and_set_influences() {
    let loaded = load();
    let index = InfluenceIndex::build(&loaded.instance);
    let g = golden();
    for (source, want) in g["standalone"].as_object().unwrap() {
        let source: u64 = source.parse().unwrap();
        let dense = loaded.sources.iter().position(|&s| s == source).unwrap() as u32;
        let want = want.as_f64().unwrap();
        assert!((index.standalone(dense).unwrap() - want).abs() <= TOL);
        assert!((influence_naive(&loaded.instance, &[dense]).unwrap() - want).abs() <= TOL);
    }
    let pair = index.influence(&[0, 3]).unwrap();
    assert!((pair - g["influence_1_4"].as_f64().unwrap()).abs() <= TOL);
    let all = index.influence(index.billboard_ids()).unwrap();
    assert!((all - g["influence_all"].as_f64().unwrap()).abs() <= TOL);
}

#[test]
fn meeting_is_inclusive_at_lambda() {
    // b2 sits exactly λ away from the last point of t3
    let inst = fixtures::d1();
    let index = InfluenceIndex::build(&inst);
    let forward = index.forward(2).unwrap();
    assert!(forward.iter().any(|&(t, p)| t == 3 && (p - 0.3).abs() <= TOL));
    assert!(index.inverted(3).iter().any(|&(b, _)| b == 2));
}

#[test]
fn solvers_match_goldens_at_every_budget() {
    let loaded = load();
    let index = InfluenceIndex::build(&loaded.instance);
    let all = index.billboard_ids().to_vec();
    let g = golden();
    for row in g["budgets"].as_array().unwrap() {
        let l = row["budget"].as_u64().unwrap();
        let src = &loaded.sources;
        let opt = exact_opt(&index, &all, l, DEFAULT_EXACT_CAP).unwrap();
        assert_matches("exact", l, src, &opt, &row["opt"]);
        assert_matches("greedy", l, src, &greedy_sel(&index, &all, l).unwrap(), &row["greedy"]);
        assert_matches("enum", l, src, &enum_sel(&index, &all, l, 2).unwrap(), &row["enum"]);
        assert_matches("topk", l, src, &top_k(&index, &all, l).unwrap(), &row["topk"]);

        let bound = estimate_bound(&index, &all, l).unwrap();
        let want = &row["bound"];
        assert!(
            (bound.value - want["value"].as_f64().unwrap()).abs() <= TOL,
            "bound at L={l}: {}",
            bound.value
        );
        let mut greedy_set: Vec<u64> = bound.greedy_set.iter().map(|&b| src[b as usize]).collect();
        greedy_set.sort_unstable();
        assert_eq!(greedy_set, ids(&want["greedy_set"]), "bound set at L={l}");
        let k1 = want["k_plus_one"].as_u64().map(|k| src.iter().position(|&s| s == k).unwrap() as u32);
        assert_eq!(bound.k_plus_one, k1, "bound k+1 at L={l}");
    }
}
