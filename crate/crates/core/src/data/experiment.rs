//! Running solvers by name, single result records and grid experiments.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{exact_opt, simulated_annealing, top_k, AnnealParams, DEFAULT_EXACT_CAP};
use crate::data::costs::assign_costs;
use crate::data::io::{load_instance, Dataset, DatasetManifest};
use crate::dp::{lazy_probe, part_sel, DpMatrices};
use crate::error::{Error, Result};
use crate::index::InfluenceIndex;
use crate::model::ProbabilityModel;
use crate::partition::{theta_partition, OverlapMode, Partition};
use crate::select::{enum_sel, greedy_sel, Selection};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Greedy,
    Enum,
    PartSel,
    LazyProbe,
    TopK,
    Anneal,
    Exact,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Greedy,
        Algorithm::Enum,
        Algorithm::PartSel,
        Algorithm::LazyProbe,
        Algorithm::TopK,
        Algorithm::Anneal,
        Algorithm::Exact,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Enum => "enum",
            Algorithm::PartSel => "partsel",
            Algorithm::LazyProbe => "lazyprobe",
            Algorithm::TopK => "topk",
            Algorithm::Anneal => "anneal",
            Algorithm::Exact => "exact",
        }
    }

    pub fn needs_partition(&self) -> bool {
        matches!(self, Algorithm::PartSel | Algorithm::LazyProbe)
    }

    pub fn is_randomized(&self) -> bool {
        matches!(self, Algorithm::Anneal)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// Solver settings shared by every algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub tau: usize,
    pub anneal: AnnealParams,
    pub exact_cap: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tau: 2,
            anneal: AnnealParams::default(),
            exact_cap: DEFAULT_EXACT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub selection: Selection,
    /// DP table value for the partition algorithms.
    pub dp_value: Option<f64>,
    pub matrices: Option<DpMatrices>,
    pub wall_ms: f64,
}

/// Runs one algorithm over the whole universe of `index`.
pub fn run_algorithm(
    index: &InfluenceIndex,
    algorithm: Algorithm,
    budget: u64,
    partition: Option<&Partition>,
    settings: &SolverSettings,
) -> Result<RunOutcome> {
    let all = index.billboard_ids();
    let started = Instant::now();
    let mut dp_value = None;
    let mut matrices = None;
    let selection = match algorithm {
        Algorithm::Greedy => greedy_sel(index, all, budget)?,
        Algorithm::Enum => enum_sel(index, all, budget, settings.tau)?,
        Algorithm::PartSel | Algorithm::LazyProbe => {
            let partition = partition.ok_or_else(|| {
                Error::Config(format!("{algorithm} needs a partition or a theta"))
            })?;
            let out = if algorithm == Algorithm::PartSel {
                part_sel(index, partition, budget, settings.tau)?
            } else {
                lazy_probe(index, partition, budget, settings.tau)?
            };
            dp_value = Some(out.dp_value);
            matrices = Some(out.matrices);
            out.selection
        }
        Algorithm::TopK => top_k(index, all, budget)?,
        Algorithm::Anneal => simulated_annealing(index, all, budget, &settings.anneal)?,
        Algorithm::Exact => exact_opt(index, all, budget, settings.exact_cap)?,
    };
    Ok(RunOutcome {
        selection,
        dp_value,
        matrices,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// One solver result in the shared JSON result shape. Ids are the dataset's
/// original ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub algorithm: String,
    pub budget: u64,
    pub lambda: f64,
    pub theta: Option<f64>,
    pub chosen_ids: Vec<u64>,
    pub cost: u64,
    pub influence: f64,
    pub wall_ms: f64,
    pub enum_calls: u64,
    pub estimator_calls: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dp_value: Option<f64>,
}

impl ResultRecord {
    /// `timing = false` zeroes `wall_ms` so repeated runs serialize
    /// identically.
    pub fn new(
        algorithm: Algorithm,
        budget: u64,
        lambda: f64,
        theta: Option<f64>,
        outcome: &RunOutcome,
        source_ids: impl Fn(u32) -> u64,
        timing: bool,
    ) -> Self {
        let s = &outcome.selection;
        ResultRecord {
            algorithm: algorithm.name().to_string(),
            budget,
            lambda,
            theta,
            chosen_ids: s.chosen.iter().map(|&b| source_ids(b)).collect(),
            cost: s.cost,
            influence: s.influence,
            wall_ms: if timing { outcome.wall_ms } else { 0.0 },
            enum_calls: s.diagnostics.enum_calls,
            estimator_calls: s.diagnostics.estimator_calls,
            dp_value: outcome.dp_value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Manifest path, relative to the spec file when read from disk.
    pub dataset: PathBuf,
    pub budgets: Vec<u64>,
    pub lambdas: Vec<f64>,
    /// Only used by the partition algorithms.
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    pub models: Vec<String>,
    pub algorithms: Vec<String>,
    #[serde(default = "one")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: OverlapMode,
    /// Recompute costs from influence with this β seed for every
    /// (λ, model) pair; otherwise the dataset's costs are used.
    #[serde(default)]
    pub cost_seed: Option<u64>,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default = "yes")]
    pub timing: bool,
}

fn default_thetas() -> Vec<f64> {
    vec![0.1]
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_mode() -> OverlapMode {
    OverlapMode::Singleton
}

impl ExperimentSpec {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec: ExperimentSpec = serde_json::from_str(&text)?;
        if spec.dataset.is_relative() {
            if let Some(dir) = path.parent() {
                spec.dataset = dir.join(&spec.dataset);
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<Vec<Algorithm>> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.budgets.is_empty() || self.lambdas.is_empty() || self.models.is_empty() {
            return bad("budget, lambda and model grids must be non-empty");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1");
        }
        let algorithms = self
            .algorithms
            .iter()
            .map(|a| a.parse())
            .collect::<Result<Vec<Algorithm>>>()?;
        if algorithms.iter().any(Algorithm::needs_partition) && self.thetas.is_empty() {
            return bad("partition algorithms need at least one theta");
        }
        for m in &self.models {
            m.parse::<ProbabilityModel>()?;
        }
        Ok(algorithms)
    }
}

/// Averaged over repetitions; `chosen_ids` and the counters come from the
/// first repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub algorithm: String,
    pub model: String,
    pub lambda: f64,
    pub theta: Option<f64>,
    pub budget: u64,
    pub repetitions: usize,
    pub seeds: Vec<u64>,
    pub clusters: Option<usize>,
    pub influence: f64,
    pub cost: f64,
    pub dp_value: Option<f64>,
    pub wall_ms: f64,
    pub enum_calls: u64,
    pub estimator_calls: u64,
    pub chosen_ids: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub schema_version: u32,
    pub rows: Vec<ExperimentRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    schema_version: u32,
    algorithm: &'a str,
    model: &'a str,
    lambda: f64,
    theta: Option<f64>,
    budget: u64,
    repetitions: usize,
    seeds: String,
    clusters: Option<usize>,
    influence: f64,
    cost: f64,
    dp_value: Option<f64>,
    wall_ms: f64,
    enum_calls: u64,
    estimator_calls: u64,
    chosen_ids: String,
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

impl ExperimentTable {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// CSV with a leading `schema_version` column; list fields are
    /// space-separated.
    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            writer
                .write_record([
                    "schema_version",
                    "algorithm",
                    "model",
                    "lambda",
                    "theta",
                    "budget",
                    "repetitions",
                    "seeds",
                    "clusters",
                    "influence",
                    "cost",
                    "dp_value",
                    "wall_ms",
                    "enum_calls",
                    "estimator_calls",
                    "chosen_ids",
                ])
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        for r in &self.rows {
            writer
                .serialize(CsvRow {
                    schema_version: self.schema_version,
                    algorithm: &r.algorithm,
                    model: &r.model,
                    lambda: r.lambda,
                    theta: r.theta,
                    budget: r.budget,
                    repetitions: r.repetitions,
                    seeds: join(&r.seeds),
                    clusters: r.clusters,
                    influence: r.influence,
                    cost: r.cost,
                    dp_value: r.dp_value,
                    wall_ms: r.wall_ms,
                    enum_calls: r.enum_calls,
                    estimator_calls: r.estimator_calls,
                    chosen_ids: join(&r.chosen_ids),
                })
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

struct Setting {
    model: String,
    lambda: f64,
    index: InfluenceIndex,
    partitions: Vec<(f64, Partition)>,
}

struct Job<'a> {
    setting: &'a Setting,
    algorithm: Algorithm,
    theta: Option<(f64, &'a Partition)>,
    budget: u64,
}

fn run_job(job: &Job<'_>, spec: &ExperimentSpec, dataset: &Dataset) -> Result<ExperimentRow> {
    let reps = if job.algorithm.is_randomized() {
        spec.repetitions
    } else {
        1
    };
    let mut seeds = Vec::new();
    let mut outcomes = Vec::new();
    for r in 0..reps {
        let mut settings = spec.solver.clone();
        if job.algorithm.is_randomized() {
            settings.anneal.seed = spec.seed.wrapping_add(r as u64);
            seeds.push(settings.anneal.seed);
        }
        outcomes.push(run_algorithm(
            &job.setting.index,
            job.algorithm,
            job.budget,
            job.theta.map(|t| t.1),
            &settings,
        )?);
    }
    let n = outcomes.len() as f64;
    let mean = |f: &dyn Fn(&RunOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    let first = &outcomes[0];
    Ok(ExperimentRow {
        algorithm: job.algorithm.name().to_string(),
        model: job.setting.model.clone(),
        lambda: job.setting.lambda,
        theta: job.theta.map(|t| t.0),
        budget: job.budget,
        repetitions: reps,
        seeds,
        clusters: job.theta.map(|t| t.1.len()),
        influence: mean(&|o| o.selection.influence),
        cost: mean(&|o| o.selection.cost as f64),
        dp_value: first.dp_value,
        wall_ms: if spec.timing { mean(&|o| o.wall_ms) } else { 0.0 },
        enum_calls: first.selection.diagnostics.enum_calls,
        estimator_calls: first.selection.diagnostics.estimator_calls,
        chosen_ids: first
            .selection
            .chosen
            .iter()
            .map(|&b| dataset.source_billboard_id(b))
            .collect(),
    })
}

/// Runs every grid point; rows come out sorted by (model, λ, algorithm, θ,
/// budget) whatever order the parallel workers finish in.
pub fn run_experiment_on(spec: &ExperimentSpec, dataset: &Dataset) -> Result<ExperimentTable> {
    let algorithms = spec.validate()?;
    if algorithms.is_empty() {
        return Ok(ExperimentTable {
            schema_version: SCHEMA_VERSION,
            rows: Vec::new(),
        });
    }
    let wants_partition = algorithms.iter().any(Algorithm::needs_partition);
    let mut pairs = Vec::new();
    for model in &spec.models {
        for &lambda in &spec.lambdas {
            pairs.push((model.clone(), lambda));
        }
    }
    let settings: Vec<Setting> = pairs
        .into_par_iter()
        .map(|(model, lambda)| -> Result<Setting> {
            let parsed: ProbabilityModel = model.parse()?;
            let mut instance = dataset.instance(lambda, parsed, 0)?;
            if let Some(seed) = spec.cost_seed {
                instance = assign_costs(&instance, seed);
            }
            let index = InfluenceIndex::build(&instance);
            let partitions = if wants_partition {
                spec.thetas
                    .iter()
                    .map(|&t| Ok((t, theta_partition(&index, t, spec.mode)?)))
                    .collect::<Result<_>>()?
            } else {
                Vec::new()
            };
            Ok(Setting {
                model,
                lambda,
                index,
                partitions,
            })
        })
        .collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for setting in &settings {
        for &algorithm in &algorithms {
            for &budget in &spec.budgets {
                if algorithm.needs_partition() {
                    for (t, p) in &setting.partitions {
                        jobs.push(Job {
                            setting,
                            algorithm,
                            theta: Some((*t, p)),
                            budget,
                        });
                    }
                } else {
                    jobs.push(Job {
                        setting,
                        algorithm,
                        theta: None,
                        budget,
                    });
                }
            }
        }
    }
    let mut rows: Vec<ExperimentRow> = jobs
        .par_iter()
        .map(|job| run_job(job, spec, dataset))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| {
        (&a.model, a.algorithm.as_str(), a.budget)
            .cmp(&(&b.model, b.algorithm.as_str(), b.budget))
            .then(a.lambda.total_cmp(&b.lambda))
            .then(a.theta.unwrap_or(-1.0).total_cmp(&b.theta.unwrap_or(-1.0)))
    });
    Ok(ExperimentTable {
        schema_version: SCHEMA_VERSION,
        rows,
    })
}

/// Loads the spec's dataset and runs the grid.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentTable> {
    let manifest = DatasetManifest::read(&spec.dataset)?;
    let dataset = load_instance(&manifest)?;
    run_experiment_on(spec, &dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!(matches!(
            "magic".parse::<Algorithm>(),
            Err(Error::UnknownAlgorithm(_))
        ));
    }

    #[test]
    fn spec_defaults() {
        let spec: ExperimentSpec = serde_json::from_str(
            r#"{"dataset":"m.json","budgets":[1],"lambdas":[100],"models":["panel:20"],"algorithms":[]}"#,
        )
        .unwrap();
        assert_eq!(spec.repetitions, 1);
        assert_eq!(spec.solver.tau, 2);
        assert!(spec.timing);
        assert!(spec.validate().unwrap().is_empty());
    }
}
