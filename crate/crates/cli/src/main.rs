use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use billboard_core::baselines::{AnnealParams, DEFAULT_EXACT_CAP};
use billboard_core::data::costs::assign_costs;
use billboard_core::data::experiment::{
    run_algorithm, run_experiment, Algorithm, ExperimentSpec, ResultRecord, SolverSettings,
};
use billboard_core::data::io::{
    ingest, load_instance, save_dataset, Dataset, DatasetManifest, MANIFEST_FILE,
};
use billboard_core::data::synthetic::{generate_synthetic, SyntheticConfig};
use billboard_core::index::InfluenceIndex;
use billboard_core::model::{ProbabilityModel, ProblemInstance};
use billboard_core::partition::{theta_partition, validate_partition, OverlapMode, Partition};

/// Budgeted billboard selection over trajectory data.
#[derive(Parser)]
#[command(name = "billboard", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic city dataset.
    Gen(GenArgs),
    /// Validate raw billboard and trajectory files and write a manifest.
    Ingest(IngestArgs),
    /// Recompute costs from standalone influence and write a new dataset.
    Cost(CostArgs),
    /// Build the influence index and print its statistics.
    Index(InstanceArgs),
    /// Build a θ-partition and write it as JSON.
    Partition(PartitionArgs),
    /// Run one algorithm and print the result record.
    Select(SelectArgs),
    /// Run an experiment grid from a spec file.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    billboards: usize,
    #[arg(long, default_value_t = 2000)]
    trajectories: usize,
    #[arg(long, default_value_t = 12)]
    clusters: usize,
    #[arg(long, default_value_t = 20.0)]
    width_km: f64,
    #[arg(long, default_value_t = 20.0)]
    height_km: f64,
    #[arg(long, default_value_t = 800.0)]
    spread_m: f64,
    #[arg(long, default_value_t = 0.8)]
    cluster_bias: f64,
    #[arg(long, default_value_t = 100.0)]
    step_m: f64,
    #[arg(long, default_value_t = 0.85)]
    short_fraction: f64,
    #[arg(long, default_value_t = 5000.0)]
    short_limit_m: f64,
    #[arg(long, default_value_t = 300.0)]
    min_length_m: f64,
    #[arg(long, default_value_t = 15000.0)]
    max_length_m: f64,
    #[arg(long, default_value_t = 10.0)]
    panel_min: f64,
    #[arg(long, default_value_t = 60.0)]
    panel_max: f64,
    #[arg(long, default_value_t = 40.75)]
    ref_lat: f64,
    #[arg(long, default_value_t = -73.99, allow_hyphen_values = true)]
    ref_lng: f64,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    billboards: PathBuf,
    #[arg(long)]
    trajectories: PathBuf,
    /// Manifest to write.
    #[arg(long)]
    out: PathBuf,
    /// Projection reference; defaults to the mean billboard location.
    #[arg(long, requires = "ref_lng", allow_hyphen_values = true)]
    ref_lat: Option<f64>,
    #[arg(long, requires = "ref_lat", allow_hyphen_values = true)]
    ref_lng: Option<f64>,
}

#[derive(Args)]
struct InstanceArgs {
    /// Dataset manifest (or a directory holding manifest.json).
    #[arg(long)]
    dataset: PathBuf,
    /// Meeting distance in meters.
    #[arg(long)]
    lambda: f64,
    /// uniform:<p>, panel:<A> or panel-half.
    #[arg(long)]
    prob_model: ProbabilityModel,
}

#[derive(Args)]
struct CostArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    seed: u64,
    /// Directory for the re-priced dataset.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value_t = OverlapMode::Singleton)]
    mode: OverlapMode,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    algo: Algorithm,
    #[arg(long)]
    budget: u64,
    #[arg(long, default_value_t = 2)]
    tau: usize,
    /// Partition file from `partition`; otherwise one is built from --theta.
    #[arg(long, conflicts_with = "theta")]
    partition: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value_t = OverlapMode::Singleton)]
    mode: OverlapMode,
    /// Write the DP matrices and traceback to this file.
    #[arg(long)]
    dump_matrices: Option<PathBuf>,
    /// Annealing seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 200)]
    iterations: usize,
    #[arg(long, default_value_t = 0.95)]
    cooling: f64,
    /// Starting temperature; defaults to a tenth of the TopK influence.
    #[arg(long)]
    initial_temperature: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    exact_cap: usize,
    /// Report wall_ms as 0 so output is reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    spec: PathBuf,
    /// JSON table; stdout when omitted.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn manifest_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(MANIFEST_FILE)
    } else {
        p.to_path_buf()
    }
}

fn load(args: &InstanceArgs) -> Result<(Dataset, ProblemInstance)> {
    let path = manifest_path(&args.dataset);
    let manifest = DatasetManifest::read(&path)
        .with_context(|| format!("reading manifest {}", path.display()))?;
    let data = load_instance(&manifest)?;
    if !data.has_costs {
        eprintln!("warning: dataset has no costs; run `billboard cost` first");
    }
    let instance = data.instance(args.lambda, args.prob_model, 0)?;
    Ok((data, instance))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Partition files carry the dataset's original ids.
fn partition_to_source(p: &Partition, data: &Dataset) -> Result<Partition> {
    let mut clusters = Vec::with_capacity(p.len());
    for c in &p.clusters {
        let members = c
            .members
            .iter()
            .map(|&b| {
                let source = data.source_billboard_id(b);
                u32::try_from(source).with_context(|| {
                    format!("billboard id {source} does not fit a partition file")
                })
            })
            .collect::<Result<Vec<u32>>>()?;
        clusters.push(members);
    }
    Ok(Partition::from_clusters(p.theta, p.mode, clusters)?)
}

fn partition_to_dense(p: &Partition, data: &Dataset) -> Result<Partition> {
    let mut clusters = Vec::with_capacity(p.len());
    for c in &p.clusters {
        let mut members = Vec::with_capacity(c.members.len());
        for &source in &c.members {
            match data.dense_billboard_id(source as u64) {
                Some(b) => members.push(b),
                None => bail!("partition names unknown billboard {source}"),
            }
        }
        clusters.push(members);
    }
    Ok(Partition::from_clusters(p.theta, p.mode, clusters)?)
}

fn gen(a: GenArgs) -> Result<()> {
    let config = SyntheticConfig {
        width_km: a.width_km,
        height_km: a.height_km,
        billboards: a.billboards,
        trajectories: a.trajectories,
        clusters: a.clusters,
        cluster_spread_m: a.spread_m,
        cluster_bias: a.cluster_bias,
        step_m: a.step_m,
        short_fraction: a.short_fraction,
        short_limit_m: a.short_limit_m,
        min_length_m: a.min_length_m,
        max_length_m: a.max_length_m,
        panel_min: a.panel_min,
        panel_max: a.panel_max,
        ref_lat: a.ref_lat,
        ref_lng: a.ref_lng,
        seed: a.seed,
    };
    let manifest = generate_synthetic(&config, &a.out)?;
    eprintln!(
        "wrote {} billboards and {} trajectories to {}",
        manifest.billboard_count,
        manifest.trajectory_count,
        a.out.display()
    );
    Ok(())
}

fn ingest_cmd(a: IngestArgs) -> Result<()> {
    let absolute = |p: &Path| {
        fs::canonicalize(p).with_context(|| format!("cannot open {}", p.display()))
    };
    let reference = a.ref_lat.zip(a.ref_lng);
    let manifest = ingest(&absolute(&a.billboards)?, &absolute(&a.trajectories)?, reference)?;
    // counts, ids and checksum are validated by loading once
    load_instance(&manifest)?;
    manifest.write(&a.out)?;
    eprintln!(
        "{} billboards, {} trajectories; manifest at {}",
        manifest.billboard_count,
        manifest.trajectory_count,
        a.out.display()
    );
    Ok(())
}

fn cost(a: CostArgs) -> Result<()> {
    let (mut data, instance) = load(&a.instance)?;
    let priced = assign_costs(&instance, a.seed);
    data.billboards = priced.universe;
    data.has_costs = true;
    let reference = format!(
        "all {} trajectories, lambda={}, model={}, seed={}",
        data.trajectories.len(),
        a.instance.lambda,
        a.instance.prob_model,
        a.seed
    );
    save_dataset(&a.out, &data, Some(reference))?;
    eprintln!("re-priced dataset written to {}", a.out.display());
    Ok(())
}

fn index(a: InstanceArgs) -> Result<()> {
    let (_, instance) = load(&a)?;
    let index = InfluenceIndex::build(&instance);
    println!("{}", serde_json::to_string_pretty(index.stats())?);
    Ok(())
}

fn partition(a: PartitionArgs) -> Result<()> {
    let (data, instance) = load(&a.instance)?;
    let index = InfluenceIndex::build(&instance);
    let p = theta_partition(&index, a.theta, a.mode)?;
    let report = validate_partition(&index, &p)?;
    eprintln!(
        "{} clusters, largest {}, max pair ratio {:.4}",
        p.len(),
        p.largest(),
        report.max_ratio
    );
    emit(&partition_to_source(&p, &data)?.to_json()?, a.out.as_deref())
}

fn select(a: SelectArgs) -> Result<()> {
    let (data, instance) = load(&a.instance)?;
    let index = InfluenceIndex::build(&instance);
    let partition = if !a.algo.needs_partition() {
        None
    } else if let Some(path) = &a.partition {
        let p = partition_to_dense(&Partition::read(path)?, &data)?;
        p.check_cover(&index)?;
        Some(p)
    } else if let Some(theta) = a.theta {
        Some(theta_partition(&index, theta, a.mode)?)
    } else {
        bail!("{} needs --partition or --theta", a.algo);
    };
    let settings = SolverSettings {
        tau: a.tau,
        anneal: AnnealParams {
            initial_temperature: a.initial_temperature,
            cooling: a.cooling,
            iterations_per_level: a.iterations,
            restarts: a.restarts,
            seed: a.seed,
            ..AnnealParams::default()
        },
        exact_cap: a.exact_cap,
    };
    let outcome = run_algorithm(&index, a.algo, a.budget, partition.as_ref(), &settings)?;
    if let Some(path) = &a.dump_matrices {
        match &outcome.matrices {
            Some(m) => fs::write(path, serde_json::to_string_pretty(m)?)
                .with_context(|| format!("writing {}", path.display()))?,
            None => eprintln!("warning: {} has no DP matrices to dump", a.algo),
        }
    }
    let record = ResultRecord::new(
        a.algo,
        a.budget,
        instance.lambda,
        partition.as_ref().map(|p| p.theta),
        &outcome,
        |b| data.source_billboard_id(b),
        !a.no_timing,
    );
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let spec = ExperimentSpec::read(&a.spec)?;
    let table = run_experiment(&spec)?;
    if let Some(path) = &a.csv {
        fs::write(path, table.to_csv()?).with_context(|| format!("writing {}", path.display()))?;
    }
    emit(&table.to_json()?, a.json.as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Ingest(a) => ingest_cmd(a),
        Command::Cost(a) => cost(a),
        Command::Index(a) => index(a),
        Command::Partition(a) => partition(a),
        Command::Select(a) => select(a),
        Command::Bench(a) => bench(a),
    }
}
