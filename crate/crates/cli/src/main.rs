//! `ntq`: generate environments and datasets, train models, evaluate them and
//! run the full benchmark grid.

use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ntq_core::bench::{self, render_svg, GridConfig, Overlay, QueryKind};
use ntq_core::bundled::{self, BUNDLED};
use ntq_core::datagen::{generate_dataset, meta_path, Dataset, DatasetConfig, Preset};
use ntq_core::env::{load_environment, ConfigKind, Configuration, Environment};
use ntq_core::expert::{Expert, ExpertConfig};
use ntq_core::manifest::{manifest_path, RunManifest};
use ntq_core::planner::{plan, PlannerConfig};
use ntq_core::pnet::{self, Activation, AngleEncoding, MlpModel, TrainConfig};
use ntq_core::sampling::{estimate_gamma_nt, Query};
use ntq_core::steering::default_resolution;

#[derive(Parser, Debug)]
#[command(name = "ntq", version, about = "Non-trivial query sampling and neural planning benchmark")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write bundled environment files.
    GenEnv(GenEnvArgs),
    /// Estimate the fraction of uniform queries that are non-trivial.
    Gamma(GammaArgs),
    /// Generate an expert dataset.
    GenData(GenDataArgs),
    /// Train a next-state model on a dataset.
    Train(TrainArgs),
    /// Evaluate a model on a fresh test query set.
    Eval(EvalArgs),
    /// Run the full dataset x model x query-kind x steering grid.
    Grid(GridArgs),
    /// Render an environment with optional queries and paths as SVG.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct GenEnvArgs {
    /// Bundled environment name; omit to write all of them.
    #[arg(long)]
    name: Option<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GammaArgs {
    /// Environment file or bundled environment name.
    #[arg(long)]
    env: String,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    padding: f64,
    /// Steering resolution (default depends on the robot).
    #[arg(long)]
    resolution: Option<f64>,
    /// Where to write the manifest.
    #[arg(long, default_value = "gamma.manifest.json")]
    manifest: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    D0,
    D1,
    D2,
    D3,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::D0 => Preset::D0,
            PresetArg::D1 => Preset::D1,
            PresetArg::D2 => Preset::D2,
            PresetArg::D3 => Preset::D3,
        }
    }
}

#[derive(Args, Debug)]
struct GenDataArgs {
    #[arg(long)]
    env: String,
    /// Start from a preset's p_nt/prune; explicit flags override it.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long)]
    p_nt: Option<f64>,
    #[arg(long)]
    prune: Option<bool>,
    #[arg(long, default_value_t = 1000)]
    k_train: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Obstacle padding (default: bundled value or per-robot default).
    #[arg(long)]
    padding: Option<f64>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    retry_cap: Option<usize>,
    #[arg(long)]
    gamma_samples: Option<usize>,
    /// Expert iteration budget (RRT*).
    #[arg(long)]
    expert_iterations: Option<usize>,
    /// Also write the samples as CSV next to the dataset.
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ActivationArg {
    Relu,
    Tanh,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EncodingArg {
    SinCos,
    Wrapped,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// TOML file with training settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Comma separated hidden layer widths.
    #[arg(long, value_delimiter = ',')]
    hidden_layers: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    activation: Option<ActivationArg>,
    #[arg(long, value_enum)]
    angle_encoding: Option<EncodingArg>,
    #[arg(long)]
    validation_split: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum QueryKindArg {
    Uniform,
    NonTrivial,
    Trivial,
}

impl From<QueryKindArg> for QueryKind {
    fn from(k: QueryKindArg) -> Self {
        match k {
            QueryKindArg::Uniform => QueryKind::Uniform,
            QueryKindArg::NonTrivial => QueryKind::NonTrivial,
            QueryKindArg::Trivial => QueryKind::Trivial,
        }
    }
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    env: String,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "uniform")]
    query_kind: QueryKindArg,
    #[arg(long, default_value_t = 200)]
    k_test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    use_steer: bool,
    #[arg(long)]
    n_plan: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    replan_depth: Option<usize>,
    #[arg(long)]
    replan_iterations: Option<usize>,
    #[arg(long)]
    resolution: Option<f64>,
    /// Metrics JSON output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `grid-<name>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Artifact cache (default: `<out>/cache`).
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long)]
    env: String,
    /// Draw obstacle outlines grown by this padding.
    #[arg(long)]
    padding: Option<f64>,
    /// Scatter the query endpoints of this dataset.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Maximum number of dataset queries drawn.
    #[arg(long, default_value_t = 150)]
    n_queries: usize,
    /// Plan start -> goal with this model and draw the result.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Comma separated start coordinates.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    start: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    goal: Option<Vec<f64>>,
    /// Also draw the expert path for start -> goal.
    #[arg(long)]
    expert: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    use_steer: bool,
    #[arg(long)]
    out: PathBuf,
}

struct LoadedEnv {
    env: Environment<f64>,
    padding: f64,
    file: Option<PathBuf>,
}

fn default_padding(kind: ConfigKind) -> f64 {
    match kind {
        ConfigKind::Point2 => 0.8,
        ConfigKind::PoseSe2 => 0.4,
        ConfigKind::Joints(_) => 0.1,
    }
}

fn load_env(spec: &str) -> Result<LoadedEnv> {
    let path = FsPath::new(spec);
    if path.exists() {
        let env: Environment<f64> = load_environment(path)?;
        let padding = default_padding(env.config_kind());
        return Ok(LoadedEnv {
            env,
            padding,
            file: Some(path.to_path_buf()),
        });
    }
    match bundled::find(spec) {
        Some(b) => Ok(LoadedEnv {
            env: b.environment()?,
            padding: b.padding,
            file: None,
        }),
        None => bail!("no environment file or bundled environment named `{spec}`"),
    }
}

fn finish(mut manifest: RunManifest, env: &LoadedEnv, manifest_file: &FsPath) -> Result<()> {
    if let Some(f) = &env.file {
        manifest.add_input(f)?;
    } else {
        manifest.config["bundled_environment"] = json!(env.env.name);
    }
    manifest.write(manifest_file)?;
    println!("manifest: {}", manifest_file.display());
    Ok(())
}

fn gen_env(a: GenEnvArgs) -> Result<()> {
    std::fs::create_dir_all(&a.out)?;
    let chosen: Vec<_> = match &a.name {
        Some(n) => vec![bundled::find(n).with_context(|| format!("unknown bundled environment `{n}`"))?],
        None => BUNDLED.iter().collect(),
    };
    let mut manifest = RunManifest::new("gen-env", json!({ "name": a.name }), vec![]);
    for b in chosen {
        let path = a.out.join(format!("{}.toml", b.name));
        std::fs::write(&path, b.toml)?;
        manifest.add_output(&path, Some(&a.out))?;
        println!("{}", path.display());
    }
    let mpath = a.out.join("gen-env.manifest.json");
    manifest.write(&mpath)?;
    println!("manifest: {}", mpath.display());
    Ok(())
}

fn gamma(a: GammaArgs) -> Result<()> {
    let loaded = load_env(&a.env)?;
    let env = &loaded.env;
    let res = a.resolution.unwrap_or_else(|| default_resolution(env.config_kind()));
    let est = estimate_gamma_nt(&env.inflated(a.padding), a.n, res, a.seed)?;
    println!(
        "gamma_nt = {:.4} ± {:.4} ({} of {} queries non-trivial)",
        est.gamma, est.half_width, est.n_non_trivial, est.n_samples
    );
    let manifest = RunManifest::new(
        "gamma",
        json!({ "env": a.env, "n": a.n, "padding": a.padding, "resolution": res, "estimate": est }),
        vec![a.seed],
    );
    finish(manifest, &loaded, &a.manifest)
}

fn gen_data(a: GenDataArgs) -> Result<()> {
    let loaded = load_env(&a.env)?;
    let env = &loaded.env;
    let kind = env.config_kind();
    let padding = a.padding.unwrap_or(loaded.padding);
    let mut cfg = DatasetConfig::new(kind, a.preset.map_or(Preset::D0, Into::into), a.k_train, padding, a.seed);
    if a.preset.is_none() && (a.p_nt.is_none() || a.prune.is_none()) {
        bail!("give --preset or both --p-nt and --prune");
    }
    if let Some(p) = a.p_nt {
        cfg.p_nt = p;
    }
    if let Some(p) = a.prune {
        cfg.prune = p;
    }
    if let Some(n) = a.n_max {
        cfg.sampler.n_max = n;
    }
    cfg.retry_cap = a.retry_cap;
    if let Some(g) = a.gamma_samples {
        cfg.gamma_samples = g;
    }
    if let Some(i) = a.expert_iterations {
        cfg.expert.iterations = i;
    }
    let ds: Dataset<f64> = generate_dataset(env, &cfg)?;
    ds.save(&a.out)?;
    let m = &ds.meta;
    println!(
        "{} samples from {} queries ({} draws); gamma_nt = {:.4} ± {:.4}; expert failures {}; fallbacks {}",
        m.n_samples, m.n_queries, m.draws, m.gamma.gamma, m.gamma.half_width, m.expert_failures, m.fallbacks
    );
    let mut manifest = RunManifest::new("gen-data", serde_json::to_value(&cfg)?, vec![a.seed]);
    manifest.add_output(&a.out, None)?;
    manifest.add_output(&meta_path(&a.out), None)?;
    if a.csv {
        let csv = a.out.with_extension("csv");
        std::fs::write(&csv, ds.to_csv())?;
        manifest.add_output(&csv, None)?;
    }
    finish(manifest, &loaded, &manifest_path(&a.out))
}

fn train(a: TrainArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => toml::from_str::<TrainConfig>(&std::fs::read_to_string(p)?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => TrainConfig::default(),
    };
    macro_rules! set {
        ($($f:ident),*) => {$( if let Some(v) = a.$f.clone() { cfg.$f = v; } )*};
    }
    set!(epochs, seed, batch_size, lr, hidden_layers, validation_split);
    if let Some(act) = a.activation {
        cfg.activation = match act {
            ActivationArg::Relu => Activation::Relu,
            ActivationArg::Tanh => Activation::Tanh,
        };
    }
    if let Some(e) = a.angle_encoding {
        cfg.angle_encoding = match e {
            EncodingArg::SinCos => AngleEncoding::SinCos,
            EncodingArg::Wrapped => AngleEncoding::Wrapped,
        };
    }
    let ds = Dataset::<f64>::load(&a.data)?;
    let (model, report) = pnet::train(&ds, &cfg)?;
    model.save(&a.out)?;
    println!(
        "trained on {} samples ({} held out): loss {:.6} -> {:.6}",
        report.n_train,
        report.n_val,
        report.first_loss(),
        report.final_loss()
    );
    let report_file = a.out.with_extension("train.json");
    std::fs::write(&report_file, serde_json::to_string_pretty(&report)? + "\n")?;
    let mut manifest = RunManifest::new("train", serde_json::to_value(&cfg)?, vec![cfg.seed]);
    manifest.add_input(&a.data)?;
    manifest.add_output(&a.out, None)?;
    manifest.add_output(&report_file, None)?;
    let mpath = manifest_path(&a.out);
    manifest.write(&mpath)?;
    println!("manifest: {}", mpath.display());
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let loaded = load_env(&a.env)?;
    let env = &loaded.env;
    let model = MlpModel::<f64>::load(&a.model)?;
    let mut cfg = PlannerConfig {
        use_steer: a.use_steer,
        resolution: a.resolution,
        ..PlannerConfig::default()
    };
    if let Some(v) = a.n_plan {
        cfg.n_plan = v;
    }
    if let Some(v) = a.delta {
        cfg.delta = v;
    }
    if let Some(v) = a.replan_depth {
        cfg.replan_depth = v;
    }
    if let Some(v) = a.replan_iterations {
        cfg.replan_iterations = v;
    }
    cfg.validate()?;
    let view = env.view();
    let res = a.resolution.unwrap_or_else(|| default_resolution(env.config_kind()));
    let kind: QueryKind = a.query_kind.into();
    let queries = bench::test_queries(&view, kind, a.k_test, a.seed, res)?;
    let expert = Expert::new(view, ExpertConfig::for_kind(env.config_kind()))?;
    let (row, _) = bench::evaluate_with_expert("model", kind, &model, &queries, &expert, &cfg)?;
    println!(
        "{} queries: success ratio {:.3} ({}/{}), cost ratio {}",
        kind.label(),
        row.success_ratio,
        row.n_success,
        row.n_total,
        row.cost_ratio.map_or("-".to_string(), |c| format!("{c:.3}"))
    );
    std::fs::write(&a.out, serde_json::to_string_pretty(&row)? + "\n")?;
    let mut manifest = RunManifest::new(
        "eval",
        json!({ "env": a.env, "query_kind": kind, "k_test": a.k_test, "planner": cfg }),
        vec![a.seed],
    );
    manifest.add_input(&a.model)?;
    manifest.add_output(&a.out, None)?;
    finish(manifest, &loaded, &manifest_path(&a.out))
}

fn grid(a: GridArgs) -> Result<()> {
    let cfg = GridConfig::load(&a.config)?;
    let base = a.config.parent().unwrap_or(FsPath::new("."));
    let out = a.out.unwrap_or_else(|| PathBuf::from(format!("grid-{}", cfg.name)));
    let outcome = bench::run_grid(&cfg, base, &out, a.cache.as_deref())?;
    print!("{}", outcome.report);
    println!("manifest: {}", out.join("manifest.json").display());
    Ok(())
}

fn coords(kind: ConfigKind, v: &[f64]) -> Result<Configuration<f64>> {
    Ok(Configuration::from_coords(kind, v)?)
}

fn plot(a: PlotArgs) -> Result<()> {
    let loaded = load_env(&a.env)?;
    let env = &loaded.env;
    let kind = env.config_kind();
    let mut overlays = Vec::new();
    if let Some(p) = a.padding {
        overlays.push(Overlay::Padding(p));
    }
    let mut manifest = RunManifest::new(
        "plot",
        json!({ "env": a.env, "padding": a.padding, "start": a.start, "goal": a.goal, "use_steer": a.use_steer }),
        vec![],
    );
    if let Some(d) = &a.data {
        let ds = Dataset::<f64>::load(d)?;
        let qs = ds
            .meta
            .queries
            .iter()
            .take(a.n_queries)
            .map(|r| Ok(Query::new(coords(kind, &r.start)?, coords(kind, &r.goal)?)))
            .collect::<Result<Vec<_>>>()?;
        overlays.push(Overlay::Queries(qs));
        manifest.add_input(d)?;
    }
    let query = match (&a.start, &a.goal) {
        (Some(s), Some(g)) => Some(Query::new(coords(kind, s)?, coords(kind, g)?)),
        (None, None) => None,
        _ => bail!("--start and --goal go together"),
    };
    if let Some(q) = &query {
        if a.expert {
            let expert = Expert::new(env.view(), ExpertConfig::for_kind(kind))?;
            if let Some(p) = expert.solve(q)? {
                overlays.push(Overlay::Path {
                    path: p,
                    color: "#1f78b4".into(),
                    label: "expert".into(),
                });
            } else {
                eprintln!("expert found no path");
            }
        }
        if let Some(m) = &a.model {
            let model = MlpModel::<f64>::load(m)?;
            let cfg = PlannerConfig {
                use_steer: a.use_steer,
                ..PlannerConfig::default()
            };
            let rec = plan(q, &env.view(), &model, &cfg)?;
            match rec.path {
                Some(p) => overlays.push(Overlay::Path {
                    path: p,
                    color: "#e66101".into(),
                    label: "model".into(),
                }),
                None => eprintln!("model failed: {:?}", rec.failure),
            }
            manifest.add_input(m)?;
        }
        overlays.push(Overlay::Pose {
            config: q.start.clone(),
            color: "#1b9e77".into(),
        });
        overlays.push(Overlay::Pose {
            config: q.goal.clone(),
            color: "#d95f02".into(),
        });
    } else if a.model.is_some() || a.expert {
        bail!("--model and --expert need --start and --goal");
    }
    std::fs::write(&a.out, render_svg(env, &overlays))?;
    manifest.add_output(&a.out, None)?;
    finish(manifest, &loaded, &manifest_path(&a.out))
}

fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::GenEnv(a) => gen_env(a),
        Command::Gamma(a) => gamma(a),
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Grid(a) => grid(a),
        Command::Plot(a) => plot(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
