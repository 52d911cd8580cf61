//! The experiment grid: datasets D0-D3 per environment and seed, one model
//! per dataset, and every (model, query kind, steering mode) evaluation cell.
//!
//! Datasets, models and expert cost tables are cached on disk under names
//! derived from the SHA-256 of everything that determines them, so an
//! interrupted run resumes and a repeated run reuses its artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{expert_costs, evaluate, mean_std, render_svg, test_queries, MetricRow, Overlay, QueryKind};
use crate::bundled::{self, BundledEnv};
use crate::datagen::{generate_dataset_with, Dataset, DatasetConfig, Preset};
use crate::env::{load_environment, ConfigKind, Environment};
use crate::error::{Error, Result};
use crate::expert::{Expert, ExpertConfig};
use crate::manifest::{sha256_hex, RunManifest};
use crate::planner::{plan, PlannerConfig};
use crate::pnet::{train, MlpModel, TrainConfig, TrainReport};
use crate::sampling::{Query, SamplerConfig};
use crate::seeding::derive_seed;
use crate::steering::{default_resolution, Path};

fn all_presets() -> Vec<Preset> {
    Preset::ALL.to_vec()
}

fn both_modes() -> Vec<bool> {
    vec![true, false]
}

fn default_gamma_samples() -> usize {
    20_000
}

fn default_true() -> bool {
    true
}

/// One document describing the whole experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub name: String,
    /// Bundled environment names or paths to environment files (relative to
    /// the grid file).
    pub environments: Vec<String>,
    /// Training-time obstacle padding; `None` uses the environment's default.
    #[serde(default)]
    pub padding: Option<f64>,
    pub k_train: usize,
    pub k_test: usize,
    /// Size of an extra all-trivial query set (0 disables it).
    #[serde(default)]
    pub k_trivial: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "all_presets")]
    pub presets: Vec<Preset>,
    #[serde(default = "both_modes")]
    pub steer_modes: Vec<bool>,
    /// Expert settings; `None` uses the defaults for the robot type.
    #[serde(default)]
    pub expert: Option<ExpertConfig>,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default = "default_gamma_samples")]
    pub gamma_samples: usize,
    #[serde(default)]
    pub retry_cap: Option<usize>,
    #[serde(default = "default_true")]
    pub figures: bool,
}

impl GridConfig {
    pub fn from_toml_str(text: &str, origin: &FsPath) -> Result<Self> {
        let cfg: GridConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.environments.is_empty() {
            return Err(Error::validation("environments", "at least one environment required"));
        }
        if self.k_train == 0 {
            return Err(Error::validation("k_train", "must be >= 1"));
        }
        if self.k_test == 0 {
            return Err(Error::validation("k_test", "must be >= 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::validation("seeds", "at least one seed required"));
        }
        if self.presets.is_empty() {
            return Err(Error::validation("presets", "at least one preset required"));
        }
        if self.steer_modes.is_empty() {
            return Err(Error::validation("steer_modes", "at least one mode required"));
        }
        if let Some(p) = self.padding {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::validation("padding", "must be finite and >= 0"));
            }
        }
        self.sampler.validate()?;
        self.train.validate()?;
        self.planner.validate()?;
        if !self.steer_modes.iter().all(|&s| s) {
            PlannerConfig {
                use_steer: false,
                ..self.planner.clone()
            }
            .validate()?;
        }
        Ok(())
    }

    fn query_kinds(&self) -> Vec<QueryKind> {
        let mut kinds = vec![QueryKind::Uniform, QueryKind::NonTrivial];
        if self.k_trivial > 0 {
            kinds.push(QueryKind::Trivial);
        }
        kinds
    }

    fn query_count(&self, kind: QueryKind) -> usize {
        match kind {
            QueryKind::Trivial => self.k_trivial,
            _ => self.k_test,
        }
    }
}

fn default_padding(kind: ConfigKind) -> f64 {
    match kind {
        ConfigKind::Point2 => 0.8,
        ConfigKind::PoseSe2 => 0.4,
        ConfigKind::Joints(_) => 0.1,
    }
}

struct ResolvedEnv {
    env: Environment<f64>,
    text: String,
    padding: f64,
    bundled: Option<&'static BundledEnv>,
}

fn resolve_env(spec: &str, base: &FsPath, padding: Option<f64>) -> Result<ResolvedEnv> {
    if let Some(b) = bundled::find(spec) {
        return Ok(ResolvedEnv {
            env: b.environment()?,
            text: b.toml.to_string(),
            padding: padding.unwrap_or(b.padding),
            bundled: Some(b),
        });
    }
    let path = base.join(spec);
    let env: Environment<f64> = load_environment(&path)?;
    let kind = env.config_kind();
    Ok(ResolvedEnv {
        text: std::fs::read_to_string(&path)?,
        env,
        padding: padding.unwrap_or(default_padding(kind)),
        bundled: None,
    })
}

/// Identifies one evaluation cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub env: String,
    pub preset: Preset,
    pub steer: bool,
    pub kind: QueryKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub env: String,
    pub seed: u64,
    pub preset: Preset,
    pub steer: bool,
    pub metrics: MetricRow,
}

impl GridRow {
    pub fn key(&self) -> CellKey {
        CellKey {
            env: self.env.clone(),
            preset: self.preset,
            steer: self.steer,
            kind: self.metrics.query_kind,
        }
    }
}

/// Cached artifacts of one (environment, seed, preset) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub env: String,
    pub seed: u64,
    pub preset: Preset,
    pub dataset: PathBuf,
    pub model: PathBuf,
}

/// Showcase query outcome for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShowcaseRow {
    pub env: String,
    pub seed: u64,
    pub preset: Preset,
    pub steer: bool,
    pub success: bool,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub rows: Vec<GridRow>,
    pub showcase: Vec<ShowcaseRow>,
    /// Non-triviality estimates per environment, one per seed.
    pub gamma: BTreeMap<String, Vec<f64>>,
    pub artifacts: Vec<Artifacts>,
    pub report: String,
    pub out_dir: PathBuf,
}

impl GridOutcome {
    /// Success ratios of one cell across seeds.
    pub fn success_ratios(&self, env: &str, preset: Preset, steer: bool, kind: QueryKind) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.env == env && r.preset == preset && r.steer == steer && r.metrics.query_kind == kind)
            .map(|r| r.metrics.success_ratio)
            .collect()
    }
}

fn cache_key(value: &serde_json::Value) -> String {
    sha256_hex(value.to_string().as_bytes())
}

fn model_label(p: Preset) -> String {
    format!("PNet{}", p.index())
}

struct Timing {
    lines: Vec<String>,
}

impl Timing {
    fn add(&mut self, what: &str, secs: f64) {
        self.lines.push(format!("{what},{secs:.6}"));
    }
}

/// Runs the grid, writing `report.txt`, `metrics.csv`, `timing.csv`,
/// `figures/` and `manifest.json` into `out_dir`. Relative environment paths
/// resolve against `base_dir`; `cache_dir` defaults to `out_dir/cache`.
pub fn run_grid(
    cfg: &GridConfig,
    base_dir: &FsPath,
    out_dir: &FsPath,
    cache_dir: Option<&FsPath>,
) -> Result<GridOutcome> {
    cfg.validate()?;
    let cache = cache_dir.map_or_else(|| out_dir.join("cache"), FsPath::to_path_buf);
    for sub in ["datasets", "models", "expert"] {
        std::fs::create_dir_all(cache.join(sub))?;
    }
    std::fs::create_dir_all(out_dir)?;
    let mut timing = Timing {
        lines: vec!["stage,seconds".into()],
    };

    let mut rows = Vec::new();
    let mut showcase = Vec::new();
    let mut gamma: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut artifacts = Vec::new();
    let mut dataset_notes: DatasetNotes = BTreeMap::new();
    let mut figure_files = Vec::new();

    for spec in &cfg.environments {
        let resolved = resolve_env(spec, base_dir, cfg.padding)?;
        let env = &resolved.env;
        let kind = env.config_kind();
        let expert_cfg = cfg.expert.clone().unwrap_or_else(|| ExpertConfig::for_kind(kind));
        let padded = env.inflated(resolved.padding);
        let view = env.view();
        let resolution: f64 = cfg
            .sampler
            .resolution
            .unwrap_or_else(|| default_resolution(kind));

        let train_expert = Expert::new(padded, expert_cfg.clone())?.with_cache();
        let eval_expert = Expert::new(view, expert_cfg.clone())?.with_cache();

        for (si, &seed) in cfg.seeds.iter().enumerate() {
            let mut models: Vec<(Preset, MlpModel<f64>)> = Vec::new();
            let mut datasets: Vec<(Preset, Dataset<f64>)> = Vec::new();
            for &preset in &cfg.presets {
                let mut dcfg = DatasetConfig::new(kind, preset, cfg.k_train, resolved.padding, seed);
                dcfg.expert = expert_cfg.clone();
                dcfg.sampler = cfg.sampler.clone();
                dcfg.retry_cap = cfg.retry_cap;
                dcfg.gamma_samples = cfg.gamma_samples;
                let ds_key = cache_key(&json!({
                    "artifact": "dataset",
                    "tool": crate::TOOL_VERSION,
                    "env": resolved.text,
                    "config": dcfg,
                }));
                let ds_path = cache.join("datasets").join(format!("{ds_key}.bin"));
                let t0 = Instant::now();
                let dataset = if ds_path.exists() {
                    Dataset::<f64>::load(&ds_path)?
                } else {
                    let ds = generate_dataset_with(env, &dcfg, &train_expert)?;
                    ds.save(&ds_path)?;
                    ds
                };
                timing.add(&format!("{}/{seed}/{}/datagen", env.name, preset.label()), t0.elapsed().as_secs_f64());
                info!(
                    "{} seed {seed} {}: {} samples",
                    env.name,
                    preset.label(),
                    dataset.len()
                );

                let tcfg = TrainConfig {
                    seed: derive_seed(cfg.train.seed, seed),
                    ..cfg.train.clone()
                };
                let model_key = cache_key(&json!({
                    "artifact": "model",
                    "tool": crate::TOOL_VERSION,
                    "dataset": ds_key,
                    "train": tcfg,
                }));
                let model_path = cache.join("models").join(format!("{model_key}.bin"));
                let report_path = cache.join("models").join(format!("{model_key}.train.json"));
                let t0 = Instant::now();
                let model = if model_path.exists() {
                    MlpModel::<f64>::load(&model_path)?
                } else {
                    let (m, rep): (MlpModel<f64>, TrainReport) = train(&dataset, &tcfg)?;
                    m.save(&model_path)?;
                    std::fs::write(&report_path, serde_json::to_string_pretty(&rep)? + "\n")?;
                    m
                };
                timing.add(&format!("{}/{seed}/{}/train", env.name, preset.label()), t0.elapsed().as_secs_f64());

                if preset == cfg.presets[0] {
                    gamma.entry(env.name.clone()).or_default().push(dataset.meta.gamma.gamma);
                }
                dataset_notes.entry((env.name.clone(), preset)).or_default().push((
                    dataset.meta.n_samples,
                    dataset.meta.expert_failures,
                    dataset.meta.fallbacks,
                    dataset.meta.queries.iter().filter(|q| q.non_trivial).count(),
                ));
                artifacts.push(Artifacts {
                    env: env.name.clone(),
                    seed,
                    preset,
                    dataset: ds_path,
                    model: model_path,
                });
                models.push((preset, model));
                datasets.push((preset, dataset));
            }

            let mut first_nt: Option<Query<f64>> = None;
            for qk in cfg.query_kinds() {
                let n = cfg.query_count(qk);
                let queries = test_queries(&view, qk, n, seed, resolution)?;
                if qk == QueryKind::NonTrivial {
                    first_nt = queries.first().cloned();
                }
                let costs_key = cache_key(&json!({
                    "artifact": "expert_costs",
                    "tool": crate::TOOL_VERSION,
                    "env": resolved.text,
                    "expert": expert_cfg,
                    "kind": qk,
                    "n": n,
                    "seed": seed,
                    "resolution": resolution,
                }));
                let costs_path = cache.join("expert").join(format!("{costs_key}.json"));
                let t0 = Instant::now();
                let costs: Vec<Option<f64>> = if costs_path.exists() {
                    serde_json::from_str(&std::fs::read_to_string(&costs_path)?)?
                } else {
                    let c = expert_costs(&queries, &eval_expert)?;
                    std::fs::write(&costs_path, serde_json::to_string(&c)? + "\n")?;
                    c
                };
                timing.add(&format!("{}/{seed}/{}/expert", env.name, qk.label()), t0.elapsed().as_secs_f64());
                for &steer in &cfg.steer_modes {
                    let pcfg = PlannerConfig {
                        use_steer: steer,
                        resolution: Some(resolution),
                        ..cfg.planner.clone()
                    };
                    for (preset, model) in &models {
                        let (row, _) =
                            evaluate(&model_label(*preset), qk, model, &view, &queries, &costs, &pcfg)?;
                        timing.add(
                            &format!(
                                "{}/{seed}/{}/{}/{}/mean_plan",
                                env.name,
                                preset.label(),
                                if steer { "steer" } else { "no_steer" },
                                qk.label()
                            ),
                            row.mean_wall_time_s,
                        );
                        rows.push(GridRow {
                            env: env.name.clone(),
                            seed,
                            preset: *preset,
                            steer,
                            metrics: row,
                        });
                    }
                }
            }

            if let Some(b) = resolved.bundled {
                let q = b.showcase_query::<f64>()?;
                for &steer in &cfg.steer_modes {
                    let pcfg = PlannerConfig {
                        use_steer: steer,
                        resolution: Some(resolution),
                        ..cfg.planner.clone()
                    };
                    for (preset, model) in &models {
                        let r = plan(&q, &view, model, &pcfg)?;
                        showcase.push(ShowcaseRow {
                            env: env.name.clone(),
                            seed,
                            preset: *preset,
                            steer,
                            success: r.success(),
                        });
                    }
                }
            }

            if cfg.figures && si == 0 {
                figure_files.extend(write_figures(
                    out_dir,
                    env,
                    resolved.padding,
                    &datasets,
                    &models,
                    first_nt.as_ref(),
                    &eval_expert,
                    &cfg.planner,
                    resolution,
                )?);
            }
        }
    }

    let report = render_report(cfg, &rows, &showcase, &gamma, &dataset_notes);
    let report_path = out_dir.join("report.txt");
    std::fs::write(&report_path, &report)?;
    let csv_path = out_dir.join("metrics.csv");
    std::fs::write(&csv_path, render_csv(&rows))?;
    let timing_path = out_dir.join("timing.csv");
    std::fs::write(&timing_path, timing.lines.join("\n") + "\n")?;

    let mut manifest = RunManifest::new("grid", serde_json::to_value(cfg)?, cfg.seeds.clone());
    let mut outputs = vec![report_path, csv_path];
    outputs.extend(figure_files);
    for a in &artifacts {
        outputs.push(a.dataset.clone());
        outputs.push(crate::datagen::meta_path(&a.dataset));
        outputs.push(a.model.clone());
    }
    for p in &outputs {
        let base = if p.starts_with(out_dir) { out_dir } else { cache.as_path() };
        manifest.add_output(p, Some(base))?;
    }
    manifest.volatile_outputs.push("timing.csv".into());
    manifest.write(&out_dir.join("manifest.json"))?;

    Ok(GridOutcome {
        rows,
        showcase,
        gamma,
        artifacts,
        report,
        out_dir: out_dir.to_path_buf(),
    })
}

#[allow(clippy::too_many_arguments)]
fn write_figures(
    out_dir: &FsPath,
    env: &Environment<f64>,
    padding: f64,
    datasets: &[(Preset, Dataset<f64>)],
    models: &[(Preset, MlpModel<f64>)],
    first_nt: Option<&Query<f64>>,
    expert: &Expert<'_, f64>,
    planner: &PlannerConfig,
    resolution: f64,
) -> Result<Vec<PathBuf>> {
    let dir = out_dir.join("figures");
    std::fs::create_dir_all(&dir)?;
    let kind = env.config_kind();
    let mut files = Vec::new();
    for (preset, ds) in datasets {
        let queries: Vec<Query<f64>> = ds
            .meta
            .queries
            .iter()
            .take(150)
            .map(|r| {
                Ok(Query::new(
                    crate::env::Configuration::from_coords(kind, &r.start)?,
                    crate::env::Configuration::from_coords(kind, &r.goal)?,
                ))
            })
            .collect::<Result<_>>()?;
        let svg = render_svg(env, &[Overlay::Padding(padding), Overlay::Queries(queries)]);
        let path = dir.join(format!("{}_{}_queries.svg", env.name, preset.label()));
        std::fs::write(&path, svg)?;
        files.push(path);
    }
    if let Some(q) = first_nt {
        let mut overlays = vec![Overlay::Padding(padding)];
        if let Some(p) = expert.solve(q)? {
            overlays.push(Overlay::Path {
                path: p,
                color: "#1f78b4".into(),
                label: "expert".into(),
            });
        }
        let colors = ["#e66101", "#fdb863", "#b2abd2", "#5e3c99"];
        let pcfg = PlannerConfig {
            resolution: Some(resolution),
            ..planner.clone()
        };
        for (preset, model) in models {
            let r = plan(q, &env.view(), model, &pcfg)?;
            if let Some(p) = r.path {
                overlays.push(Overlay::Path {
                    path: p as Path<f64>,
                    color: colors[preset.index()].into(),
                    label: model_label(*preset),
                });
            }
        }
        let path = dir.join(format!("{}_paths.svg", env.name));
        std::fs::write(&path, render_svg(env, &overlays))?;
        files.push(path);
    }
    Ok(files)
}

fn fmt_ms(values: &[f64]) -> String {
    if values.is_empty() {
        return "-".into();
    }
    let (m, s) = mean_std(values);
    format!("{m:.3} ± {s:.3}")
}

fn table(header: &[String], body: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in body {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        parts.join(" | ").trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for row in body {
        out.push_str(&line(row));
    }
    out
}

/// Per (environment, preset): samples, expert failures, fallbacks and non-trivial queries, one entry per seed.
type DatasetNotes = BTreeMap<(String, Preset), Vec<(usize, usize, usize, usize)>>;

fn render_report(
    cfg: &GridConfig,
    rows: &[GridRow],
    showcase: &[ShowcaseRow],
    gamma: &BTreeMap<String, Vec<f64>>,
    notes: &DatasetNotes,
) -> String {
    let mut out = String::new();
    let seeds: Vec<String> = cfg.seeds.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "Experiment grid: {}", cfg.name);
    let _ = writeln!(
        out,
        "K_train = {}, K_test = {}, seeds = [{}]",
        cfg.k_train,
        cfg.k_test,
        seeds.join(", ")
    );
    let _ = writeln!(
        out,
        "Entries are mean ± sample standard deviation over seeds (the spread is added here; single runs have none)."
    );
    let _ = writeln!(
        out,
        "Cost ratio = neural cost / expert cost, averaged over queries solved by both.\n"
    );

    let mut by_cell: BTreeMap<CellKey, Vec<&MetricRow>> = BTreeMap::new();
    for r in rows {
        by_cell.entry(r.key()).or_default().push(&r.metrics);
    }
    let kinds = cfg.query_kinds();

    let mut env_names: Vec<String> = Vec::new();
    for r in rows {
        if !env_names.contains(&r.env) {
            env_names.push(r.env.clone());
        }
    }
    for env in &env_names {
        let g = gamma.get(env).map(|v| fmt_ms(v)).unwrap_or_else(|| "-".into());
        let _ = writeln!(out, "== {env} (gamma_nt = {g}) ==\n");

        let header: Vec<String> = ["dataset", "p_nt", "prune", "samples", "non-trivial queries", "expert failures", "fallbacks"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let body: Vec<Vec<String>> = cfg
            .presets
            .iter()
            .map(|&p| {
                let (p_nt, prune) = p.params();
                let n = notes.get(&(env.clone(), p)).cloned().unwrap_or_default();
                let col = |f: fn(&(usize, usize, usize, usize)) -> usize| {
                    let v: Vec<f64> = n.iter().map(|t| f(t) as f64).collect();
                    let (m, s) = mean_std(&v);
                    format!("{m:.1} ± {s:.1}")
                };
                vec![
                    p.label().to_string(),
                    format!("{p_nt}"),
                    prune.to_string(),
                    col(|t| t.0),
                    col(|t| t.3),
                    col(|t| t.1),
                    col(|t| t.2),
                ]
            })
            .collect();
        out.push_str(&table(&header, &body));
        out.push('\n');

        for &steer in &cfg.steer_modes {
            let _ = writeln!(
                out,
                "{}",
                if steer {
                    "Steering on".to_string()
                } else {
                    format!("Steering off (goal tolerance {})", cfg.planner.delta)
                }
            );
            let mut header = vec!["model".to_string()];
            for k in &kinds {
                header.push(format!("{} success ratio", k.label()));
                header.push(format!("{} cost ratio", k.label()));
            }
            let body: Vec<Vec<String>> = cfg
                .presets
                .iter()
                .map(|&p| {
                    let mut cells = vec![model_label(p)];
                    for &k in &kinds {
                        let key = CellKey {
                            env: env.clone(),
                            preset: p,
                            steer,
                            kind: k,
                        };
                        let cell = by_cell.get(&key).cloned().unwrap_or_default();
                        let succ: Vec<f64> = cell.iter().map(|m| m.success_ratio).collect();
                        let cost: Vec<f64> = cell.iter().filter_map(|m| m.cost_ratio).collect();
                        cells.push(fmt_ms(&succ));
                        cells.push(fmt_ms(&cost));
                    }
                    cells
                })
                .collect();
            out.push_str(&table(&header, &body));
            out.push('\n');
        }

        let env_showcase: Vec<&ShowcaseRow> = showcase.iter().filter(|s| &s.env == env).collect();
        if !env_showcase.is_empty() {
            let _ = writeln!(out, "Showcase trivial query (seeds solved / seeds run)");
            let mut header = vec!["model".to_string()];
            for &steer in &cfg.steer_modes {
                header.push(if steer { "steering on".into() } else { "steering off".into() });
            }
            let body: Vec<Vec<String>> = cfg
                .presets
                .iter()
                .map(|&p| {
                    let mut cells = vec![model_label(p)];
                    for &steer in &cfg.steer_modes {
                        let hits: Vec<bool> = env_showcase
                            .iter()
                            .filter(|s| s.preset == p && s.steer == steer)
                            .map(|s| s.success)
                            .collect();
                        cells.push(format!("{}/{}", hits.iter().filter(|&&h| h).count(), hits.len()));
                    }
                    cells
                })
                .collect();
            out.push_str(&table(&header, &body));
            out.push('\n');
        }
    }
    out
}

fn render_csv(rows: &[GridRow]) -> String {
    let mut out = String::from(
        "env,seed,model,dataset,steer,query_kind,success_ratio,cost_ratio,n_success,n_total,n_cost,expert_failures\n",
    );
    for r in rows {
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.env,
            r.seed,
            m.model,
            r.preset.label(),
            r.steer,
            m.query_kind.label(),
            m.success_ratio,
            m.cost_ratio.map_or_else(String::new, |c| c.to_string()),
            m.n_success,
            m.n_total,
            m.n_cost,
            m.expert_failures
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_alignment() {
        let t = table(
            &["a".into(), "long header".into()],
            &[vec!["xyz".into(), "1".into()]],
        );
        assert_eq!(t, "a   | long header\n----+------------\nxyz | 1\n");
    }

    #[test]
    fn grid_config_defaults_and_validation() {
        let text = r#"
name = "t"
environments = ["wall"]
k_train = 5
k_test = 4
seeds = [1]
"#;
        let cfg = GridConfig::from_toml_str(text, FsPath::new("t.toml")).unwrap();
        assert_eq!(cfg.presets, Preset::ALL.to_vec());
        assert_eq!(cfg.steer_modes, vec![true, false]);
        let bad = text.replace("k_test = 4", "k_test = 0");
        assert!(GridConfig::from_toml_str(&bad, FsPath::new("t.toml")).is_err());
        let unknown = format!("{text}\nbogus = 1\n");
        assert!(GridConfig::from_toml_str(&unknown, FsPath::new("t.toml")).is_err());
    }
}
