//! Dataset generation: biased query sampling, expert solving and sample
//! inclusion with optional pruning of trivial segments.
//!
//! On disk a dataset is a flat little-endian record file plus a JSON sidecar
//! (`<file>.meta.json`) holding the generating configuration, the environment,
//! per-query records and summary counters.
//!
//! Record file layout:
//!
//! | field        | type            |
//! |--------------|-----------------|
//! | magic        | `b"NTQDATA\0"`  |
//! | version      | u32 (= 1)       |
//! | kind tag     | u8              |
//! | dim          | u32             |
//! | count        | u64             |
//! | records      | `count` x (query_id u64, flags u8, 3 * dim f64) |
//!
//! Flags: bit 0 = the query was non-trivial, bit 1 = the sample's current
//! state does not steer to the goal. Coordinates are current, goal, next.

use std::io::{Read, Write};
use std::path::{Path as FsPath, PathBuf};

use log::{debug, info};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::InflatedView;
use crate::env::{ConfigKind, Configuration, Environment};
use crate::error::{Error, Result};
use crate::expert::{Expert, ExpertConfig};
use crate::sampling::{estimate_gamma_nt, non_trivial_query, uniform_query, GammaEstimate, SamplerConfig};
use crate::scalar::Real;
use crate::seeding::{derive_seed, streams, stream_rng};
use crate::steering::{default_resolution, steer_to, Path};

const DATA_MAGIC: &[u8; 8] = b"NTQDATA\0";
const DATA_VERSION: u32 = 1;

/// One supervised example: `(current, goal) -> next`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSample<T> {
    pub current: Configuration<T>,
    pub goal: Configuration<T>,
    pub next: Configuration<T>,
    pub query_id: u64,
    pub query_non_trivial: bool,
    /// `current` does not steer to `goal`; always true for pruned datasets.
    pub segment_non_trivial: bool,
}

/// The four dataset settings compared by the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Preset {
    D0,
    D1,
    D2,
    D3,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::D0, Preset::D1, Preset::D2, Preset::D3];

    /// `(p_nt, prune)`.
    pub fn params(self) -> (f64, bool) {
        match self {
            Preset::D0 => (0.0, false),
            Preset::D1 => (0.5, false),
            Preset::D2 => (1.0, false),
            Preset::D3 => (1.0, true),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Preset::D0 => "D0",
            Preset::D1 => "D1",
            Preset::D2 => "D2",
            Preset::D3 => "D3",
        }
    }
}

fn default_gamma_samples() -> usize {
    20_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub p_nt: f64,
    pub prune: bool,
    pub k_train: usize,
    pub padding: f64,
    pub expert: ExpertConfig,
    pub sampler: SamplerConfig,
    pub seed: u64,
    /// Maximum number of query draws (solved or not); `None` = 20 x `k_train`.
    #[serde(default)]
    pub retry_cap: Option<usize>,
    /// Uniform queries used for the recorded non-triviality estimate.
    #[serde(default = "default_gamma_samples")]
    pub gamma_samples: usize,
}

impl DatasetConfig {
    pub fn new(kind: ConfigKind, preset: Preset, k_train: usize, padding: f64, seed: u64) -> Self {
        let (p_nt, prune) = preset.params();
        DatasetConfig {
            p_nt,
            prune,
            k_train,
            padding,
            expert: ExpertConfig::for_kind(kind),
            sampler: SamplerConfig::default(),
            seed,
            retry_cap: None,
            gamma_samples: default_gamma_samples(),
        }
    }

    pub fn validate(&self, kind: ConfigKind) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_nt) {
            return Err(Error::validation("p_nt", "must lie in [0, 1]"));
        }
        if self.k_train == 0 {
            return Err(Error::validation("k_train", "must be >= 1"));
        }
        if !(self.padding >= 0.0 && self.padding.is_finite()) {
            return Err(Error::validation("padding", "must be finite and >= 0"));
        }
        if self.gamma_samples == 0 {
            return Err(Error::validation("gamma_samples", "must be >= 1"));
        }
        self.sampler.validate()?;
        self.expert.validate(kind)
    }

    pub fn resolution<T: Real>(&self, kind: ConfigKind) -> T {
        self.sampler
            .resolution
            .map(T::lit)
            .unwrap_or_else(|| default_resolution(kind))
    }

    fn retry_cap(&self) -> usize {
        self.retry_cap.unwrap_or(self.k_train.saturating_mul(20))
    }
}

/// Audit record for one solved query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub id: u64,
    /// Index of the draw that produced this query (failed draws are skipped).
    pub draw: u64,
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
    /// The non-trivial sampler was selected for this draw.
    pub nt_sampler: bool,
    /// Start does not steer to goal.
    pub non_trivial: bool,
    /// The non-trivial sampler gave up and returned a trivial query.
    pub fallback: bool,
    pub path_len: usize,
    pub expert_cost: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub tool_version: String,
    pub environment: Environment<f64>,
    pub config: DatasetConfig,
    pub resolution: f64,
    pub gamma: GammaEstimate,
    pub n_queries: usize,
    pub n_samples: usize,
    pub draws: u64,
    pub expert_failures: usize,
    pub fallbacks: usize,
    pub queries: Vec<QueryRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub kind: ConfigKind,
    pub samples: Vec<DataSample<T>>,
    pub meta: DatasetMeta,
}

/// Appends the samples of `path` to `samples`.
///
/// Sample `i` pairs `(path[i], path[last])` with label `path[i + 1]`. With
/// `prune`, samples whose current state already steers to the final goal are
/// skipped.
#[allow(clippy::too_many_arguments)]
pub fn include_data<T: Real>(
    samples: &mut Vec<DataSample<T>>,
    path: &Path<T>,
    prune: bool,
    view: &InflatedView<'_, T>,
    resolution: T,
    query_id: u64,
    query_non_trivial: bool,
) -> usize {
    let before = samples.len();
    let end = path.last();
    for w in path.waypoints.windows(2) {
        let non_trivial = !steer_to(&w[0], end, view, resolution);
        if prune && !non_trivial {
            continue;
        }
        samples.push(DataSample {
            current: w[0].clone(),
            goal: end.clone(),
            next: w[1].clone(),
            query_id,
            query_non_trivial,
            segment_non_trivial: non_trivial,
        });
    }
    samples.len() - before
}

struct Draw<T> {
    index: u64,
    start: Configuration<T>,
    goal: Configuration<T>,
    nt_sampler: bool,
    non_trivial: bool,
    fallback: bool,
    path: Option<Path<T>>,
}

fn run_draw<T: Real>(
    index: u64,
    cfg: &DatasetConfig,
    expert: &Expert<'_, T>,
    resolution: T,
) -> Result<Draw<T>> {
    let view = expert.view();
    let mut rng = stream_rng(derive_seed(cfg.seed, streams::DATAGEN), index);
    let u: f64 = rng.gen();
    let nt_sampler = u < cfg.p_nt;
    let (query, non_trivial, fallback) = if nt_sampler {
        let s = non_trivial_query(view, cfg.sampler.n_max, resolution, &mut rng)?;
        let fallback = !s.non_trivial;
        (s.query, s.non_trivial, fallback)
    } else {
        let q = uniform_query(view, &mut rng)?;
        let nt = !q.is_trivial(view, resolution);
        (q, nt, false)
    };
    let path = expert.solve(&query)?;
    Ok(Draw {
        index,
        start: query.start,
        goal: query.goal,
        nt_sampler,
        non_trivial,
        fallback,
        path,
    })
}

/// Draws processed per parallel batch.
const DRAW_BATCH: u64 = 32;

/// Generates a dataset with a fresh expert for `env`.
pub fn generate_dataset<T: Real>(env: &Environment<T>, cfg: &DatasetConfig) -> Result<Dataset<T>> {
    cfg.validate(env.config_kind())?;
    let view = env.inflated(T::lit(cfg.padding));
    let expert = Expert::new(view, cfg.expert.clone())?;
    generate_dataset_with(env, cfg, &expert)
}

/// Generates a dataset using an existing expert, which must have been built
/// for `env` with `cfg.padding` and `cfg.expert`.
///
/// Each draw uses its own random stream, so the output does not depend on how
/// draws are scheduled across worker threads. Draws the expert cannot solve do
/// not count toward `k_train`.
pub fn generate_dataset_with<T: Real>(
    env: &Environment<T>,
    cfg: &DatasetConfig,
    expert: &Expert<'_, T>,
) -> Result<Dataset<T>> {
    let kind = env.config_kind();
    cfg.validate(kind)?;
    if expert.config() != &cfg.expert || expert.view().padding() != T::lit(cfg.padding) {
        return Err(Error::InvalidInput(
            "expert was built for a different padding or configuration".into(),
        ));
    }
    let view = *expert.view();
    let resolution: T = cfg.resolution(kind);
    let cap = cfg.retry_cap() as u64;

    let mut samples = Vec::new();
    let mut queries = Vec::with_capacity(cfg.k_train);
    let mut failures = 0usize;
    let mut fallbacks = 0usize;
    let mut next_draw = 0u64;

    while queries.len() < cfg.k_train {
        if next_draw >= cap {
            return Err(Error::ExpertExhausted {
                cap: cap as usize,
                solved: queries.len(),
            });
        }
        let remaining = (cfg.k_train - queries.len()) as u64;
        let batch = remaining.min(DRAW_BATCH).min(cap - next_draw);
        let draws: Result<Vec<Draw<T>>> = (next_draw..next_draw + batch)
            .into_par_iter()
            .map(|d| run_draw(d, cfg, expert, resolution))
            .collect();
        next_draw += batch;
        for draw in draws? {
            if queries.len() == cfg.k_train {
                break;
            }
            let Some(path) = draw.path else {
                failures += 1;
                debug!("expert failed on draw {}", draw.index);
                continue;
            };
            if draw.fallback {
                fallbacks += 1;
            }
            let id = queries.len() as u64;
            let n = include_data(
                &mut samples,
                &path,
                cfg.prune,
                &view,
                resolution,
                id,
                draw.non_trivial,
            );
            queries.push(QueryRecord {
                id,
                draw: draw.index,
                start: draw.start.coords().iter().map(|v| v.as_f64()).collect(),
                goal: draw.goal.coords().iter().map(|v| v.as_f64()).collect(),
                nt_sampler: draw.nt_sampler,
                non_trivial: draw.non_trivial,
                fallback: draw.fallback,
                path_len: path.len(),
                expert_cost: path.cost(env).as_f64(),
                n_samples: n,
            });
        }
    }

    let gamma = estimate_gamma_nt(
        &view,
        cfg.gamma_samples,
        resolution,
        derive_seed(cfg.seed, streams::GAMMA),
    )?;
    info!(
        "{}: {} queries, {} samples, {} expert failures, {} fallbacks, gamma_nt {:.3}",
        env.name,
        queries.len(),
        samples.len(),
        failures,
        fallbacks,
        gamma.gamma
    );
    let meta = DatasetMeta {
        tool_version: crate::TOOL_VERSION.to_string(),
        environment: cast_env(env),
        config: cfg.clone(),
        resolution: resolution.as_f64(),
        gamma,
        n_queries: queries.len(),
        n_samples: samples.len(),
        draws: next_draw,
        expert_failures: failures,
        fallbacks,
        queries,
    };
    Ok(Dataset {
        kind,
        samples,
        meta,
    })
}

pub(crate) fn cast_env<T: Real, U: Real>(env: &Environment<T>) -> Environment<U> {
    let text = env.to_toml_string();
    toml::from_str(&text).expect("environment round-trips through TOML")
}

/// Result of re-checking a dataset's pruning guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PurityReport {
    pub n_samples: usize,
    /// Samples whose current state steers to the goal.
    pub trivial_samples: usize,
    /// Samples whose stored flag disagrees with the re-check.
    pub flag_mismatches: usize,
}

/// Re-checks `steer_to(current, goal)` for every sample under the padding and
/// resolution recorded in the metadata.
pub fn audit_dataset<T: Real>(dataset: &Dataset<T>) -> PurityReport {
    let env: Environment<T> = cast_env(&dataset.meta.environment);
    let view = env.inflated(T::lit(dataset.meta.config.padding));
    let resolution = T::lit(dataset.meta.resolution);
    let (trivial, mismatched) = dataset
        .samples
        .par_iter()
        .map(|s| {
            let free = steer_to(&s.current, &s.goal, &view, resolution);
            (usize::from(free), usize::from(free == s.segment_non_trivial))
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    PurityReport {
        n_samples: dataset.samples.len(),
        trivial_samples: trivial,
        flag_mismatches: mismatched,
    }
}

pub fn meta_path(path: &FsPath) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

impl<T: Real> Dataset<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Record file bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let dim = self.kind.dim();
        let mut out = Vec::with_capacity(32 + self.samples.len() * (9 + 24 * dim));
        out.extend_from_slice(DATA_MAGIC);
        out.extend_from_slice(&DATA_VERSION.to_le_bytes());
        let (tag, d) = self.kind.tag();
        out.push(tag);
        out.extend_from_slice(&d.to_le_bytes());
        out.extend_from_slice(&(self.samples.len() as u64).to_le_bytes());
        for s in &self.samples {
            out.extend_from_slice(&s.query_id.to_le_bytes());
            out.push(u8::from(s.query_non_trivial) | (u8::from(s.segment_non_trivial) << 1));
            for c in [&s.current, &s.goal, &s.next] {
                for v in c.coords() {
                    out.extend_from_slice(&v.as_f64().to_le_bytes());
                }
            }
        }
        out
    }

    pub fn meta_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta).expect("metadata serializes") + "\n"
    }

    /// Writes the record file and its metadata sidecar.
    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<()> {
        let path = path.as_ref();
        std::fs::File::create(path)?.write_all(&self.to_bytes())?;
        std::fs::write(meta_path(path), self.meta_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let meta: DatasetMeta = serde_json::from_str(&std::fs::read_to_string(meta_path(path))?)?;
        let (kind, samples) = parse_records(&bytes)?;
        if samples.len() != meta.n_samples {
            return Err(Error::format(
                "dataset",
                format!("{} records but metadata lists {}", samples.len(), meta.n_samples),
            ));
        }
        Ok(Dataset {
            kind,
            samples,
            meta,
        })
    }

    /// Delimited text export for inspection.
    pub fn to_csv(&self) -> String {
        let dim = self.kind.dim();
        let mut out = String::from("query_id,query_non_trivial,segment_non_trivial");
        for part in ["current", "goal", "next"] {
            for i in 0..dim {
                out.push_str(&format!(",{part}_{i}"));
            }
        }
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{}",
                s.query_id,
                u8::from(s.query_non_trivial),
                u8::from(s.segment_non_trivial)
            ));
            for c in [&s.current, &s.goal, &s.next] {
                for v in c.coords() {
                    out.push_str(&format!(",{}", v.as_f64()));
                }
            }
            out.push('\n');
        }
        out
    }
}

struct Reader<'b> {
    bytes: &'b [u8],
    pos: usize,
}

impl<'b> Reader<'b> {
    fn take(&mut self, n: usize) -> Result<&'b [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::format("dataset", "unexpected end of file"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

fn parse_records<T: Real>(bytes: &[u8]) -> Result<(ConfigKind, Vec<DataSample<T>>)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != DATA_MAGIC {
        return Err(Error::format("dataset", "bad magic"));
    }
    let version = r.u32()?;
    if version != DATA_VERSION {
        return Err(Error::format("dataset", format!("unsupported version {version}")));
    }
    let tag = r.u8()?;
    let dim = r.u32()?;
    let kind = ConfigKind::from_tag(tag, dim)
        .ok_or_else(|| Error::format("dataset", format!("unknown kind tag {tag}/{dim}")))?;
    let count = r.u64()? as usize;
    let mut samples = Vec::with_capacity(count.min(1 << 24));
    let mut buf = vec![T::zero(); kind.dim()];
    for _ in 0..count {
        let query_id = r.u64()?;
        let flags = r.u8()?;
        let mut configs = Vec::with_capacity(3);
        for _ in 0..3 {
            for v in buf.iter_mut() {
                *v = T::lit(r.f64()?);
            }
            configs.push(Configuration::from_coords(kind, &buf)?);
        }
        let next = configs.pop().expect("three configs");
        let goal = configs.pop().expect("three configs");
        let current = configs.pop().expect("three configs");
        samples.push(DataSample {
            current,
            goal,
            next,
            query_id,
            query_non_trivial: flags & 1 != 0,
            segment_non_trivial: flags & 2 != 0,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::format("dataset", "trailing bytes after records"));
    }
    Ok((kind, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Obstacle, RobotModel, Workspace};

    fn wall() -> Environment<f64> {
        Environment::new(
            "wall",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            vec![Obstacle::from_bounds(9.0, 11.0, 0.0, 15.0)],
        )
    }

    fn p(x: f64, y: f64) -> Configuration<f64> {
        Configuration::point(x, y)
    }

    #[test]
    fn include_data_examples() {
        let env = wall();
        let v = env.view();
        let a = p(2.0, 2.0);
        let b = p(12.0, 16.0);
        let g = p(18.0, 2.0);
        assert!(!steer_to(&a, &g, &v, 0.05) && steer_to(&b, &g, &v, 0.05));
        let path = Path::new(vec![a.clone(), b.clone(), g.clone()]).unwrap();

        let mut pruned = Vec::new();
        assert_eq!(include_data(&mut pruned, &path, true, &v, 0.05, 0, true), 1);
        assert_eq!((&pruned[0].current, &pruned[0].goal, &pruned[0].next), (&a, &g, &b));

        let mut full = Vec::new();
        assert_eq!(include_data(&mut full, &path, false, &v, 0.05, 0, true), 2);
        assert_eq!((&full[1].current, &full[1].goal, &full[1].next), (&b, &g, &g));
        assert!(full[0].segment_non_trivial && !full[1].segment_non_trivial);

        let trivial = Path::new(vec![p(2.0, 18.0), p(18.0, 18.0)]).unwrap();
        let mut none = Vec::new();
        assert_eq!(include_data(&mut none, &trivial, true, &v, 0.05, 1, false), 0);
        assert_eq!(include_data(&mut none, &trivial, false, &v, 0.05, 1, false), 1);
    }

    #[test]
    fn config_validation() {
        let mut cfg = DatasetConfig::new(ConfigKind::Point2, Preset::D0, 10, 0.8, 1);
        cfg.validate(ConfigKind::Point2).unwrap();
        cfg.p_nt = 1.5;
        assert!(cfg.validate(ConfigKind::Point2).is_err());
        cfg.p_nt = 0.5;
        cfg.k_train = 0;
        assert!(cfg.validate(ConfigKind::Point2).is_err());
    }

    #[test]
    fn small_dataset_round_trips() {
        let env = wall();
        let mut cfg = DatasetConfig::new(ConfigKind::Point2, Preset::D1, 20, 0.8, 3);
        cfg.gamma_samples = 500;
        let ds = generate_dataset(&env, &cfg).unwrap();
        assert_eq!(ds.meta.n_queries, 20);
        assert_eq!(ds.meta.queries.iter().map(|q| q.n_samples).sum::<usize>(), ds.len());

        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("d.bin");
        ds.save(&file).unwrap();
        let back = Dataset::<f64>::load(&file).unwrap();
        assert_eq!(back.samples, ds.samples);
        assert_eq!(back.meta.queries, ds.meta.queries);
        assert_eq!(back.meta, ds.meta);
        assert!(ds.to_csv().lines().count() == ds.len() + 1);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        assert!(parse_records::<f64>(b"NOTDATA\0").is_err());
        let env = wall();
        let mut cfg = DatasetConfig::new(ConfigKind::Point2, Preset::D0, 3, 0.0, 3);
        cfg.gamma_samples = 10;
        let ds = generate_dataset(&env, &cfg).unwrap();
        let bytes = ds.to_bytes();
        assert!(parse_records::<f64>(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(parse_records::<f64>(&extra).is_err());
    }
}
