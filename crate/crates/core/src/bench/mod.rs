//! Benchmarking: test query sets, per-model metrics, the experiment grid and
//! SVG figures.

mod grid;
mod svg;

pub use grid::{run_grid, CellKey, GridConfig, GridOutcome, GridRow};
pub use svg::{render_svg, Overlay};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::InflatedView;
use crate::error::{Error, Result};
use crate::expert::Expert;
use crate::planner::{plan, NextState, PlanRecord, PlannerConfig};
use crate::sampling::{uniform_query, Query};
use crate::scalar::Real;
use crate::seeding::{derive_seed, stream_rng, streams};

/// Draw attempts allowed per test query when a specific kind is required.
const TEST_QUERY_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Uniform,
    NonTrivial,
    Trivial,
}

impl QueryKind {
    pub fn label(self) -> &'static str {
        match self {
            QueryKind::Uniform => "uniform",
            QueryKind::NonTrivial => "non-trivial",
            QueryKind::Trivial => "trivial",
        }
    }

    fn stream(self) -> u64 {
        match self {
            QueryKind::Uniform => streams::TEST_UNIFORM,
            QueryKind::NonTrivial => streams::TEST_NON_TRIVIAL,
            QueryKind::Trivial => streams::TRIVIAL_SET,
        }
    }
}

/// `n` test queries of the given kind. Query `j` comes from its own stream,
/// so prefixes of larger sets coincide.
pub fn test_queries<T: Real>(
    view: &InflatedView<'_, T>,
    kind: QueryKind,
    n: usize,
    seed: u64,
    resolution: T,
) -> Result<Vec<Query<T>>> {
    let base = derive_seed(seed, kind.stream());
    (0..n)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(base, j as u64);
            for _ in 0..TEST_QUERY_ATTEMPTS {
                let q = uniform_query(view, &mut rng)?;
                let keep = match kind {
                    QueryKind::Uniform => true,
                    QueryKind::NonTrivial => !q.is_trivial(view, resolution),
                    QueryKind::Trivial => q.is_trivial(view, resolution),
                };
                if keep {
                    return Ok(q);
                }
            }
            Err(Error::SamplingExhausted {
                attempts: TEST_QUERY_ATTEMPTS,
            })
        })
        .collect()
}

/// Expert path cost for every query, `None` where the expert fails.
pub fn expert_costs<T: Real>(queries: &[Query<T>], expert: &Expert<'_, T>) -> Result<Vec<Option<f64>>> {
    let env = expert.view().env();
    queries
        .par_iter()
        .map(|q| Ok(expert.solve(q)?.map(|p| p.cost(env).as_f64())))
        .collect()
}

/// Aggregate result of one model on one query set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub model: String,
    pub query_kind: QueryKind,
    pub success_ratio: f64,
    /// Mean of neural / expert cost over queries both solved.
    pub cost_ratio: Option<f64>,
    pub n_success: usize,
    pub n_total: usize,
    /// Queries entering the cost ratio.
    pub n_cost: usize,
    pub expert_failures: usize,
    pub mean_wall_time_s: f64,
}

impl MetricRow {
    /// Builds the row from per-query outcomes.
    pub fn from_outcomes(
        model: &str,
        query_kind: QueryKind,
        neural: &[Option<f64>],
        expert: &[Option<f64>],
        wall_times: &[f64],
    ) -> Self {
        assert_eq!(neural.len(), expert.len(), "one expert cost per query");
        let n_total = neural.len();
        let n_success = neural.iter().filter(|c| c.is_some()).count();
        let ratios: Vec<f64> = neural
            .iter()
            .zip(expert)
            .filter_map(|(n, e)| match (n, e) {
                (Some(n), Some(e)) if *e > 0.0 => Some(n / e),
                (Some(n), Some(_)) => Some(if *n == 0.0 { 1.0 } else { f64::INFINITY }),
                _ => None,
            })
            .collect();
        let cost_ratio = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
        MetricRow {
            model: model.to_string(),
            query_kind,
            success_ratio: if n_total == 0 {
                0.0
            } else {
                n_success as f64 / n_total as f64
            },
            cost_ratio,
            n_success,
            n_total,
            n_cost: ratios.len(),
            expert_failures: expert.iter().filter(|e| e.is_none()).count(),
            mean_wall_time_s: if wall_times.is_empty() {
                0.0
            } else {
                wall_times.iter().sum::<f64>() / wall_times.len() as f64
            },
        }
    }
}

/// Plans every query with `model` on `view` (normally unpadded) and compares
/// against precomputed expert costs.
pub fn evaluate<T: Real, M: NextState<T> + Sync + ?Sized>(
    model_id: &str,
    query_kind: QueryKind,
    model: &M,
    view: &InflatedView<'_, T>,
    queries: &[Query<T>],
    expert_costs: &[Option<f64>],
    cfg: &PlannerConfig,
) -> Result<(MetricRow, Vec<PlanRecord<T>>)> {
    if queries.len() != expert_costs.len() {
        return Err(Error::InvalidInput("one expert cost per query required".into()));
    }
    let records: Vec<PlanRecord<T>> = queries
        .par_iter()
        .map(|q| plan(q, view, model, cfg))
        .collect::<Result<_>>()?;
    let neural: Vec<Option<f64>> = records.iter().map(|r| r.cost).collect();
    let times: Vec<f64> = records.iter().map(|r| r.wall_time_s).collect();
    let row = MetricRow::from_outcomes(model_id, query_kind, &neural, expert_costs, &times);
    Ok((row, records))
}

/// As [`evaluate`], solving the expert denominators on the fly.
pub fn evaluate_with_expert<T: Real, M: NextState<T> + Sync + ?Sized>(
    model_id: &str,
    query_kind: QueryKind,
    model: &M,
    queries: &[Query<T>],
    expert: &Expert<'_, T>,
    cfg: &PlannerConfig,
) -> Result<(MetricRow, Vec<PlanRecord<T>>)> {
    let costs = expert_costs(queries, expert)?;
    evaluate(model_id, query_kind, model, expert.view(), queries, &costs, cfg)
}

/// Sample mean and standard deviation (n - 1 denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Configuration, Environment, Obstacle, RobotModel, Workspace};
    use crate::expert::ExpertConfig;
    use crate::steering::steer_to;

    fn wall() -> Environment<f64> {
        Environment::new(
            "wall",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            vec![Obstacle::from_bounds(9.0, 11.0, 0.0, 15.0)],
        )
    }

    struct Stay;

    impl NextState<f64> for Stay {
        fn next_state(&self, c: &Configuration<f64>, _: &Configuration<f64>) -> Configuration<f64> {
            c.clone()
        }
    }

    #[test]
    fn ratio_arithmetic() {
        let neural = [Some(2.0), Some(3.0), None, Some(4.0)];
        let expert = [Some(2.0), Some(2.0), Some(1.0), None];
        let row = MetricRow::from_outcomes("m", QueryKind::Uniform, &neural, &expert, &[]);
        assert_eq!(row.success_ratio, 0.75);
        assert_eq!(row.n_cost, 2);
        assert_eq!(row.cost_ratio, Some(1.25));
        assert_eq!(row.expert_failures, 1);
    }

    #[test]
    fn query_kinds_hold() {
        let env = wall();
        let v = env.view();
        let nt = test_queries(&v, QueryKind::NonTrivial, 50, 4, 0.05).unwrap();
        assert!(nt.iter().all(|q| !steer_to(&q.start, &q.goal, &v, 0.05)));
        let tr = test_queries(&v, QueryKind::Trivial, 50, 4, 0.05).unwrap();
        assert!(tr.iter().all(|q| steer_to(&q.start, &q.goal, &v, 0.05)));
        let longer = test_queries(&v, QueryKind::Trivial, 60, 4, 0.05).unwrap();
        assert_eq!(&longer[..50], tr.as_slice());
    }

    #[test]
    fn trivial_queries_are_solved_optimally() {
        let env = wall();
        let v = env.view();
        let qs = test_queries(&v, QueryKind::Trivial, 40, 1, 0.05).unwrap();
        let expert = Expert::new(v, ExpertConfig::default()).unwrap();
        let (row, _) =
            evaluate_with_expert("stay", QueryKind::Trivial, &Stay, &qs, &expert, &PlannerConfig::default())
                .unwrap();
        assert_eq!(row.success_ratio, 1.0);
        assert!((row.cost_ratio.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mean_std_small_cases() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
