//! Classical planners that produce the supervision paths.
//!
//! Point robots are solved with grid A* followed by shortcut smoothing; pose
//! and joint spaces use an RRT* with a fixed iteration budget. Both planners
//! first try the direct steering connection, which is optimal whenever it is
//! collision free.

mod grid;
mod rrt_star;
mod smoothing;

pub use grid::{astar, GridSearchResult, Lattice, OccupancyGrid, SearchGraph, Step, Tally};
pub use rrt_star::{RrtStar, RrtStarOutcome, RrtStarParams};
pub use smoothing::{shortcut_smooth, shortcut_smooth_traced};

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::collision::{is_valid, InflatedView};
use crate::env::ConfigKind;
use crate::error::{Error, Result};
use crate::sampling::Query;
use crate::scalar::Real;
use crate::seeding::{hash_configs, stream_rng};
use crate::steering::{default_resolution, steer_to, Path};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    GridAStar,
    RrtStar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpertConfig {
    pub kind: PlannerKind,
    pub cell_size: f64,
    pub iterations: usize,
    pub step_size: f64,
    pub goal_bias: f64,
    pub rewire_gamma: f64,
    pub radius_max: f64,
    pub seed: u64,
    pub smoothing_rounds: usize,
    /// Steering resolution; `None` uses the configuration-space default.
    pub resolution: Option<f64>,
}

impl Default for ExpertConfig {
    fn default() -> Self {
        ExpertConfig {
            kind: PlannerKind::GridAStar,
            cell_size: 0.25,
            iterations: 20_000,
            step_size: 1.0,
            goal_bias: 0.05,
            rewire_gamma: 8.0,
            radius_max: 2.0,
            seed: 0,
            smoothing_rounds: 100,
            resolution: None,
        }
    }
}

impl ExpertConfig {
    /// Defaults suited to the robot's configuration space.
    pub fn for_kind(kind: ConfigKind) -> Self {
        match kind {
            ConfigKind::Point2 => ExpertConfig::default(),
            ConfigKind::PoseSe2 => ExpertConfig {
                kind: PlannerKind::RrtStar,
                iterations: 20_000,
                step_size: 1.0,
                rewire_gamma: 6.0,
                radius_max: 2.0,
                ..ExpertConfig::default()
            },
            ConfigKind::Joints(n) => ExpertConfig {
                kind: PlannerKind::RrtStar,
                iterations: if n >= 6 { 40_000 } else { 20_000 },
                step_size: 0.5,
                rewire_gamma: 4.0,
                radius_max: 1.0,
                ..ExpertConfig::default()
            },
        }
    }

    pub fn validate(&self, kind: ConfigKind) -> Result<()> {
        if !(self.cell_size > 0.0) {
            return Err(Error::validation("expert.cell_size", "must be > 0"));
        }
        if self.iterations == 0 {
            return Err(Error::validation("expert.iterations", "must be > 0"));
        }
        if !(self.step_size > 0.0) {
            return Err(Error::validation("expert.step_size", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return Err(Error::validation("expert.goal_bias", "must lie in [0, 1]"));
        }
        if !(self.rewire_gamma > 0.0 && self.radius_max > 0.0) {
            return Err(Error::validation("expert.rewire_gamma", "radius parameters must be > 0"));
        }
        if let Some(r) = self.resolution {
            if !(r > 0.0) {
                return Err(Error::validation("expert.resolution", "must be > 0"));
            }
        }
        if self.kind == PlannerKind::GridAStar && kind != ConfigKind::Point2 {
            return Err(Error::validation(
                "expert.kind",
                format!("grid A* only supports point robots, not {kind}"),
            ));
        }
        Ok(())
    }

    pub fn resolution_for<T: Real>(&self, kind: ConfigKind) -> T {
        self.resolution
            .map(T::lit)
            .unwrap_or_else(|| default_resolution(kind))
    }
}

type SolutionCache<T> = Mutex<HashMap<Vec<u64>, Option<Path<T>>>>;

/// Expert bound to one (padded) environment view. Builds the A* lattice once.
pub struct Expert<'a, T> {
    view: InflatedView<'a, T>,
    cfg: ExpertConfig,
    resolution: T,
    lattice: Option<Lattice<'a, T>>,
    cache: Option<SolutionCache<T>>,
}

impl<'a, T: Real> Expert<'a, T> {
    pub fn new(view: InflatedView<'a, T>, cfg: ExpertConfig) -> Result<Self> {
        let kind = view.env().config_kind();
        cfg.validate(kind)?;
        let resolution = cfg.resolution_for(kind);
        let lattice = match cfg.kind {
            PlannerKind::GridAStar => Some(Lattice::new(view, cfg.cell_size, resolution)),
            PlannerKind::RrtStar => None,
        };
        Ok(Expert {
            view,
            cfg,
            resolution,
            lattice,
            cache: None,
        })
    }

    /// Memoizes solutions by exact query coordinates. Results are unchanged
    /// since solving is a pure function of the query.
    pub fn with_cache(mut self) -> Self {
        self.cache = Some(Mutex::new(HashMap::new()));
        self
    }

    pub fn view(&self) -> &InflatedView<'a, T> {
        &self.view
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn config(&self) -> &ExpertConfig {
        &self.cfg
    }

    /// Near-optimal feasible path, or `Ok(None)` when the planner gives up.
    ///
    /// The random stream is derived from the query itself, so the same query
    /// always yields the same path.
    pub fn solve(&self, q: &Query<T>) -> Result<Option<Path<T>>> {
        let Some(cache) = &self.cache else {
            return self.solve_uncached(q);
        };
        let key: Vec<u64> = q
            .start
            .coords()
            .into_iter()
            .chain(q.goal.coords())
            .map(|v| v.as_f64().to_bits())
            .collect();
        if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let solved = self.solve_uncached(q)?;
        cache
            .lock()
            .expect("cache lock")
            .insert(key, solved.clone());
        Ok(solved)
    }

    fn solve_uncached(&self, q: &Query<T>) -> Result<Option<Path<T>>> {
        let env = self.view.env();
        env.check_config(&q.start)?;
        env.check_config(&q.goal)?;
        if !is_valid(&q.start, &self.view) {
            return Err(Error::InvalidInput("query start is in collision".into()));
        }
        if !is_valid(&q.goal, &self.view) {
            return Err(Error::InvalidInput("query goal is in collision".into()));
        }
        if steer_to(&q.start, &q.goal, &self.view, self.resolution) {
            return Ok(Some(Path {
                waypoints: vec![q.start.clone(), q.goal.clone()],
            }));
        }
        let seed = hash_configs(self.cfg.seed, &[&q.start, &q.goal]);
        let raw = match &self.lattice {
            Some(lattice) => lattice.search(&q.start, &q.goal),
            None => {
                let params = RrtStarParams {
                    iterations: self.cfg.iterations,
                    step_size: T::lit(self.cfg.step_size),
                    goal_bias: self.cfg.goal_bias,
                    rewire_gamma: T::lit(self.cfg.rewire_gamma),
                    radius_max: T::lit(self.cfg.radius_max),
                    resolution: self.resolution,
                };
                let mut rng = stream_rng(seed, 0x2257);
                RrtStar::new(&self.view, params)
                    .solve(&q.start, &q.goal, &mut rng)
                    .path
            }
        };
        Ok(raw.map(|p| {
            shortcut_smooth(&p, &self.view, self.cfg.smoothing_rounds, seed, self.resolution)
        }))
    }
}

/// One-shot convenience wrapper around [`Expert::solve`].
pub fn solve_query<T: Real>(
    q: &Query<T>,
    view: InflatedView<'_, T>,
    cfg: &ExpertConfig,
) -> Result<Option<Path<T>>> {
    Expert::new(view, cfg.clone())?.solve(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Configuration, Environment, Obstacle, RobotModel, Workspace};
    use crate::steering::{path_cost, path_feasible};

    fn point_env(obstacles: Vec<Obstacle<f64>>) -> Environment<f64> {
        Environment::new(
            "p",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            obstacles,
        )
    }

    #[test]
    fn free_space_is_straight_line() {
        let env = point_env(vec![]);
        let cfg = ExpertConfig {
            cell_size: 0.5,
            ..ExpertConfig::default()
        };
        let q = Query::new(Configuration::point(0.0, 0.0), Configuration::point(10.0, 0.0));
        let p = solve_query(&q, env.view(), &cfg).unwrap().unwrap();
        assert_eq!(path_cost(&p, &env), 10.0);
    }

    #[test]
    fn start_in_obstacle_is_input_error() {
        let env = point_env(vec![Obstacle::from_bounds(9.0, 11.0, 0.0, 15.0)]);
        let q = Query::new(Configuration::point(10.0, 5.0), Configuration::point(18.0, 2.0));
        assert!(matches!(
            solve_query(&q, env.view(), &ExpertConfig::default()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn disconnected_goal_fails() {
        // goal boxed in by a ring of obstacles
        let env = point_env(vec![
            Obstacle::from_bounds(14.0, 18.0, 14.0, 15.0),
            Obstacle::from_bounds(14.0, 18.0, 17.0, 18.0),
            Obstacle::from_bounds(14.0, 15.0, 14.0, 18.0),
            Obstacle::from_bounds(17.0, 18.0, 14.0, 18.0),
        ]);
        let q = Query::new(Configuration::point(2.0, 2.0), Configuration::point(16.0, 16.0));
        assert_eq!(solve_query(&q, env.view(), &ExpertConfig::default()).unwrap(), None);
    }

    #[test]
    fn rrt_expert_on_arm() {
        let env = Environment::new(
            "arm",
            Workspace::new(-3.0, 3.0, -3.0, 3.0),
            RobotModel::NLinkArm {
                link_lengths: vec![1.2, 1.0],
                base: [0.0, 0.0],
            },
            vec![Obstacle::from_bounds(1.2, 1.8, -0.3, 0.3)],
        );
        let cfg = ExpertConfig {
            iterations: 3000,
            ..ExpertConfig::for_kind(env.config_kind())
        };
        let q = Query::new(
            Configuration::joints([-0.6, 0.0]),
            Configuration::joints([0.6, 0.0]),
        );
        let view = env.view();
        assert!(!steer_to(&q.start, &q.goal, &view, 0.02));
        let p = solve_query(&q, view, &cfg).unwrap().expect("arm path");
        assert!(path_feasible(&p, &view, 0.02));
        assert_eq!(p.first(), &q.start);
        assert_eq!(p.last(), &q.goal);
    }

    #[test]
    fn grid_kind_rejected_for_poses() {
        let cfg = ExpertConfig::default();
        assert!(cfg.validate(ConfigKind::PoseSe2).is_err());
        let bad = ExpertConfig {
            goal_bias: 1.5,
            ..ExpertConfig::default()
        };
        assert!(bad.validate(ConfigKind::Point2).is_err());
    }
}
