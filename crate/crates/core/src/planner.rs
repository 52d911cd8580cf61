//! Neural planner: greedy steering plus learned rollout, with feasibility
//! check and neural replanning of infeasible segments.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::collision::{is_valid, InflatedView};
use crate::env::Configuration;
use crate::error::{Error, Result};
use crate::expert::Expert;
use crate::pnet::MlpModel;
use crate::sampling::Query;
use crate::scalar::Real;
use crate::steering::{default_resolution, path_feasible, steer_to, Path};

/// Anything that proposes the next configuration toward a goal.
pub trait NextState<T> {
    fn next_state(&self, current: &Configuration<T>, goal: &Configuration<T>) -> Configuration<T>;
}

impl<T: Real> NextState<T> for MlpModel<T> {
    fn next_state(&self, current: &Configuration<T>, goal: &Configuration<T>) -> Configuration<T> {
        self.predict(current, goal)
    }
}

/// Replays a fixed path: returns the waypoint after `current`, or the goal
/// when `current` is not on the path.
#[derive(Debug, Clone)]
pub struct PathLookup<T> {
    pub path: Path<T>,
}

impl<T: Real> NextState<T> for PathLookup<T> {
    fn next_state(&self, current: &Configuration<T>, goal: &Configuration<T>) -> Configuration<T> {
        self.path
            .waypoints
            .iter()
            .position(|w| w == current)
            .and_then(|i| self.path.waypoints.get(i + 1))
            .unwrap_or(goal)
            .clone()
    }
}

/// Asks an expert for a path from `current` to `goal` and returns its
/// second waypoint.
pub struct ExpertOracle<'e, 'a, T> {
    pub expert: &'e Expert<'a, T>,
}

impl<T: Real> NextState<T> for ExpertOracle<'_, '_, T> {
    fn next_state(&self, current: &Configuration<T>, goal: &Configuration<T>) -> Configuration<T> {
        match self.expert.solve(&Query::new(current.clone(), goal.clone())) {
            Ok(Some(p)) if p.len() >= 2 => p.waypoints[1].clone(),
            _ => goal.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub n_plan: usize,
    /// Steering resolution; `None` uses the configuration-space default.
    pub resolution: Option<f64>,
    pub use_steer: bool,
    /// Goal tolerance when steering is disabled.
    pub delta: f64,
    pub replan_depth: usize,
    /// Rollout cap for each repaired segment.
    pub replan_iterations: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            n_plan: 80,
            resolution: None,
            use_steer: true,
            delta: 1.0,
            replan_depth: 2,
            replan_iterations: 20,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_plan == 0 {
            return Err(Error::validation("n_plan", "must be >= 1"));
        }
        if let Some(r) = self.resolution {
            if !(r > 0.0) {
                return Err(Error::validation("resolution", "must be > 0"));
            }
        }
        if !self.use_steer && !(self.delta > 0.0) {
            return Err(Error::validation("delta", "must be > 0 without steering"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// The rollout never connected to the goal.
    NoGoalReached,
    /// The path reached the goal but collides (no replanning without steering).
    Infeasible,
    /// Replanning could not repair the path.
    InfeasibleAfterReplan,
    /// Replanning ran out of depth or a segment rollout ran out of iterations.
    ReplanExhausted,
}

/// Outcome of planning one query.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanRecord<T> {
    pub path: Option<Path<T>>,
    pub failure: Option<FailureKind>,
    pub cost: Option<f64>,
    pub iterations: usize,
    pub replans: usize,
    pub wall_time_s: f64,
}

impl<T> PlanRecord<T> {
    pub fn success(&self) -> bool {
        self.failure.is_none()
    }
}

struct Ctx<'c, 'v, 'a, T, M: ?Sized> {
    view: &'c InflatedView<'a, T>,
    model: &'v M,
    cfg: &'c PlannerConfig,
    resolution: T,
    replans: usize,
}

impl<T: Real, M: NextState<T> + ?Sized> Ctx<'_, '_, '_, T, M> {
    /// Greedy steer-or-predict loop; `None` when the goal is never appended.
    fn rollout(&self, from: &Configuration<T>, goal: &Configuration<T>, cap: usize) -> (Option<Vec<Configuration<T>>>, usize) {
        let mut pts = vec![from.clone()];
        for i in 1..=cap {
            let end = pts.last().expect("non-empty");
            if steer_to(end, goal, self.view, self.resolution) {
                pts.push(goal.clone());
                return (Some(pts), i);
            }
            let next = self.model.next_state(end, goal);
            pts.push(next);
        }
        (None, cap)
    }

    fn replan(&mut self, path: Path<T>, depth: usize) -> std::result::Result<Path<T>, FailureKind> {
        if path_feasible(&path, self.view, self.resolution) {
            return Ok(path);
        }
        if depth == 0 {
            return Err(FailureKind::ReplanExhausted);
        }
        self.replans += 1;
        let last = path.len() - 1;
        let kept: Vec<&Configuration<T>> = path
            .waypoints
            .iter()
            .enumerate()
            .filter(|(i, w)| *i == 0 || *i == last || is_valid(w, self.view))
            .map(|(_, w)| w)
            .collect();
        let mut stitched = vec![kept[0].clone()];
        for pair in kept.windows(2) {
            let (u, v) = (pair[0], pair[1]);
            if steer_to(u, v, self.view, self.resolution) {
                stitched.push(v.clone());
                continue;
            }
            match self.rollout(u, v, self.cfg.replan_iterations) {
                (Some(seg), _) => stitched.extend(seg.into_iter().skip(1)),
                (None, _) => return Err(FailureKind::ReplanExhausted),
            }
        }
        self.replan(Path { waypoints: stitched }, depth - 1)
    }
}

fn resolution_of<T: Real>(cfg: &PlannerConfig, view: &InflatedView<'_, T>) -> T {
    cfg.resolution
        .map(T::lit)
        .unwrap_or_else(|| default_resolution(view.env().config_kind()))
}

/// Plans one query with `model`. `view` should be the unpadded environment.
pub fn plan<T: Real, M: NextState<T> + ?Sized>(
    q: &Query<T>,
    view: &InflatedView<'_, T>,
    model: &M,
    cfg: &PlannerConfig,
) -> Result<PlanRecord<T>> {
    cfg.validate()?;
    let env = view.env();
    env.check_config(&q.start)?;
    env.check_config(&q.goal)?;
    let t0 = Instant::now();
    let mut ctx = Ctx {
        view,
        model,
        cfg,
        resolution: resolution_of(cfg, view),
        replans: 0,
    };

    let (rolled, iterations) = if cfg.use_steer {
        ctx.rollout(&q.start, &q.goal, cfg.n_plan)
    } else {
        let delta = T::lit(cfg.delta);
        let mut pts = vec![q.start.clone()];
        let mut reached = None;
        for i in 1..=cfg.n_plan {
            let end = pts.last().expect("non-empty");
            if env.distance(end, &q.goal) <= delta {
                pts.push(q.goal.clone());
                reached = Some(i);
                break;
            }
            let next = model.next_state(end, &q.goal);
            pts.push(next);
        }
        match reached {
            Some(i) => (Some(pts), i),
            None => (None, cfg.n_plan),
        }
    };

    let finish = |path: Option<Path<T>>, failure: Option<FailureKind>, replans: usize| PlanRecord {
        cost: path.as_ref().map(|p| p.cost(env).as_f64()),
        path,
        failure,
        iterations,
        replans,
        wall_time_s: t0.elapsed().as_secs_f64(),
    };

    let Some(waypoints) = rolled else {
        return Ok(finish(None, Some(FailureKind::NoGoalReached), 0));
    };
    let path = Path { waypoints };
    if path_feasible(&path, view, ctx.resolution) {
        return Ok(finish(Some(path), None, 0));
    }
    if !cfg.use_steer {
        return Ok(finish(None, Some(FailureKind::Infeasible), 0));
    }
    match ctx.replan(path, cfg.replan_depth) {
        Ok(p) => Ok(finish(Some(p), None, ctx.replans)),
        Err(_) => Ok(finish(None, Some(FailureKind::InfeasibleAfterReplan), ctx.replans)),
    }
}

/// Repairs `path` by re-rolling every non-steerable gap between its valid
/// waypoints, recursing up to `cfg.replan_depth` times.
pub fn replan<T: Real, M: NextState<T> + ?Sized>(
    path: &Path<T>,
    view: &InflatedView<'_, T>,
    model: &M,
    cfg: &PlannerConfig,
) -> Result<std::result::Result<Path<T>, FailureKind>> {
    cfg.validate()?;
    if path.len() < 2 {
        return Err(Error::InvalidInput("replanning needs at least two waypoints".into()));
    }
    if !is_valid(path.first(), view) || !is_valid(path.last(), view) {
        return Err(Error::InvalidInput("replanning needs valid endpoints".into()));
    }
    let mut ctx = Ctx {
        view,
        model,
        cfg,
        resolution: resolution_of(cfg, view),
        replans: 0,
    };
    Ok(ctx.replan(path.clone(), cfg.replan_depth))
}
