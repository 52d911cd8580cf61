//! Uniform and non-trivial query sampling, and the non-triviality ratio.
//!
//! A query is *trivial* when its start steers directly to its goal. The
//! non-triviality ratio of an environment is the fraction of uniformly drawn
//! queries that are not trivial.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::collision::{is_valid, InflatedView};
use crate::env::Configuration;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seeding::stream_rng;
use crate::steering::steer_to;

/// Rejection attempts allowed when drawing a single valid configuration.
pub const CONFIG_ATTEMPT_BUDGET: usize = 1_000_000;

/// A (start, goal) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Query<T> {
    pub start: Configuration<T>,
    pub goal: Configuration<T>,
}

impl<T: Real> Query<T> {
    pub fn new(start: Configuration<T>, goal: Configuration<T>) -> Self {
        Query { start, goal }
    }

    pub fn is_trivial(&self, view: &InflatedView<'_, T>, resolution: T) -> bool {
        steer_to(&self.start, &self.goal, view, resolution)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    /// Rejection attempts when looking for a non-trivial query.
    pub n_max: usize,
    pub seed: u64,
    /// Steering resolution; `None` uses the configuration-space default.
    #[serde(default)]
    pub resolution: Option<f64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            n_max: 100,
            seed: 0,
            resolution: None,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 {
            return Err(Error::validation("sampler.n_max", "must be >= 1"));
        }
        if let Some(r) = self.resolution {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::validation("sampler.resolution", "must be > 0"));
            }
        }
        Ok(())
    }
}

/// Draws one valid configuration by rejection from the bounding box.
pub fn uniform_config<T: Real, R: Rng + ?Sized>(
    view: &InflatedView<'_, T>,
    rng: &mut R,
) -> Result<Configuration<T>> {
    for _ in 0..CONFIG_ATTEMPT_BUDGET {
        let c = view.env().sample_config(rng);
        if is_valid(&c, view) {
            return Ok(c);
        }
    }
    Err(Error::SamplingExhausted {
        attempts: CONFIG_ATTEMPT_BUDGET,
    })
}

/// Independent uniform start and goal in free space.
pub fn uniform_query<T: Real, R: Rng + ?Sized>(
    view: &InflatedView<'_, T>,
    rng: &mut R,
) -> Result<Query<T>> {
    let start = uniform_config(view, rng)?;
    let goal = uniform_config(view, rng)?;
    Ok(Query { start, goal })
}

/// Outcome of [`non_trivial_query`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledQuery<T> {
    pub query: Query<T>,
    /// False when every one of the `n_max` draws was trivial; the last draw is returned.
    pub non_trivial: bool,
    pub attempts: usize,
}

/// Rejection sampler over non-trivial queries.
///
/// Draws up to `n_max` uniform queries and returns the first whose endpoints
/// do not steer to each other. If none is found the last draw is returned with
/// `non_trivial = false`.
pub fn non_trivial_query<T: Real, R: Rng + ?Sized>(
    view: &InflatedView<'_, T>,
    n_max: usize,
    resolution: T,
    rng: &mut R,
) -> Result<SampledQuery<T>> {
    if n_max == 0 {
        return Err(Error::validation("sampler.n_max", "must be >= 1"));
    }
    let mut last = None;
    for attempt in 1..=n_max {
        let q = uniform_query(view, rng)?;
        if !q.is_trivial(view, resolution) {
            return Ok(SampledQuery {
                query: q,
                non_trivial: true,
                attempts: attempt,
            });
        }
        last = Some(q);
    }
    Ok(SampledQuery {
        query: last.expect("n_max >= 1"),
        non_trivial: false,
        attempts: n_max,
    })
}

/// Non-triviality ratio estimate with a 95% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub gamma: f64,
    pub half_width: f64,
    pub n_samples: usize,
    pub n_non_trivial: usize,
}

impl GammaEstimate {
    pub fn from_counts(n_non_trivial: usize, n_samples: usize) -> Self {
        let n = n_samples as f64;
        let p = n_non_trivial as f64 / n;
        GammaEstimate {
            gamma: p,
            half_width: 1.96 * (p * (1.0 - p) / n).sqrt(),
            n_samples,
            n_non_trivial,
        }
    }

    /// Binomial standard error.
    pub fn sigma(&self) -> f64 {
        (self.gamma * (1.0 - self.gamma) / self.n_samples as f64).sqrt()
    }
}

/// Samples per RNG stream in [`estimate_gamma_nt`].
const GAMMA_CHUNK: usize = 4096;

/// Fraction of `n_samples` uniform queries that are non-trivial.
///
/// Samples are drawn in fixed-size chunks, each from its own stream derived
/// from `seed`, so the result does not depend on how chunks are scheduled.
pub fn estimate_gamma_nt<T: Real>(
    view: &InflatedView<'_, T>,
    n_samples: usize,
    resolution: T,
    seed: u64,
) -> Result<GammaEstimate> {
    use rayon::prelude::*;
    if n_samples == 0 {
        return Err(Error::validation("n_samples", "must be >= 1"));
    }
    let chunks = n_samples.div_ceil(GAMMA_CHUNK);
    let counts: Result<Vec<usize>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let n = GAMMA_CHUNK.min(n_samples - k * GAMMA_CHUNK);
            let mut hits = 0;
            for _ in 0..n {
                let q = uniform_query(view, &mut rng)?;
                if !q.is_trivial(view, resolution) {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect();
    let hits = counts?.into_iter().sum();
    Ok(GammaEstimate::from_counts(hits, n_samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Environment, Obstacle, RobotModel, Workspace};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn empty() -> Environment<f64> {
        Environment::new(
            "empty",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            vec![],
        )
    }

    fn wall() -> Environment<f64> {
        Environment::new(
            "wall",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            vec![Obstacle::from_bounds(9.0, 11.0, 0.0, 15.0)],
        )
    }

    #[test]
    fn empty_env_has_no_non_trivial_queries() {
        let env = empty();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = non_trivial_query(&env.view(), 50, 0.05, &mut rng).unwrap();
        assert!(!s.non_trivial);
        assert_eq!(s.attempts, 50);
        let g = estimate_gamma_nt(&env.view(), 2000, 0.05, 3).unwrap();
        assert_eq!(g.gamma, 0.0);
        assert_eq!(g.half_width, 0.0);
    }

    #[test]
    fn flagged_queries_do_not_steer() {
        let env = wall();
        let v = env.view();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let s = non_trivial_query(&v, 100, 0.05, &mut rng).unwrap();
            assert!(is_valid(&s.query.start, &v) && is_valid(&s.query.goal, &v));
            if s.non_trivial {
                assert!(!steer_to(&s.query.start, &s.query.goal, &v, 0.05));
            }
        }
    }

    #[test]
    fn crowded_env_still_samples() {
        // obstacles cover 99% of the area, free strip along the top
        let env = Environment::new(
            "crowded",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            vec![Obstacle::from_bounds(-1.0, 21.0, -1.0, 19.8)],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = uniform_query(&env.view(), &mut rng).unwrap();
        assert!(q.start.coords()[1] > 19.8 && q.goal.coords()[1] > 19.8);
    }

    #[test]
    fn zero_budget_rejected() {
        let env = wall();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(non_trivial_query(&env.view(), 0, 0.05, &mut rng).is_err());
        assert!(estimate_gamma_nt(&env.view(), 0, 0.05, 1).is_err());
    }

    #[test]
    fn gamma_is_deterministic() {
        let env = wall();
        let a = estimate_gamma_nt(&env.view(), 5000, 0.05, 11).unwrap();
        let b = estimate_gamma_nt(&env.view(), 5000, 0.05, 11).unwrap();
        assert_eq!(a, b);
    }
}
