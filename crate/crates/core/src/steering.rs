//! Straight-line steering, path feasibility and path cost.

use serde::{Deserialize, Serialize};

use crate::collision::{is_valid, InflatedView};
use crate::env::{interpolate_unchecked, ConfigKind, Configuration, Environment};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default steering resolution for the given configuration space.
pub fn default_resolution<T: Real>(kind: ConfigKind) -> T {
    match kind {
        ConfigKind::Point2 | ConfigKind::PoseSe2 => T::lit(0.05),
        ConfigKind::Joints(_) => T::lit(0.02),
    }
}

/// Ordered list of waypoints joined by straight segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Path<T> {
    pub waypoints: Vec<Configuration<T>>,
}

impl<T: Real> Path<T> {
    pub fn new(waypoints: Vec<Configuration<T>>) -> Result<Self> {
        let Some(first) = waypoints.first() else {
            return Err(Error::InvalidInput("a path needs at least one waypoint".into()));
        };
        let kind = first.kind();
        if let Some(bad) = waypoints.iter().find(|w| w.kind() != kind) {
            return Err(Error::DimensionMismatch {
                expected: kind.to_string(),
                got: bad.kind().to_string(),
            });
        }
        Ok(Path { waypoints })
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn first(&self) -> &Configuration<T> {
        &self.waypoints[0]
    }

    pub fn last(&self) -> &Configuration<T> {
        self.waypoints.last().expect("non-empty path")
    }

    pub fn cost(&self, env: &Environment<T>) -> T {
        path_cost(self, env)
    }
}

/// Number of equal subdivisions used to check a segment of length `dist`.
///
/// Rounded up to a power of two so that halving the resolution checks a
/// superset of the same parameter values.
fn subdivisions<T: Real>(dist: T, resolution: T) -> usize {
    let raw = (dist / resolution).ceil();
    let raw = raw.to_usize().unwrap_or(usize::MAX >> 1).max(1);
    raw.next_power_of_two()
}

/// Discretized straight-line connection test, endpoints included.
///
/// The segment is always traversed from the lexicographically smaller endpoint,
/// so `steer_to(a, b) == steer_to(b, a)` holds exactly.
///
/// # Panics
/// If `resolution` is not strictly positive.
pub fn steer_to<T: Real>(
    a: &Configuration<T>,
    b: &Configuration<T>,
    view: &InflatedView<'_, T>,
    resolution: T,
) -> bool {
    assert!(resolution > T::zero(), "steering resolution must be > 0");
    if a.kind() != b.kind() {
        return false;
    }
    let (from, to) = if a.lex_cmp(b) == std::cmp::Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };
    if !is_valid(from, view) {
        return false;
    }
    let dist = view.env().distance(from, to);
    if dist == T::zero() {
        return true;
    }
    if !dist.is_finite() || !is_valid(to, view) {
        return false;
    }
    let m = subdivisions(dist, resolution);
    let denom = T::from_count(m);
    // coarse-to-fine: odd multiples of each stride
    let mut stride = m;
    while stride > 1 {
        let half = stride / 2;
        let mut k = half;
        while k < m {
            let c = interpolate_unchecked(from, to, T::from_count(k) / denom);
            if !is_valid(&c, view) {
                return false;
            }
            k += stride;
        }
        stride = half;
    }
    true
}

/// Sum of segment lengths; zero for a single waypoint.
pub fn path_cost<T: Real>(path: &Path<T>, env: &Environment<T>) -> T {
    path.waypoints
        .windows(2)
        .map(|w| env.distance(&w[0], &w[1]))
        .fold(T::zero(), |s, d| s + d)
}

/// True iff every consecutive pair steers.
pub fn path_feasible<T: Real>(path: &Path<T>, view: &InflatedView<'_, T>, resolution: T) -> bool {
    if path.len() == 1 {
        return steer_to(path.first(), path.first(), view, resolution);
    }
    path.waypoints
        .windows(2)
        .all(|w| steer_to(&w[0], &w[1], view, resolution))
}
