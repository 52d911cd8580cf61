use rand::Rng;

use crate::collision::InflatedView;
use crate::scalar::Real;
use crate::seeding::stream_rng;
use crate::steering::{path_cost, steer_to, Path};

/// Random shortcutting: each round picks two waypoints and drops everything
/// between them when they steer to each other and the cost does not grow.
pub fn shortcut_smooth<T: Real>(
    path: &Path<T>,
    view: &InflatedView<'_, T>,
    rounds: usize,
    seed: u64,
    resolution: T,
) -> Path<T> {
    shortcut_smooth_traced(path, view, rounds, seed, resolution).0
}

/// As [`shortcut_smooth`], also returning the path cost after every round.
pub fn shortcut_smooth_traced<T: Real>(
    path: &Path<T>,
    view: &InflatedView<'_, T>,
    rounds: usize,
    seed: u64,
    resolution: T,
) -> (Path<T>, Vec<T>) {
    let env = view.env();
    let mut rng = stream_rng(seed, 0x5300);
    let mut current = path.clone();
    let mut cost = path_cost(&current, env);
    let mut trace = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let n = current.len();
        if n <= 2 {
            trace.push(cost);
            continue;
        }
        let mut i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n);
        if i > j {
            std::mem::swap(&mut i, &mut j);
        }
        if j >= i + 2 && steer_to(&current.waypoints[i], &current.waypoints[j], view, resolution) {
            let mut waypoints = Vec::with_capacity(n - (j - i - 1));
            waypoints.extend_from_slice(&current.waypoints[..=i]);
            waypoints.extend_from_slice(&current.waypoints[j..]);
            let candidate = Path { waypoints };
            let c = path_cost(&candidate, env);
            if c <= cost {
                current = candidate;
                cost = c;
            }
        }
        trace.push(cost);
    }
    (current, trace)
}
