//! RRT* with goal biasing and a shrinking rewire radius.

use rand::Rng;

use crate::collision::{is_valid, InflatedView};
use crate::env::{interpolate_unchecked, Configuration};
use crate::scalar::Real;
use crate::steering::{steer_to, Path};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrtStarParams<T> {
    pub iterations: usize,
    pub step_size: T,
    pub goal_bias: f64,
    /// Radius is `min(gamma * (ln n / n)^(1/d), radius_max)`.
    pub rewire_gamma: T,
    pub radius_max: T,
    pub resolution: T,
}

#[derive(Debug, Clone)]
struct Node<T> {
    config: Configuration<T>,
    parent: Option<usize>,
    cost: T,
    children: Vec<usize>,
}

/// Best path found within the iteration budget plus the best-cost trace.
#[derive(Debug, Clone)]
pub struct RrtStarOutcome<T> {
    pub path: Option<Path<T>>,
    /// Best goal cost after each iteration (infinite until the goal is reached).
    pub cost_trace: Vec<T>,
    pub tree_size: usize,
}

pub struct RrtStar<'v, 'a, T> {
    view: &'v InflatedView<'a, T>,
    params: RrtStarParams<T>,
    nodes: Vec<Node<T>>,
    goal_idx: Option<usize>,
}

impl<'v, 'a, T: Real> RrtStar<'v, 'a, T> {
    pub fn new(view: &'v InflatedView<'a, T>, params: RrtStarParams<T>) -> Self {
        RrtStar {
            view,
            params,
            nodes: Vec::new(),
            goal_idx: None,
        }
    }

    fn dist(&self, a: &Configuration<T>, b: &Configuration<T>) -> T {
        self.view.env().distance(a, b)
    }

    fn steers(&self, a: &Configuration<T>, b: &Configuration<T>) -> bool {
        steer_to(a, b, self.view, self.params.resolution)
    }

    fn radius(&self, dim: usize) -> T {
        let n = T::from_count(self.nodes.len() + 1);
        let r = self.params.rewire_gamma * (n.ln() / n).powf(T::one() / T::from_count(dim));
        r.min(self.params.radius_max)
    }

    fn add_node(&mut self, config: Configuration<T>, parent: usize, cost: T) -> usize {
        let idx = self.nodes.len();
        self.nodes.push(Node {
            config,
            parent: Some(parent),
            cost,
            children: Vec::new(),
        });
        self.nodes[parent].children.push(idx);
        idx
    }

    fn reparent(&mut self, child: usize, new_parent: usize, new_cost: T) {
        if let Some(old) = self.nodes[child].parent {
            self.nodes[old].children.retain(|&c| c != child);
        }
        self.nodes[child].parent = Some(new_parent);
        self.nodes[new_parent].children.push(child);
        let delta = self.nodes[child].cost - new_cost;
        self.nodes[child].cost = new_cost;
        let mut stack: Vec<usize> = self.nodes[child].children.clone();
        while let Some(k) = stack.pop() {
            self.nodes[k].cost = self.nodes[k].cost - delta;
            stack.extend(self.nodes[k].children.iter().copied());
        }
    }

    /// Runs the full iteration budget from `start` toward `goal`.
    pub fn solve<R: Rng + ?Sized>(
        mut self,
        start: &Configuration<T>,
        goal: &Configuration<T>,
        rng: &mut R,
    ) -> RrtStarOutcome<T> {
        let env = self.view.env();
        let dim = start.kind().dim();
        self.nodes.push(Node {
            config: start.clone(),
            parent: None,
            cost: T::zero(),
            children: Vec::new(),
        });
        let mut trace = Vec::with_capacity(self.params.iterations);
        let mut near: Vec<(usize, T)> = Vec::new();

        for _ in 0..self.params.iterations {
            let sample = if rng.gen::<f64>() < self.params.goal_bias {
                goal.clone()
            } else {
                env.sample_config(rng)
            };

            let (nearest, d_near) = self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| (i, self.dist(&n.config, &sample)))
                .fold((0, T::infinity()), |best, cur| if cur.1 < best.1 { cur } else { best });
            if d_near == T::zero() {
                trace.push(self.best_cost());
                continue;
            }
            let new = if d_near > self.params.step_size {
                interpolate_unchecked(
                    &self.nodes[nearest].config,
                    &sample,
                    self.params.step_size / d_near,
                )
            } else {
                sample
            };
            let is_goal = new == *goal;
            if (is_goal && self.goal_idx.is_some()) || !is_valid(&new, self.view) {
                trace.push(self.best_cost());
                continue;
            }

            let r = self.radius(dim).max(self.params.step_size.min(d_near));
            near.clear();
            for (i, n) in self.nodes.iter().enumerate() {
                let d = self.dist(&n.config, &new);
                if d <= r || i == nearest {
                    near.push((i, d));
                }
            }
            // cheapest feasible parent first
            near.sort_by(|a, b| {
                (self.nodes[a.0].cost + a.1)
                    .partial_cmp(&(self.nodes[b.0].cost + b.1))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.0.cmp(&b.0))
            });
            let Some(&(parent, d_parent)) = near
                .iter()
                .find(|(i, _)| self.steers(&self.nodes[*i].config, &new))
            else {
                trace.push(self.best_cost());
                continue;
            };
            let new_cost = self.nodes[parent].cost + d_parent;
            let new_idx = self.add_node(new.clone(), parent, new_cost);
            if is_goal {
                self.goal_idx = Some(new_idx);
            }

            for &(j, d) in &near {
                if j == parent || j == 0 {
                    continue;
                }
                let through = new_cost + d;
                if through < self.nodes[j].cost && self.steers(&new, &self.nodes[j].config) {
                    if self.is_ancestor(j, new_idx) {
                        continue;
                    }
                    self.reparent(j, new_idx, through);
                }
            }

            if self.goal_idx.is_none() && !is_goal {
                let dg = self.dist(&new, goal);
                if dg <= self.params.step_size && self.steers(&new, goal) {
                    let cost = self.nodes[new_idx].cost + dg;
                    let g = self.add_node(goal.clone(), new_idx, cost);
                    self.goal_idx = Some(g);
                }
            }
            trace.push(self.best_cost());
        }

        let path = self.goal_idx.map(|g| {
            let mut waypoints = Vec::new();
            let mut cur = Some(g);
            while let Some(k) = cur {
                waypoints.push(self.nodes[k].config.clone());
                cur = self.nodes[k].parent;
            }
            waypoints.reverse();
            Path { waypoints }
        });
        RrtStarOutcome {
            path,
            cost_trace: trace,
            tree_size: self.nodes.len(),
        }
    }

    fn is_ancestor(&self, candidate: usize, mut node: usize) -> bool {
        loop {
            if node == candidate {
                return true;
            }
            match self.nodes[node].parent {
                Some(p) => node = p,
                None => return false,
            }
        }
    }

    fn best_cost(&self) -> T {
        self.goal_idx
            .map(|g| self.nodes[g].cost)
            .unwrap_or_else(T::infinity)
    }
}
