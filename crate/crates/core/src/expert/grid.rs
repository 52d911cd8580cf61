//! 8-connected grid A* with a Euclidean heuristic.
//!
//! Path costs are tallied as counts of straight and diagonal steps plus any
//! free-form attachment cost, and always evaluated from those counts. Two
//! searches that find paths with the same step counts therefore report
//! bit-identical costs regardless of step order.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::collision::{is_valid, InflatedView};
use crate::env::Configuration;
use crate::scalar::Real;
use crate::steering::{steer_to, Path};

/// Cost of one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    Straight,
    Diagonal,
    /// Edge of arbitrary length, in the same units as the grid spacing scale.
    Free(f64),
}

/// Accumulated path cost.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub straight: u32,
    pub diagonal: u32,
    pub extra: f64,
}

impl Tally {
    fn add(self, step: Step) -> Self {
        match step {
            Step::Straight => Tally {
                straight: self.straight + 1,
                ..self
            },
            Step::Diagonal => Tally {
                diagonal: self.diagonal + 1,
                ..self
            },
            Step::Free(c) => Tally {
                extra: self.extra + c,
                ..self
            },
        }
    }

    /// Cost value when straight steps have length `unit`.
    pub fn value(&self, unit: f64) -> f64 {
        self.extra + (self.straight as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2) * unit
    }
}

/// Graph searched by [`astar`].
pub trait SearchGraph {
    fn node_count(&self) -> usize;
    /// Length of a straight step.
    fn unit(&self) -> f64;
    fn neighbors(&self, node: usize, out: &mut Vec<(usize, Step)>);
    /// Admissible, consistent estimate of the remaining cost to `goal`.
    fn heuristic(&self, node: usize, goal: usize) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub nodes: Vec<usize>,
    pub cost: Tally,
}

#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    f: f64,
    g: f64,
    node: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // max-heap: smallest f first, then larger g, then smaller node index
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then(other.node.cmp(&self.node))
    }
}

/// A* from `start` to `goal`; `None` when the goal is unreachable.
pub fn astar<G: SearchGraph>(graph: &G, start: usize, goal: usize) -> Option<GridSearchResult> {
    let n = graph.node_count();
    let unit = graph.unit();
    let mut best: Vec<Option<Tally>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let mut scratch = Vec::with_capacity(16);

    best[start] = Some(Tally::default());
    open.push(OpenEntry {
        f: graph.heuristic(start, goal),
        g: 0.0,
        node: start,
    });
    while let Some(OpenEntry { node, .. }) = open.pop() {
        if closed[node] {
            continue;
        }
        closed[node] = true;
        if node == goal {
            let mut nodes = vec![goal];
            let mut cur = goal;
            while cur != start {
                cur = parent[cur];
                nodes.push(cur);
            }
            nodes.reverse();
            return Some(GridSearchResult {
                nodes,
                cost: best[goal].expect("goal reached"),
            });
        }
        let here = best[node].expect("expanded nodes have a cost");
        scratch.clear();
        graph.neighbors(node, &mut scratch);
        for &(next, step) in &scratch {
            if closed[next] {
                continue;
            }
            let cand = here.add(step);
            let g = cand.value(unit);
            if best[next].is_none_or(|b| g < b.value(unit)) {
                best[next] = Some(cand);
                parent[next] = node;
                open.push(OpenEntry {
                    f: g + graph.heuristic(next, goal),
                    g,
                    node: next,
                });
            }
        }
    }
    None
}

const DIRS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Boolean occupancy grid, row-major, `true` = blocked.
///
/// Diagonal moves require both adjacent orthogonal cells to be free.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub width: usize,
    pub height: usize,
    pub blocked: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, blocked: Vec<bool>) -> Self {
        assert_eq!(blocked.len(), width * height, "grid size mismatch");
        OccupancyGrid {
            width,
            height,
            blocked,
        }
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.width, idx / self.width)
    }

    pub fn is_free(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && !self.blocked[self.index(x as usize, y as usize)]
    }
}

impl SearchGraph for OccupancyGrid {
    fn node_count(&self) -> usize {
        self.width * self.height
    }

    fn unit(&self) -> f64 {
        1.0
    }

    fn neighbors(&self, node: usize, out: &mut Vec<(usize, Step)>) {
        let (x, y) = self.coords(node);
        let (x, y) = (x as i64, y as i64);
        for (dx, dy) in DIRS {
            let (nx, ny) = (x + dx, y + dy);
            if !self.is_free(nx, ny) {
                continue;
            }
            let step = if dx != 0 && dy != 0 {
                if !self.is_free(x + dx, y) || !self.is_free(x, y + dy) {
                    continue;
                }
                Step::Diagonal
            } else {
                Step::Straight
            };
            out.push((self.index(nx as usize, ny as usize), step));
        }
    }

    fn heuristic(&self, node: usize, goal: usize) -> f64 {
        let (x0, y0) = self.coords(node);
        let (x1, y1) = self.coords(goal);
        (x0 as f64 - x1 as f64).hypot(y0 as f64 - y1 as f64)
    }
}

/// Lattice of grid vertices over a point-robot workspace, with edges that pass
/// the steering test, plus virtual start and goal nodes attached per query.
pub struct Lattice<'a, T> {
    view: InflatedView<'a, T>,
    cell: f64,
    nx: usize,
    ny: usize,
    vertex_ok: Vec<bool>,
    /// Bit `k` set when the edge in direction `DIRS[k]` steers.
    edges: Vec<u8>,
    resolution: T,
}

struct QueryGraph<'l, 'a, T> {
    lattice: &'l Lattice<'a, T>,
    start_links: Vec<(usize, f64)>,
    goal_links: Vec<(usize, f64)>,
    goal_xy: (f64, f64),
}

fn xy<T: Real>(c: &Configuration<T>) -> (f64, f64) {
    match c {
        Configuration::Point2 { x, y } => (x.as_f64(), y.as_f64()),
        _ => panic!("grid lattice only supports point robots"),
    }
}

impl<'a, T: Real> Lattice<'a, T> {
    pub fn new(view: InflatedView<'a, T>, cell: f64, resolution: T) -> Self {
        assert!(cell > 0.0, "cell size must be > 0");
        let ws = view.env().workspace;
        let nx = (ws.width().as_f64() / cell + 1e-9).floor() as usize + 1;
        let ny = (ws.height().as_f64() / cell + 1e-9).floor() as usize + 1;
        let mut lattice = Lattice {
            view,
            cell,
            nx,
            ny,
            vertex_ok: vec![false; nx * ny],
            edges: vec![0; nx * ny],
            resolution,
        };
        for j in 0..ny {
            for i in 0..nx {
                let c = lattice.vertex(i, j);
                lattice.vertex_ok[j * nx + i] = is_valid(&c, &view);
            }
        }
        for j in 0..ny {
            for i in 0..nx {
                let idx = j * nx + i;
                if !lattice.vertex_ok[idx] {
                    continue;
                }
                // each undirected edge is checked once, from its lower-index endpoint
                for (k, (dx, dy)) in DIRS.iter().enumerate() {
                    let (ni, nj) = (i as i64 + dx, j as i64 + dy);
                    if ni < 0 || nj < 0 || ni >= nx as i64 || nj >= ny as i64 {
                        continue;
                    }
                    let nidx = nj as usize * nx + ni as usize;
                    if !lattice.vertex_ok[nidx] || nidx < idx {
                        continue;
                    }
                    let ok = steer_to(
                        &lattice.vertex(i, j),
                        &lattice.vertex(ni as usize, nj as usize),
                        &view,
                        resolution,
                    );
                    if ok {
                        lattice.edges[idx] |= 1 << k;
                        lattice.edges[nidx] |= 1 << opposite(k);
                    }
                }
            }
        }
        lattice
    }

    fn vertex(&self, i: usize, j: usize) -> Configuration<T> {
        let ws = self.view.env().workspace;
        Configuration::point(
            ws.x_min + T::lit(i as f64 * self.cell),
            ws.y_min + T::lit(j as f64 * self.cell),
        )
    }

    fn vertex_xy(&self, idx: usize) -> (f64, f64) {
        let ws = self.view.env().workspace;
        (
            ws.x_min.as_f64() + (idx % self.nx) as f64 * self.cell,
            ws.y_min.as_f64() + (idx / self.nx) as f64 * self.cell,
        )
    }

    /// Valid vertices within `radius` cells of `c` that `c` steers to.
    fn attachments(&self, c: &Configuration<T>, radius: i64) -> Vec<(usize, f64)> {
        let ws = self.view.env().workspace;
        let (x, y) = xy(c);
        let ci = ((x - ws.x_min.as_f64()) / self.cell).round() as i64;
        let cj = ((y - ws.y_min.as_f64()) / self.cell).round() as i64;
        let mut out = Vec::new();
        for j in cj - radius..=cj + radius {
            for i in ci - radius..=ci + radius {
                if i < 0 || j < 0 || i >= self.nx as i64 || j >= self.ny as i64 {
                    continue;
                }
                let idx = j as usize * self.nx + i as usize;
                if !self.vertex_ok[idx] {
                    continue;
                }
                let v = self.vertex(i as usize, j as usize);
                if steer_to(c, &v, &self.view, self.resolution) {
                    let (vx, vy) = self.vertex_xy(idx);
                    out.push((idx, (vx - x).hypot(vy - y)));
                }
            }
        }
        out
    }

    /// Grid-optimal path from `start` to `goal` through lattice vertices.
    pub fn search(&self, start: &Configuration<T>, goal: &Configuration<T>) -> Option<Path<T>> {
        let mut start_links = Vec::new();
        let mut goal_links = Vec::new();
        for radius in [2, 4, 8] {
            if start_links.is_empty() {
                start_links = self.attachments(start, radius);
            }
            if goal_links.is_empty() {
                goal_links = self.attachments(goal, radius);
            }
        }
        if start_links.is_empty() || goal_links.is_empty() {
            return None;
        }
        let graph = QueryGraph {
            lattice: self,
            start_links,
            goal_links,
            goal_xy: xy(goal),
        };
        let n = self.nx * self.ny;
        let found = astar(&graph, n, n + 1)?;
        let mut waypoints = Vec::with_capacity(found.nodes.len());
        for node in found.nodes {
            let c = if node == n {
                start.clone()
            } else if node == n + 1 {
                goal.clone()
            } else {
                self.vertex(node % self.nx, node / self.nx)
            };
            if waypoints.last() != Some(&c) {
                waypoints.push(c);
            }
        }
        if waypoints.len() == 1 {
            waypoints.push(goal.clone());
        }
        Some(Path { waypoints })
    }
}

fn opposite(k: usize) -> usize {
    let (dx, dy) = DIRS[k];
    DIRS.iter()
        .position(|&(a, b)| a == -dx && b == -dy)
        .expect("direction table is symmetric")
}

impl<T: Real> SearchGraph for QueryGraph<'_, '_, T> {
    fn node_count(&self) -> usize {
        self.lattice.nx * self.lattice.ny + 2
    }

    fn unit(&self) -> f64 {
        self.lattice.cell
    }

    fn neighbors(&self, node: usize, out: &mut Vec<(usize, Step)>) {
        let l = self.lattice;
        let n = l.nx * l.ny;
        if node == n {
            out.extend(self.start_links.iter().map(|&(v, d)| (v, Step::Free(d))));
            return;
        }
        if node == n + 1 {
            return;
        }
        let (i, j) = ((node % l.nx) as i64, (node / l.nx) as i64);
        let bits = l.edges[node];
        for (k, (dx, dy)) in DIRS.iter().enumerate() {
            if bits & (1 << k) != 0 {
                let nidx = (j + dy) as usize * l.nx + (i + dx) as usize;
                let step = if *dx != 0 && *dy != 0 {
                    Step::Diagonal
                } else {
                    Step::Straight
                };
                out.push((nidx, step));
            }
        }
        if let Some(&(_, d)) = self.goal_links.iter().find(|(v, _)| *v == node) {
            out.push((n + 1, Step::Free(d)));
        }
    }

    fn heuristic(&self, node: usize, _goal: usize) -> f64 {
        let n = self.lattice.nx * self.lattice.ny;
        if node >= n {
            return 0.0;
        }
        let (x, y) = self.lattice.vertex_xy(node);
        (x - self.goal_xy.0).hypot(y - self.goal_xy.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Environment, Obstacle, RobotModel, Workspace};
    use crate::steering::{path_cost, path_feasible};

    #[test]
    fn open_grid_diagonal_cost() {
        let g = OccupancyGrid::new(5, 5, vec![false; 25]);
        let r = astar(&g, 0, 24).unwrap();
        assert_eq!(r.cost.diagonal, 4);
        assert_eq!(r.cost.straight, 0);
        assert_eq!(r.nodes.len(), 5);
    }

    #[test]
    fn blocked_goal_unreachable() {
        let mut blocked = vec![false; 9];
        blocked[3] = true;
        blocked[4] = true;
        blocked[5] = true;
        let g = OccupancyGrid::new(3, 3, blocked);
        assert!(astar(&g, 0, 8).is_none());
    }

    #[test]
    fn no_corner_cutting() {
        // . #
        // # .
        let g = OccupancyGrid::new(2, 2, vec![false, true, true, false]);
        assert!(astar(&g, 0, 3).is_none());
    }

    #[test]
    fn lattice_path_in_free_space() {
        let env: Environment<f64> = Environment::new(
            "empty",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            vec![],
        );
        let lattice = Lattice::new(env.view(), 0.5, 0.05);
        let p = lattice
            .search(&Configuration::point(0.0, 0.0), &Configuration::point(10.0, 0.0))
            .unwrap();
        assert!((path_cost(&p, &env) - 10.0).abs() < 0.5);
        assert!(path_feasible(&p, &env.view(), 0.05));
    }

    #[test]
    fn lattice_path_around_wall() {
        let env: Environment<f64> = Environment::new(
            "wall",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            vec![Obstacle::from_bounds(9.0, 11.0, 0.0, 15.0)],
        );
        let lattice = Lattice::new(env.view(), 0.25, 0.05);
        let p = lattice
            .search(&Configuration::point(2.0, 2.0), &Configuration::point(18.0, 2.0))
            .unwrap();
        assert!(path_feasible(&p, &env.view(), 0.05));
        assert_eq!(p.first(), &Configuration::point(2.0, 2.0));
        assert_eq!(p.last(), &Configuration::point(18.0, 2.0));
        // must climb over y = 15
        assert!(p.waypoints.iter().any(|w| w.coords()[1] >= 15.0));
    }
}
