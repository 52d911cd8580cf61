//! Exact validity tests for point, rigid-body and n-link robots.
//!
//! Boundary contact always counts as a collision. Padding grows obstacles only;
//! workspace containment is always tested against the original bounds.

use crate::env::{Configuration, Environment, Obstacle, RobotModel};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// An environment whose obstacles are grown by `padding` on every side.
#[derive(Debug, Clone, Copy)]
pub struct InflatedView<'a, T> {
    env: &'a Environment<T>,
    padding: T,
}

impl<'a, T: Real> InflatedView<'a, T> {
    /// # Panics
    /// If `padding` is negative or not finite.
    pub fn new(env: &'a Environment<T>, padding: T) -> Self {
        assert!(
            padding >= T::zero() && padding.is_finite(),
            "padding must be finite and >= 0"
        );
        InflatedView { env, padding }
    }

    pub fn env(&self) -> &'a Environment<T> {
        self.env
    }

    pub fn padding(&self) -> T {
        self.padding
    }
}

/// Whether configuration `c` is collision free in `view`.
///
/// Returns `false` for configurations of the wrong type; see [`check_valid`] for
/// a variant that reports the mismatch.
pub fn is_valid<T: Real>(c: &Configuration<T>, view: &InflatedView<'_, T>) -> bool {
    let env = view.env;
    let pad = view.padding;
    match (c, &env.robot) {
        (Configuration::Point2 { x, y }, RobotModel::Point) => {
            env.workspace.contains(*x, *y)
                && !env
                    .obstacles
                    .iter()
                    .any(|o| point_in_obstacle(*x, *y, o, pad))
        }
        (Configuration::PoseSe2 { x, y, theta }, RobotModel::RigidBody { vertices }) => {
            pose_valid(*x, *y, *theta, vertices, env, pad)
        }
        (Configuration::Joints(q), RobotModel::NLinkArm { link_lengths, base })
            if q.len() == link_lengths.len() =>
        {
            arm_valid(q, link_lengths, *base, env, pad)
        }
        _ => false,
    }
}

pub fn check_valid<T: Real>(c: &Configuration<T>, view: &InflatedView<'_, T>) -> Result<bool> {
    view.env.check_config(c)?;
    Ok(is_valid(c, view))
}

#[inline]
fn point_in_obstacle<T: Real>(x: T, y: T, o: &Obstacle<T>, pad: T) -> bool {
    (x - o.cx).abs() <= o.half_w + pad && (y - o.cy).abs() <= o.half_h + pad
}

/// Body-frame polygon placed at pose `(x, y, theta)`.
pub fn transform_polygon<T: Real>(vertices: &[[T; 2]], x: T, y: T, theta: T) -> Vec<[T; 2]> {
    let (s, c) = theta.sin_cos();
    vertices
        .iter()
        .map(|v| [x + c * v[0] - s * v[1], y + s * v[0] + c * v[1]])
        .collect()
}

fn pose_valid<T: Real>(
    x: T,
    y: T,
    theta: T,
    body: &[[T; 2]],
    env: &Environment<T>,
    pad: T,
) -> bool {
    let poly = transform_polygon(body, x, y, theta);
    if !poly.iter().all(|p| env.workspace.contains(p[0], p[1])) {
        return false;
    }
    !env
        .obstacles
        .iter()
        .any(|o| polygon_hits_box(&poly, o.inflated_bounds(pad)))
}

/// Separating-axis overlap test between a convex polygon and a box
/// `(x_min, x_max, y_min, y_max)`. Touching counts as overlap.
pub fn polygon_hits_box<T: Real>(poly: &[[T; 2]], bounds: (T, T, T, T)) -> bool {
    let (bx0, bx1, by0, by1) = bounds;
    let (mut px0, mut px1) = (T::infinity(), T::neg_infinity());
    let (mut py0, mut py1) = (T::infinity(), T::neg_infinity());
    for p in poly {
        px0 = px0.min(p[0]);
        px1 = px1.max(p[0]);
        py0 = py0.min(p[1]);
        py1 = py1.max(p[1]);
    }
    if px1 < bx0 || px0 > bx1 || py1 < by0 || py0 > by1 {
        return false;
    }
    let corners = [[bx0, by0], [bx1, by0], [bx1, by1], [bx0, by1]];
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let axis = [b[1] - a[1], a[0] - b[0]];
        let project = |p: &[T; 2]| axis[0] * p[0] + axis[1] * p[1];
        let (mut lo_p, mut hi_p) = (T::infinity(), T::neg_infinity());
        for p in poly {
            let v = project(p);
            lo_p = lo_p.min(v);
            hi_p = hi_p.max(v);
        }
        let (mut lo_b, mut hi_b) = (T::infinity(), T::neg_infinity());
        for p in &corners {
            let v = project(p);
            lo_b = lo_b.min(v);
            hi_b = hi_b.max(v);
        }
        if hi_p < lo_b || hi_b < lo_p {
            return false;
        }
    }
    true
}

/// A 2D line segment `[start, end]`.
pub type Segment<T> = ([T; 2], [T; 2]);

/// Link segments of an arm, base first. Link `k` points along the sum of the
/// first `k + 1` joint angles.
pub fn forward_kinematics<T: Real>(q: &[T], robot: &RobotModel<T>) -> Result<Vec<Segment<T>>> {
    match robot {
        RobotModel::NLinkArm { link_lengths, base } => {
            if q.len() != link_lengths.len() {
                return Err(Error::DimensionMismatch {
                    expected: format!("{} joint angles", link_lengths.len()),
                    got: format!("{} joint angles", q.len()),
                });
            }
            Ok(fk_segments(q, link_lengths, *base))
        }
        _ => Err(Error::InvalidInput(
            "forward kinematics requires an n-link arm".into(),
        )),
    }
}

fn fk_segments<T: Real>(q: &[T], lengths: &[T], base: [T; 2]) -> Vec<Segment<T>> {
    let mut out = Vec::with_capacity(q.len());
    let mut p = base;
    let mut angle = T::zero();
    for (qi, li) in q.iter().zip(lengths) {
        angle = angle + *qi;
        let (s, c) = angle.sin_cos();
        let next = [p[0] + *li * c, p[1] + *li * s];
        out.push((p, next));
        p = next;
    }
    out
}

fn arm_valid<T: Real>(q: &[T], lengths: &[T], base: [T; 2], env: &Environment<T>, pad: T) -> bool {
    let segs = fk_segments(q, lengths, base);
    if !env.arm_may_leave_workspace
        && !segs
            .iter()
            .all(|(a, b)| env.workspace.contains(a[0], a[1]) && env.workspace.contains(b[0], b[1]))
    {
        return false;
    }
    !segs.iter().any(|(a, b)| {
        env.obstacles
            .iter()
            .any(|o| segment_hits_obstacle(*a, *b, o, pad))
    })
}

/// Exact segment/box overlap by slab clipping; contact with the boundary counts.
pub fn segment_hits_obstacle<T: Real>(p: [T; 2], q: [T; 2], obs: &Obstacle<T>, padding: T) -> bool {
    let (x0, x1, y0, y1) = obs.inflated_bounds(padding);
    let mut t_lo = T::zero();
    let mut t_hi = T::one();
    for (start, delta, lo, hi) in [(p[0], q[0] - p[0], x0, x1), (p[1], q[1] - p[1], y0, y1)] {
        if delta == T::zero() {
            if start < lo || start > hi {
                return false;
            }
            continue;
        }
        let inv = T::one() / delta;
        let mut ta = (lo - start) * inv;
        let mut tb = (hi - start) * inv;
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t_lo = t_lo.max(ta);
        t_hi = t_hi.min(tb);
        if t_lo > t_hi {
            return false;
        }
    }
    true
}
