//! Workspaces, obstacles, robot models and their configuration spaces.
//!
//! Environments are stored as TOML documents:
//!
//! ```toml
//! # Name used in reports and dataset metadata.
//! name = "wall"
//! # Weight of the heading term in the SE(2) metric (world units per radian).
//! w_theta = 1.0
//! # Only meaningful for arms: let links reach outside the drawn workspace.
//! arm_may_leave_workspace = false
//!
//! [workspace]
//! x_min = 0.0
//! x_max = 20.0
//! y_min = 0.0
//! y_max = 20.0
//!
//! # kind = "point" | "rigid_body" (vertices = [[x, y], ...], convex, CCW)
//! #      | "n_link_arm" (link_lengths = [...], base = [x, y])
//! [robot]
//! kind = "point"
//!
//! [[obstacles]]
//! cx = 10.0
//! cy = 7.5
//! half_w = 1.0
//! half_h = 7.5
//! ```

use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collision::{is_valid, InflatedView};
use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Real};

/// Attempts used when checking that an environment has any free space.
pub const FREE_SPACE_PROBE_BUDGET: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct Workspace<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Real> Workspace<T> {
    pub fn new(x_min: T, x_max: T, y_min: T, y_max: T) -> Self {
        Workspace {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    #[inline]
    pub fn contains(&self, x: T, y: T) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> T {
        self.y_max - self.y_min
    }
}

/// Axis-aligned rectangular obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct Obstacle<T> {
    pub cx: T,
    pub cy: T,
    pub half_w: T,
    pub half_h: T,
}

impl<T: Real> Obstacle<T> {
    pub fn new(cx: T, cy: T, half_w: T, half_h: T) -> Self {
        Obstacle {
            cx,
            cy,
            half_w,
            half_h,
        }
    }

    /// Builds an obstacle from its corner coordinates.
    pub fn from_bounds(x0: T, x1: T, y0: T, y1: T) -> Self {
        let two = T::lit(2.0);
        Obstacle {
            cx: (x0 + x1) / two,
            cy: (y0 + y1) / two,
            half_w: (x1 - x0).abs() / two,
            half_h: (y1 - y0).abs() / two,
        }
    }

    /// `(x_min, x_max, y_min, y_max)` after growing by `padding` on every side.
    #[inline]
    pub fn inflated_bounds(&self, padding: T) -> (T, T, T, T) {
        let hw = self.half_w + padding;
        let hh = self.half_h + padding;
        (self.cx - hw, self.cx + hw, self.cy - hh, self.cy + hh)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RobotModel<T> {
    Point,
    /// Convex polygon, counterclockwise, in the body frame.
    RigidBody { vertices: Vec<[T; 2]> },
    NLinkArm { link_lengths: Vec<T>, base: [T; 2] },
}

impl<T: Real> RobotModel<T> {
    pub fn config_kind(&self) -> ConfigKind {
        match self {
            RobotModel::Point => ConfigKind::Point2,
            RobotModel::RigidBody { .. } => ConfigKind::PoseSe2,
            RobotModel::NLinkArm { link_lengths, .. } => ConfigKind::Joints(link_lengths.len()),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            RobotModel::Point => "point",
            RobotModel::RigidBody { .. } => "rigid_body",
            RobotModel::NLinkArm { .. } => "n_link_arm",
        }
    }
}

/// Shape of a configuration space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigKind {
    Point2,
    PoseSe2,
    Joints(usize),
}

impl ConfigKind {
    /// Number of scalar coordinates.
    pub fn dim(self) -> usize {
        match self {
            ConfigKind::Point2 => 2,
            ConfigKind::PoseSe2 => 3,
            ConfigKind::Joints(n) => n,
        }
    }

    /// Whether coordinate `i` is an angle.
    pub fn is_angular(self, i: usize) -> bool {
        match self {
            ConfigKind::Point2 => false,
            ConfigKind::PoseSe2 => i == 2,
            ConfigKind::Joints(_) => true,
        }
    }

    /// Compact numeric tag used by the binary file formats.
    pub fn tag(self) -> (u8, u32) {
        match self {
            ConfigKind::Point2 => (0, 2),
            ConfigKind::PoseSe2 => (1, 3),
            ConfigKind::Joints(n) => (2, n as u32),
        }
    }

    pub fn from_tag(tag: u8, dim: u32) -> Option<Self> {
        match (tag, dim) {
            (0, 2) => Some(ConfigKind::Point2),
            (1, 3) => Some(ConfigKind::PoseSe2),
            (2, n) if n >= 1 => Some(ConfigKind::Joints(n as usize)),
            _ => None,
        }
    }
}

impl fmt::Display for ConfigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigKind::Point2 => write!(f, "point2"),
            ConfigKind::PoseSe2 => write!(f, "pose_se2"),
            ConfigKind::Joints(n) => write!(f, "joints[{n}]"),
        }
    }
}

/// Robot state. Angles are kept in `(-pi, pi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum Configuration<T> {
    Point2 { x: T, y: T },
    PoseSe2 { x: T, y: T, theta: T },
    Joints(Vec<T>),
}

impl<T: Real> Configuration<T> {
    pub fn point(x: T, y: T) -> Self {
        Configuration::Point2 { x, y }
    }

    pub fn pose(x: T, y: T, theta: T) -> Self {
        Configuration::PoseSe2 {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn joints(angles: impl IntoIterator<Item = T>) -> Self {
        Configuration::Joints(angles.into_iter().map(wrap_angle).collect())
    }

    pub fn kind(&self) -> ConfigKind {
        match self {
            Configuration::Point2 { .. } => ConfigKind::Point2,
            Configuration::PoseSe2 { .. } => ConfigKind::PoseSe2,
            Configuration::Joints(q) => ConfigKind::Joints(q.len()),
        }
    }

    /// Flat coordinate list (`[x, y]`, `[x, y, theta]` or the joint angles).
    pub fn coords(&self) -> Vec<T> {
        match self {
            Configuration::Point2 { x, y } => vec![*x, *y],
            Configuration::PoseSe2 { x, y, theta } => vec![*x, *y, *theta],
            Configuration::Joints(q) => q.clone(),
        }
    }

    /// Inverse of [`Configuration::coords`]; wraps angular coordinates.
    pub fn from_coords(kind: ConfigKind, c: &[T]) -> Result<Self> {
        if c.len() != kind.dim() {
            return Err(Error::DimensionMismatch {
                expected: kind.to_string(),
                got: format!("{} coordinates", c.len()),
            });
        }
        Ok(match kind {
            ConfigKind::Point2 => Configuration::point(c[0], c[1]),
            ConfigKind::PoseSe2 => Configuration::pose(c[0], c[1], c[2]),
            ConfigKind::Joints(_) => Configuration::joints(c.iter().copied()),
        })
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> Configuration<U> {
        let f = |v: T| U::lit(v.as_f64());
        match self {
            Configuration::Point2 { x, y } => Configuration::Point2 { x: f(*x), y: f(*y) },
            Configuration::PoseSe2 { x, y, theta } => Configuration::PoseSe2 {
                x: f(*x),
                y: f(*y),
                theta: f(*theta),
            },
            Configuration::Joints(q) => Configuration::Joints(q.iter().map(|v| f(*v)).collect()),
        }
    }

    /// Total order on raw coordinates, used to canonicalize segment direction.
    pub(crate) fn lex_cmp(&self, other: &Self) -> std::cmp::Ordering {
        let a = self.coords();
        let b = other.coords();
        for (x, y) in a.iter().zip(&b) {
            match x.partial_cmp(y) {
                Some(std::cmp::Ordering::Equal) | None => continue,
                Some(o) => return o,
            }
        }
        a.len().cmp(&b.len())
    }
}

fn mismatch<T: Real>(a: &Configuration<T>, b: &Configuration<T>) -> Error {
    Error::DimensionMismatch {
        expected: a.kind().to_string(),
        got: b.kind().to_string(),
    }
}

/// Distance between two configurations of the same type.
///
/// SE(2) uses `sqrt(dx^2 + dy^2 + (w_theta * wrap(dtheta))^2)`; joint vectors
/// use the Euclidean norm of wrapped componentwise differences.
pub fn config_distance<T: Real>(
    a: &Configuration<T>,
    b: &Configuration<T>,
    w_theta: T,
) -> Result<T> {
    if a.kind() != b.kind() {
        return Err(mismatch(a, b));
    }
    Ok(distance_unchecked(a, b, w_theta))
}

#[inline]
pub(crate) fn distance_unchecked<T: Real>(
    a: &Configuration<T>,
    b: &Configuration<T>,
    w_theta: T,
) -> T {
    match (a, b) {
        (Configuration::Point2 { x: x0, y: y0 }, Configuration::Point2 { x: x1, y: y1 }) => {
            (*x1 - *x0).hypot(*y1 - *y0)
        }
        (
            Configuration::PoseSe2 {
                x: x0,
                y: y0,
                theta: t0,
            },
            Configuration::PoseSe2 {
                x: x1,
                y: y1,
                theta: t1,
            },
        ) => {
            let dx = *x1 - *x0;
            let dy = *y1 - *y0;
            let dt = w_theta * wrap_angle(*t1 - *t0);
            (dx * dx + dy * dy + dt * dt).sqrt()
        }
        (Configuration::Joints(p), Configuration::Joints(q)) => {
            debug_assert_eq!(p.len(), q.len());
            p.iter()
                .zip(q)
                .map(|(u, v)| {
                    let d = wrap_angle(*v - *u);
                    d * d
                })
                .fold(T::zero(), |s, v| s + v)
                .sqrt()
        }
        _ => T::nan(),
    }
}

/// Point on the straight segment from `a` to `b`; angles follow the shorter arc.
pub fn interpolate<T: Real>(
    a: &Configuration<T>,
    b: &Configuration<T>,
    t: T,
) -> Result<Configuration<T>> {
    if a.kind() != b.kind() {
        return Err(mismatch(a, b));
    }
    if !(t >= T::zero() && t <= T::one()) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t.as_f64(),
            expected: "0 <= t <= 1",
        });
    }
    Ok(interpolate_unchecked(a, b, t))
}

#[inline]
fn lerp<T: Real>(u: T, v: T, t: T) -> T {
    u * (T::one() - t) + v * t
}

#[inline]
fn lerp_angle<T: Real>(u: T, v: T, t: T) -> T {
    wrap_angle(u + wrap_angle(v - u) * t)
}

pub(crate) fn interpolate_unchecked<T: Real>(
    a: &Configuration<T>,
    b: &Configuration<T>,
    t: T,
) -> Configuration<T> {
    if t == T::zero() {
        return a.clone();
    }
    if t == T::one() {
        return b.clone();
    }
    match (a, b) {
        (Configuration::Point2 { x: x0, y: y0 }, Configuration::Point2 { x: x1, y: y1 }) => {
            Configuration::Point2 {
                x: lerp(*x0, *x1, t),
                y: lerp(*y0, *y1, t),
            }
        }
        (
            Configuration::PoseSe2 {
                x: x0,
                y: y0,
                theta: t0,
            },
            Configuration::PoseSe2 {
                x: x1,
                y: y1,
                theta: t1,
            },
        ) => Configuration::PoseSe2 {
            x: lerp(*x0, *x1, t),
            y: lerp(*y0, *y1, t),
            theta: lerp_angle(*t0, *t1, t),
        },
        (Configuration::Joints(p), Configuration::Joints(q)) => Configuration::Joints(
            p.iter().zip(q).map(|(u, v)| lerp_angle(*u, *v, t)).collect(),
        ),
        _ => a.clone(),
    }
}

fn default_w_theta<T: Real>() -> T {
    T::one()
}

/// A planning problem instance: workspace, obstacles and robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
pub struct Environment<T> {
    pub name: String,
    pub workspace: Workspace<T>,
    pub robot: RobotModel<T>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle<T>>,
    #[serde(default = "default_w_theta")]
    pub w_theta: T,
    #[serde(default)]
    pub arm_may_leave_workspace: bool,
}

impl<T: Real> Environment<T> {
    pub fn new(
        name: impl Into<String>,
        workspace: Workspace<T>,
        robot: RobotModel<T>,
        obstacles: Vec<Obstacle<T>>,
    ) -> Self {
        Environment {
            name: name.into(),
            workspace,
            robot,
            obstacles,
            w_theta: T::one(),
            arm_may_leave_workspace: false,
        }
    }

    pub fn config_kind(&self) -> ConfigKind {
        self.robot.config_kind()
    }

    /// View with obstacles grown by `padding`.
    pub fn inflated(&self, padding: T) -> InflatedView<'_, T> {
        InflatedView::new(self, padding)
    }

    /// Unpadded view.
    pub fn view(&self) -> InflatedView<'_, T> {
        InflatedView::new(self, T::zero())
    }

    pub fn distance(&self, a: &Configuration<T>, b: &Configuration<T>) -> T {
        distance_unchecked(a, b, self.w_theta)
    }

    pub fn check_config(&self, c: &Configuration<T>) -> Result<()> {
        if c.kind() != self.config_kind() {
            return Err(Error::ModelMismatch {
                config: c.kind().to_string(),
                robot: self.robot.label().to_string(),
            });
        }
        Ok(())
    }

    /// Uniform draw from the configuration-space bounding box (validity not checked).
    pub fn sample_config<R: Rng + ?Sized>(&self, rng: &mut R) -> Configuration<T> {
        let ws = &self.workspace;
        let pi = T::PI();
        match &self.robot {
            RobotModel::Point => Configuration::Point2 {
                x: rng.gen_range(ws.x_min..=ws.x_max),
                y: rng.gen_range(ws.y_min..=ws.y_max),
            },
            RobotModel::RigidBody { .. } => Configuration::PoseSe2 {
                x: rng.gen_range(ws.x_min..=ws.x_max),
                y: rng.gen_range(ws.y_min..=ws.y_max),
                theta: wrap_angle(rng.gen_range(-pi..=pi)),
            },
            RobotModel::NLinkArm { link_lengths, .. } => Configuration::Joints(
                (0..link_lengths.len())
                    .map(|_| wrap_angle(rng.gen_range(-pi..=pi)))
                    .collect(),
            ),
        }
    }

    /// Lower and upper coordinate bounds of the configuration space.
    pub fn config_bounds(&self) -> (Vec<T>, Vec<T>) {
        let ws = &self.workspace;
        let pi = T::PI();
        match self.config_kind() {
            ConfigKind::Point2 => (vec![ws.x_min, ws.y_min], vec![ws.x_max, ws.y_max]),
            ConfigKind::PoseSe2 => (
                vec![ws.x_min, ws.y_min, -pi],
                vec![ws.x_max, ws.y_max, pi],
            ),
            ConfigKind::Joints(n) => (vec![-pi; n], vec![pi; n]),
        }
    }

    /// Checks every structural invariant, naming the first offending field.
    pub fn validate(&self) -> Result<()> {
        let ws = &self.workspace;
        let finite = |v: T| v.is_finite();
        for (field, v) in [
            ("workspace.x_min", ws.x_min),
            ("workspace.x_max", ws.x_max),
            ("workspace.y_min", ws.y_min),
            ("workspace.y_max", ws.y_max),
        ] {
            if !finite(v) {
                return Err(Error::validation(field, "must be finite"));
            }
        }
        if !(ws.x_min < ws.x_max) {
            return Err(Error::validation("workspace.x_max", "must exceed x_min"));
        }
        if !(ws.y_min < ws.y_max) {
            return Err(Error::validation("workspace.y_max", "must exceed y_min"));
        }
        if !(self.w_theta > T::zero() && self.w_theta.is_finite()) {
            return Err(Error::validation("w_theta", "must be positive and finite"));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(finite(o.cx) && finite(o.cy)) {
                return Err(Error::validation(format!("obstacles[{i}].cx"), "must be finite"));
            }
            if !(o.half_w > T::zero() && finite(o.half_w)) {
                return Err(Error::validation(
                    format!("obstacles[{i}].half_w"),
                    format!("must be > 0 (got {})", o.half_w),
                ));
            }
            if !(o.half_h > T::zero() && finite(o.half_h)) {
                return Err(Error::validation(
                    format!("obstacles[{i}].half_h"),
                    format!("must be > 0 (got {})", o.half_h),
                ));
            }
            let (x0, x1, y0, y1) = o.inflated_bounds(T::zero());
            if x1 < ws.x_min || x0 > ws.x_max || y1 < ws.y_min || y0 > ws.y_max {
                return Err(Error::validation(
                    format!("obstacles[{i}]"),
                    "rectangle does not intersect the workspace",
                ));
            }
        }
        match &self.robot {
            RobotModel::Point => {}
            RobotModel::RigidBody { vertices } => validate_polygon(vertices)?,
            RobotModel::NLinkArm { link_lengths, base } => {
                if link_lengths.is_empty() {
                    return Err(Error::validation(
                        "robot.link_lengths",
                        "arm needs at least one link",
                    ));
                }
                for (i, l) in link_lengths.iter().enumerate() {
                    if !(*l > T::zero() && l.is_finite()) {
                        return Err(Error::validation(
                            format!("robot.link_lengths[{i}]"),
                            format!("must be > 0 (got {l})"),
                        ));
                    }
                }
                if !(finite(base[0]) && finite(base[1])) {
                    return Err(Error::validation("robot.base", "must be finite"));
                }
            }
        }
        self.check_free_space()
    }

    fn check_free_space(&self) -> Result<()> {
        let view = self.view();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f4ee);
        for _ in 0..FREE_SPACE_PROBE_BUDGET {
            let c = self.sample_config(&mut rng);
            if is_valid(&c, &view) {
                return Ok(());
            }
        }
        Err(Error::validation(
            "obstacles",
            format!("no free configuration found in {FREE_SPACE_PROBE_BUDGET} samples"),
        ))
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let env: Environment<T> = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        env.validate()?;
        Ok(env)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("environment serializes to TOML")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_toml_string())?;
        Ok(())
    }
}

/// Reads and validates an environment file.
pub fn load_environment<T: Real>(path: impl AsRef<Path>) -> Result<Environment<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    Environment::from_toml_str(&text, path)
}

fn validate_polygon<T: Real>(vertices: &[[T; 2]]) -> Result<()> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::validation(
            "robot.vertices",
            format!("polygon needs at least 3 vertices (got {n})"),
        ));
    }
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let c = vertices[(i + 2) % n];
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if !(cross > T::zero()) {
            return Err(Error::validation(
                format!("robot.vertices[{}]", (i + 1) % n),
                "polygon must be convex and counterclockwise",
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn point_env(obstacles: Vec<Obstacle<f64>>) -> Environment<f64> {
        Environment::new(
            "t",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            obstacles,
        )
    }

    #[test]
    fn distance_examples() {
        let d = config_distance(
            &Configuration::point(0.0, 0.0),
            &Configuration::point(3.0, 4.0),
            1.0,
        )
        .unwrap();
        assert_eq!(d, 5.0);

        let a = Configuration::pose(0.0, 0.0, PI - 0.1);
        let b = Configuration::pose(0.0, 0.0, -PI + 0.1);
        let d = config_distance(&a, &b, 1.0).unwrap();
        assert!((d - 0.2).abs() < 1e-12);
        let d = config_distance(&a, &b, 2.5).unwrap();
        assert!((d - 0.5).abs() < 1e-12);

        let z = Configuration::joints([0.0, 0.0]);
        assert_eq!(config_distance(&z, &z, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn distance_rejects_mismatch() {
        let err = config_distance(
            &Configuration::point(0.0, 0.0),
            &Configuration::joints([0.0, 0.0]),
            1.0,
        );
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        let err = config_distance(
            &Configuration::joints([0.0]),
            &Configuration::joints([0.0, 0.0]),
            1.0,
        );
        assert!(err.is_err());
    }

    #[test]
    fn interpolation_examples() {
        let m = interpolate(
            &Configuration::point(0.0, 0.0),
            &Configuration::point(10.0, 0.0),
            0.5,
        )
        .unwrap();
        assert_eq!(m, Configuration::point(5.0, 0.0));

        let a = Configuration::pose(0.0, 0.0, PI - 0.1);
        let b = Configuration::pose(0.0, 0.0, -PI + 0.1);
        match interpolate(&a, &b, 0.5).unwrap() {
            Configuration::PoseSe2 { theta, .. } => assert!((theta.abs() - PI).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }

        let j = interpolate(
            &Configuration::joints([0.0]),
            &Configuration::joints([PI / 2.0]),
            1.0,
        )
        .unwrap();
        assert_eq!(j, Configuration::joints([PI / 2.0]));
    }

    #[test]
    fn interpolation_rejects_bad_t() {
        let a = Configuration::point(0.0, 0.0);
        assert!(matches!(
            interpolate(&a, &a, 1.5),
            Err(Error::OutOfRange { name: "t", .. })
        ));
        assert!(interpolate(&a, &a, f64::NAN).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let d = config_distance(
            &Configuration::point(0.0f32, 0.0),
            &Configuration::point(3.0f32, 4.0),
            1.0,
        )
        .unwrap();
        assert_eq!(d, 5.0f32);
    }

    #[test]
    fn validation_names_field() {
        let env = point_env(vec![Obstacle::new(5.0, 5.0, -1.0, 1.0)]);
        match env.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "obstacles[0].half_w"),
            other => panic!("expected validation error, got {other:?}"),
        }
        let env = point_env(vec![Obstacle::new(50.0, 5.0, 1.0, 1.0)]);
        assert!(env.validate().is_err());
        let mut env = point_env(vec![]);
        env.workspace.x_max = -1.0;
        assert!(matches!(env.validate(), Err(Error::Validation { .. })));
    }

    #[test]
    fn full_coverage_has_no_free_space() {
        let env = point_env(vec![Obstacle::new(10.0, 10.0, 11.0, 11.0)]);
        match env.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "obstacles"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn polygon_must_be_ccw_convex() {
        let cw = RobotModel::RigidBody {
            vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]],
        };
        let env = Environment::new("r", Workspace::new(0.0, 10.0, 0.0, 10.0), cw, vec![]);
        assert!(env.validate().is_err());
        let ccw = RobotModel::RigidBody {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        };
        let env = Environment::new("r", Workspace::new(0.0, 10.0, 0.0, 10.0), ccw, vec![]);
        env.validate().unwrap();
    }

    #[test]
    fn parse_documented_example() {
        let text = r#"
            name = "wall"
            [workspace]
            x_min = 0.0
            x_max = 20.0
            y_min = 0.0
            y_max = 20.0
            [robot]
            kind = "point"
            [[obstacles]]
            cx = 10.0
            cy = 7.5
            half_w = 1.0
            half_h = 7.5
        "#;
        let env: Environment<f64> = Environment::from_toml_str(text, Path::new("inline")).unwrap();
        assert_eq!(env.obstacles.len(), 1);
        assert_eq!(env.w_theta, 1.0);
        assert!(!env.arm_may_leave_workspace);
    }

    #[test]
    fn parse_errors_are_reported() {
        let err = Environment::<f64>::from_toml_str("name = ", Path::new("bad.toml"));
        assert!(matches!(err, Err(Error::Parse { .. })));
        let err = Environment::<f64>::from_toml_str(
            "name='x'\nbogus=1\n[workspace]\nx_min=0\nx_max=1\ny_min=0\ny_max=1\n[robot]\nkind='point'\n",
            Path::new("bad.toml"),
        );
        assert!(matches!(err, Err(Error::Parse { .. })));
    }
}
