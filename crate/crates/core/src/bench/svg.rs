//! Deterministic SVG rendering of environments with paths and query scatters.

use std::fmt::Write;

use crate::collision::{forward_kinematics, transform_polygon};
use crate::env::{Configuration, Environment, RobotModel};
use crate::sampling::Query;
use crate::scalar::Real;
use crate::steering::Path;

/// Longest side of the drawing in pixels.
const CANVAS: f64 = 600.0;
const MARGIN: f64 = 10.0;

#[derive(Debug, Clone)]
pub enum Overlay<T> {
    /// Dashed outlines of the obstacles grown by this padding.
    Padding(T),
    Path {
        path: Path<T>,
        color: String,
        label: String,
    },
    /// Starts drawn as circles, goals as squares, joined by faint lines.
    Queries(Vec<Query<T>>),
    /// Robot footprint or arm links at one configuration.
    Pose {
        config: Configuration<T>,
        color: String,
    },
}

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Frame {
    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (
            MARGIN + (x - self.x0) * self.scale,
            MARGIN + (self.y1 - y) * self.scale,
        )
    }
}

fn coords_of<T: Real>(c: &Configuration<T>) -> Vec<f64> {
    c.coords().iter().map(|v| v.as_f64()).collect()
}

/// Workspace-plane points drawn for a configuration: the position for point
/// and rigid robots, the end effector for arms.
fn anchor<T: Real>(env: &Environment<T>, c: &Configuration<T>) -> (f64, f64) {
    match (&env.robot, c) {
        (RobotModel::NLinkArm { .. }, Configuration::Joints(q)) => forward_kinematics(q, &env.robot)
            .ok()
            .and_then(|segs| segs.last().map(|s| (s.1[0].as_f64(), s.1[1].as_f64())))
            .unwrap_or((0.0, 0.0)),
        _ => {
            let v = coords_of(c);
            (v[0], v[1])
        }
    }
}

fn pose_svg<T: Real>(out: &mut String, f: &Frame, env: &Environment<T>, c: &Configuration<T>, color: &str) {
    match (&env.robot, c) {
        (RobotModel::RigidBody { vertices }, Configuration::PoseSe2 { x, y, theta }) => {
            let pts: Vec<String> = transform_polygon(vertices, *x, *y, *theta)
                .iter()
                .map(|p| {
                    let (a, b) = f.px(p[0].as_f64(), p[1].as_f64());
                    format!("{a:.2},{b:.2}")
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polygon points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
                pts.join(" ")
            );
        }
        (RobotModel::NLinkArm { .. }, Configuration::Joints(q)) => {
            if let Ok(segs) = forward_kinematics(q, &env.robot) {
                for s in segs {
                    let (a, b) = f.px(s.0[0].as_f64(), s.0[1].as_f64());
                    let (c2, d) = f.px(s.1[0].as_f64(), s.1[1].as_f64());
                    let _ = writeln!(
                        out,
                        r#"<line x1="{a:.2}" y1="{b:.2}" x2="{c2:.2}" y2="{d:.2}" stroke="{color}" stroke-width="2"/>"#
                    );
                }
            }
        }
        _ => {
            let (a, b) = anchor(env, c);
            let (a, b) = f.px(a, b);
            let _ = writeln!(out, r#"<circle cx="{a:.2}" cy="{b:.2}" r="3" fill="{color}"/>"#);
        }
    }
}

/// Renders `env` and `overlays` as a standalone SVG document.
pub fn render_svg<T: Real>(env: &Environment<T>, overlays: &[Overlay<T>]) -> String {
    let ws = &env.workspace;
    let (x0, x1, y0, y1) = (
        ws.x_min.as_f64(),
        ws.x_max.as_f64(),
        ws.y_min.as_f64(),
        ws.y_max.as_f64(),
    );
    let scale = CANVAS / (x1 - x0).max(y1 - y0);
    let f = Frame { x0, y1, scale };
    let w = (x1 - x0) * scale + 2.0 * MARGIN;
    let h = (y1 - y0) * scale + 2.0 * MARGIN;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", env.name);
    let (ax, ay) = f.px(x0, y1);
    let _ = writeln!(
        out,
        r#"<rect x="{ax:.2}" y="{ay:.2}" width="{:.2}" height="{:.2}" fill="white" stroke="black" stroke-width="1.5"/>"#,
        (x1 - x0) * scale,
        (y1 - y0) * scale
    );
    let rect = |out: &mut String, b: (f64, f64, f64, f64), style: &str| {
        let (px, py) = f.px(b.0, b.3);
        let _ = writeln!(
            out,
            r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" {style}/>"#,
            (b.1 - b.0) * scale,
            (b.3 - b.2) * scale
        );
    };
    for o in &env.obstacles {
        let b = o.inflated_bounds(T::zero());
        rect(
            &mut out,
            (b.0.as_f64(), b.1.as_f64(), b.2.as_f64(), b.3.as_f64()),
            r##"fill="#555555""##,
        );
    }

    for overlay in overlays {
        match overlay {
            Overlay::Padding(p) => {
                for o in &env.obstacles {
                    let b = o.inflated_bounds(*p);
                    rect(
                        &mut out,
                        (b.0.as_f64(), b.1.as_f64(), b.2.as_f64(), b.3.as_f64()),
                        r##"fill="none" stroke="#888888" stroke-dasharray="4 3""##,
                    );
                }
            }
            Overlay::Path { path, color, label } => {
                let pts: Vec<String> = path
                    .waypoints
                    .iter()
                    .map(|c| {
                        let (a, b) = anchor(env, c);
                        let (a, b) = f.px(a, b);
                        format!("{a:.2},{b:.2}")
                    })
                    .collect();
                let data: Vec<String> = path
                    .waypoints
                    .iter()
                    .map(|c| {
                        let v: Vec<String> = coords_of(c).iter().map(|x| format!("{x}")).collect();
                        format!("[{}]", v.join(","))
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2" data-label="{label}" data-waypoints="[{}]"/>"#,
                    pts.join(" "),
                    data.join(",")
                );
                if !matches!(env.robot, RobotModel::Point) {
                    for c in &path.waypoints {
                        pose_svg(&mut out, &f, env, c, color);
                    }
                }
            }
            Overlay::Queries(queries) => {
                for q in queries {
                    let (sx, sy) = anchor(env, &q.start);
                    let (gx, gy) = anchor(env, &q.goal);
                    let (sx, sy) = f.px(sx, sy);
                    let (gx, gy) = f.px(gx, gy);
                    let _ = writeln!(
                        out,
                        r##"<line x1="{sx:.2}" y1="{sy:.2}" x2="{gx:.2}" y2="{gy:.2}" stroke="#999999" stroke-opacity="0.3"/>"##
                    );
                    let _ = writeln!(out, r##"<circle cx="{sx:.2}" cy="{sy:.2}" r="2.5" fill="#1b9e77"/>"##);
                    let _ = writeln!(
                        out,
                        r##"<rect x="{:.2}" y="{:.2}" width="5" height="5" fill="#d95f02"/>"##,
                        gx - 2.5,
                        gy - 2.5
                    );
                }
            }
            Overlay::Pose { config, color } => pose_svg(&mut out, &f, env, config, color),
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Obstacle, Workspace};

    #[test]
    fn empty_env_is_just_the_workspace() {
        let env: Environment<f64> = Environment::new(
            "empty",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            vec![],
        );
        let svg = render_svg(&env, &[]);
        assert_eq!(svg.matches("<rect").count(), 1);
        assert_eq!(svg, render_svg(&env, &[]));
    }

    #[test]
    fn path_waypoints_are_embedded() {
        let env: Environment<f64> = Environment::new(
            "wall",
            Workspace::new(0.0, 20.0, 0.0, 20.0),
            RobotModel::Point,
            vec![Obstacle::from_bounds(9.0, 11.0, 0.0, 15.0)],
        );
        let path = Path::new(vec![
            Configuration::point(2.0, 2.0),
            Configuration::point(8.5, 15.5),
            Configuration::point(18.0, 2.0),
        ])
        .unwrap();
        let svg = render_svg(
            &env,
            &[
                Overlay::Padding(0.8),
                Overlay::Path {
                    path,
                    color: "blue".into(),
                    label: "expert".into(),
                },
            ],
        );
        assert!(svg.contains(r#"data-waypoints="[[2,2],[8.5,15.5],[18,2]]""#));
        assert!(svg.contains("stroke-dasharray"));
    }
}
