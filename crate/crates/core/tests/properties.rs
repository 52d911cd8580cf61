use ntq_core::collision::{is_valid, segment_hits_obstacle};
use ntq_core::env::{config_distance, interpolate, Configuration, Environment, Obstacle, RobotModel, Workspace};
use ntq_core::pnet::{AngleEncoding, Codec};
use ntq_core::sampling::{estimate_gamma_nt, non_trivial_query};
use ntq_core::seeding::stream_rng;
use ntq_core::steering::steer_to;
use ntq_core::wrap_angle;
use proptest::prelude::*;
use std::f64::consts::PI;

fn wall() -> Environment<f64> {
    Environment::new(
        "wall",
        Workspace::new(0.0, 20.0, 0.0, 20.0),
        RobotModel::Point,
        vec![Obstacle::from_bounds(9.0, 11.0, 0.0, 15.0)],
    )
}

fn rigid() -> Environment<f64> {
    Environment::new(
        "rigid",
        Workspace::new(0.0, 10.0, 0.0, 10.0),
        RobotModel::RigidBody {
            vertices: vec![[-0.4, -0.15], [0.4, -0.15], [0.4, 0.15], [-0.4, 0.15]],
        },
        vec![Obstacle::from_bounds(4.5, 5.5, 0.0, 6.5)],
    )
}

fn angle() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

fn pose() -> impl Strategy<Value = Configuration<f64>> {
    (0.0..10.0f64, 0.0..10.0f64, angle()).prop_map(|(x, y, t)| Configuration::pose(x, y, wrap_angle(t)))
}

fn joints3() -> impl Strategy<Value = Configuration<f64>> {
    prop::collection::vec(-PI..PI, 3).prop_map(Configuration::joints)
}

proptest! {
    #[test]
    fn wrap_angle_lands_in_half_open_interval(a in -1e3..1e3f64) {
        let w = wrap_angle(a);
        prop_assert!(w > -PI && w <= PI);
        let turns = (a - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn se2_distance_is_a_metric(a in pose(), b in pose(), c in pose()) {
        let d = |u: &Configuration<f64>, v: &Configuration<f64>| config_distance(u, v, 0.5).unwrap();
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
        prop_assert_eq!(d(&a, &a), 0.0);
    }

    #[test]
    fn joint_distance_is_a_metric(a in joints3(), b in joints3(), c in joints3()) {
        let d = |u: &Configuration<f64>, v: &Configuration<f64>| config_distance(u, v, 1.0).unwrap();
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }

    #[test]
    fn interpolation_hits_endpoints_and_splits_distance(a in pose(), b in pose(), t in 0.0..1.0f64) {
        prop_assert_eq!(interpolate(&a, &b, 0.0).unwrap(), a.clone());
        prop_assert_eq!(interpolate(&a, &b, 1.0).unwrap(), b.clone());
        let m = interpolate(&a, &b, t).unwrap();
        let total = config_distance(&a, &b, 0.5).unwrap();
        let parts = config_distance(&a, &m, 0.5).unwrap() + config_distance(&m, &b, 0.5).unwrap();
        prop_assert!((total - parts).abs() < 1e-9);
    }

    #[test]
    fn steering_is_symmetric(x0 in 0.0..20.0f64, y0 in 0.0..20.0f64, x1 in 0.0..20.0f64, y1 in 0.0..20.0f64) {
        let env = wall();
        let v = env.inflated(0.8);
        let a = Configuration::point(x0, y0);
        let b = Configuration::point(x1, y1);
        prop_assert_eq!(steer_to(&a, &b, &v, 0.05), steer_to(&b, &a, &v, 0.05));
    }

    #[test]
    fn finer_resolution_never_admits_more(a in pose(), b in pose()) {
        let env = rigid();
        let v = env.view();
        if steer_to(&a, &b, &v, 0.025) {
            prop_assert!(steer_to(&a, &b, &v, 0.05));
        }
    }

    #[test]
    fn steering_agrees_with_exact_segment_test_away_from_grazing(
        x0 in 0.0..20.0f64, y0 in 0.0..20.0f64, x1 in 0.0..20.0f64, y1 in 0.0..20.0f64
    ) {
        let env = wall();
        let v = env.view();
        let (a, b) = (Configuration::point(x0, y0), Configuration::point(x1, y1));
        prop_assume!(is_valid(&a, &v) && is_valid(&b, &v));
        let obs = &env.obstacles[0];
        let hits = segment_hits_obstacle([x0, y0], [x1, y1], obs, 0.0);
        let clearly_hits = segment_hits_obstacle([x0, y0], [x1, y1], obs, -0.05);
        if !hits {
            prop_assert!(steer_to(&a, &b, &v, 0.05));
        }
        if clearly_hits {
            prop_assert!(!steer_to(&a, &b, &v, 0.05));
        }
    }

    #[test]
    fn codec_round_trips(c in pose()) {
        let env = rigid();
        for enc in [AngleEncoding::SinCos, AngleEncoding::Wrapped] {
            let codec = Codec::for_environment(&env, enc);
            let mut f = Vec::new();
            codec.encode_into(&c, &mut f);
            let back = codec.decode(&f);
            prop_assert!(config_distance(&c, &back, 1.0).unwrap() < 1e-9);
        }
    }
}

#[test]
fn flagged_non_trivial_queries_do_not_steer() {
    let env = wall();
    let view = env.inflated(0.8);
    let mut rng = stream_rng(11, 0);
    for _ in 0..500 {
        let s = non_trivial_query(&view, 100, 0.05, &mut rng).unwrap();
        if s.non_trivial {
            assert!(!steer_to(&s.query.start, &s.query.goal, &view, 0.05));
        }
    }
}

#[test]
fn gamma_estimates_are_deterministic_and_seed_consistent() {
    let env = wall();
    let view = env.view();
    let a = estimate_gamma_nt(&view, 20_000, 0.05, 1).unwrap();
    assert_eq!(a, estimate_gamma_nt(&view, 20_000, 0.05, 1).unwrap());
    let b = estimate_gamma_nt(&view, 20_000, 0.05, 2).unwrap();
    let sigma = (a.sigma().powi(2) + b.sigma().powi(2)).sqrt();
    assert!((a.gamma - b.gamma).abs() <= 3.0 * sigma, "{a:?} vs {b:?}");
}

#[test]
fn adding_an_obstacle_does_not_lower_gamma() {
    let base = wall();
    let mut more = wall();
    more.obstacles.push(Obstacle::from_bounds(3.0, 5.0, 12.0, 14.0));
    let a = estimate_gamma_nt(&base.view(), 20_000, 0.05, 5).unwrap();
    let b = estimate_gamma_nt(&more.view(), 20_000, 0.05, 5).unwrap();
    let sigma = (a.sigma().powi(2) + b.sigma().powi(2)).sqrt();
    assert!(b.gamma >= a.gamma - 3.0 * sigma, "{a:?} vs {b:?}");
}
