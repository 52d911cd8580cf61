//! Environments shipped with the crate.

use crate::env::{Configuration, Environment};
use crate::error::Result;
use crate::sampling::Query;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Point,
    RigidBody,
    Arm,
    Reference,
}

#[derive(Debug, Clone, Copy)]
pub struct BundledEnv {
    pub name: &'static str,
    pub family: Family,
    /// Obstacle padding used when generating training data.
    pub padding: f64,
    pub toml: &'static str,
    /// A trivial query whose endpoints are more than one unit apart.
    pub showcase: (&'static [f64], &'static [f64]),
}

impl BundledEnv {
    pub fn environment<T: Real>(&self) -> Result<Environment<T>> {
        Environment::from_toml_str(self.toml, std::path::Path::new(self.name))
    }

    pub fn showcase_query<T: Real>(&self) -> Result<Query<T>> {
        let env: Environment<T> = self.environment()?;
        let cast = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        Ok(Query::new(
            Configuration::from_coords(env.config_kind(), &cast(self.showcase.0))?,
            Configuration::from_coords(env.config_kind(), &cast(self.showcase.1))?,
        ))
    }
}

macro_rules! bundled {
    ($name:literal, $family:expr, $padding:expr, $start:expr, $goal:expr) => {
        BundledEnv {
            name: $name,
            family: $family,
            padding: $padding,
            toml: include_str!(concat!("../envs/", $name, ".toml")),
            showcase: (&$start, &$goal),
        }
    };
}

pub const BUNDLED: [BundledEnv; 14] = [
    bundled!("empty", Family::Reference, 0.8, [2.0, 2.0], [18.0, 18.0]),
    bundled!("wall", Family::Reference, 0.8, [2.0, 18.0], [18.0, 18.0]),
    bundled!("point_env0", Family::Point, 0.8, [1.5, 18.5], [6.0, 18.5]),
    bundled!("point_env1", Family::Point, 0.8, [1.5, 10.0], [6.0, 10.0]),
    bundled!("point_env2", Family::Point, 0.8, [1.5, 5.0], [3.5, 9.0]),
    bundled!("point_env3", Family::Point, 0.8, [1.5, 5.0], [1.5, 12.0]),
    bundled!("rigid_env0", Family::RigidBody, 0.4, [1.5, 2.0, 0.0], [3.5, 4.0, 0.5]),
    bundled!("rigid_env1", Family::RigidBody, 0.4, [1.0, 5.0, 0.0], [4.5, 5.0, 0.0]),
    bundled!("rigid_env2", Family::RigidBody, 0.4, [1.0, 2.0, 1.5], [1.5, 5.0, 1.5]),
    bundled!("rigid_env3", Family::RigidBody, 0.4, [1.2, 1.5, 1.5], [1.2, 5.0, 1.5]),
    bundled!("arm2_env", Family::Arm, 0.1, [-1.0, 0.6], [-2.4, 0.6]),
    bundled!("arm3_env", Family::Arm, 0.1, [-1.3, 1.3, -1.2], [-2.7, 1.3, -1.2]),
    bundled!("arm4_env", Family::Arm, 0.1, [-0.3, -1.4, -1.5, -0.9], [1.1, -1.4, -1.5, -0.9]),
    bundled!("arm6_env", Family::Arm, 0.1, [-0.3, -0.4, -1.4, -1.5, 0.1, 1.2], [-1.7, -0.4, -1.4, -1.5, 0.1, 1.2]),
];

pub fn find(name: &str) -> Option<&'static BundledEnv> {
    BUNDLED.iter().find(|b| b.name == name)
}
