//! Non-trivial query sampling for learning-based motion planning.
//!
//! The crate covers the whole offline pipeline: environment models and exact
//! collision checking, straight-line steering, classical expert planners,
//! uniform and non-trivial query sampling, dataset generation with optional
//! pruning of trivial segments, a small next-state prediction network, the
//! neural planner that rolls it out, and the benchmark grid that compares
//! models trained on differently sampled datasets.
//!
//! Numeric code is generic over [`Real`]; the aliases at the crate root fix
//! the scalar to `f64`, which is what the file formats and the CLI use.

pub mod bench;
pub mod bundled;
pub mod collision;
pub mod datagen;
pub mod env;
pub mod error;
pub mod expert;
pub mod manifest;
pub mod planner;
pub mod pnet;
pub mod sampling;
pub mod scalar;
pub mod seeding;
pub mod steering;

pub use error::{Error, Result};
pub use scalar::{wrap_angle, Real};

pub type Configuration = env::Configuration<f64>;
pub type Environment = env::Environment<f64>;
pub type Obstacle = env::Obstacle<f64>;
pub type Workspace = env::Workspace<f64>;
pub type RobotModel = env::RobotModel<f64>;
pub type InflatedView<'a> = collision::InflatedView<'a, f64>;
pub type Path = steering::Path<f64>;
pub type Query = sampling::Query<f64>;

pub type Configuration32 = env::Configuration<f32>;
pub type Environment32 = env::Environment<f32>;
pub type Path32 = steering::Path<f32>;
pub type Query32 = sampling::Query<f32>;

/// Version string written into every artifact's metadata.
pub const TOOL_VERSION: &str = concat!("ntq ", env!("CARGO_PKG_VERSION"));
