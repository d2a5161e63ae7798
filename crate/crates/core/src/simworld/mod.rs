//! Synthetic ground truth: analytic scenes with exact SDFs, camera paths,
//! sphere-traced depth and bounded-noise correspondences.

mod correspondences;
mod render;
mod scenario;
mod scene;
mod trajectory;

use thiserror::Error;

pub use correspondences::{generate_correspondences, SensorNoiseModel};
pub use render::{render_depth, sphere_trace, HIT_TOLERANCE, MAX_STEPS};
pub use scenario::{RegistrationSettings, Scenario};
pub use scene::{scene_sdf, Primitive, Scene};
pub use trajectory::{camera_pose, slerp, Trajectory};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("only {found} of {requested} co-visible features found")]
    InsufficientFeatures { found: usize, requested: usize },
    #[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Scenario { line: Option<usize>, message: String },
}
