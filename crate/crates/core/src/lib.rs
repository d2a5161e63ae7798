//! Certified frame-to-frame registration and a distance map that stays a
//! lower bound on obstacle distance despite odometry drift.
//!
//! * [`geom`]: scalar-last quaternions, rotations, rigid transforms.
//! * [`registration`]: GNC-TLS rotation and translation with error bounds.
//! * [`cesdf`]: TSDF/ESDF voxel map deflated by those bounds.
//! * [`simworld`]: analytic scenes, depth rendering, simulated correspondences.
//! * [`pipeline`]: the frame loop, ground-truth checks, traces and plot data.

pub mod cesdf;
pub mod geom;
mod linalg;
pub mod pipeline;
pub mod registration;
pub mod simworld;

pub use geom::{Rotation, RotoTranslation, UnitQuaternion};
pub use registration::{register, CorrespondenceSet, GncConfig, RegistrationResult};
