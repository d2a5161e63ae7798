use nalgebra::{Matrix3, Vector3, Vector4};

use super::SimError;
use crate::geom::{Rotation, RotoTranslation, UnitQuaternion};

/// Body→inertial pose of a camera at `position` looking along heading `yaw`
/// (about inertial +z, 0 = +x) and elevation `pitch` (positive looks up).
/// The inertial frame is z-up; the camera frame is z forward, x right, y down.
pub fn camera_pose(position: Vector3<f64>, yaw_deg: f64, pitch_deg: f64) -> RotoTranslation {
    // columns: camera x, y, z axes expressed in the inertial frame at yaw = pitch = 0
    let base = Matrix3::new(0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 0.0, -1.0, 0.0);
    let yaw = Rotation::from_axis_angle(&Vector3::z(), yaw_deg.to_radians());
    let pitch = Rotation::from_axis_angle(&Vector3::y(), -pitch_deg.to_radians());
    let base = Rotation::from_matrix(base).expect("base camera orientation is a rotation");
    RotoTranslation::new(yaw.compose(&pitch).compose(&base), position)
}

/// Spherical interpolation along the shorter arc.
pub fn slerp(a: &UnitQuaternion, b: &UnitQuaternion, s: f64) -> UnitQuaternion {
    let qa = *a.coords();
    let mut qb = *b.coords();
    let mut dot = qa.dot(&qb);
    if dot < 0.0 {
        qb = -qb;
        dot = -dot;
    }
    let v: Vector4<f64> = if dot > 0.9995 {
        qa + (qb - qa) * s
    } else {
        let theta = dot.min(1.0).acos();
        let sin = theta.sin();
        qa * (((1.0 - s) * theta).sin() / sin) + qb * ((s * theta).sin() / sin)
    };
    UnitQuaternion::from_vector(v).expect("slerp of unit quaternions is nonzero")
}

/// Piecewise pose path: linear in position, spherical in orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    keyframes: Vec<(f64, RotoTranslation)>,
    frame_rate: f64,
}

impl Trajectory {
    pub fn new(keyframes: Vec<(f64, RotoTranslation)>, frame_rate: f64) -> Result<Self, SimError> {
        if keyframes.is_empty() {
            return Err(SimError::InvalidTrajectory("no keyframes".into()));
        }
        if !(frame_rate > 0.0 && frame_rate.is_finite()) {
            return Err(SimError::InvalidTrajectory(format!("frame rate {frame_rate} must be positive")));
        }
        for w in keyframes.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(SimError::InvalidTrajectory(format!(
                    "keyframe times must increase strictly ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if keyframes.iter().any(|(t, p)| !t.is_finite() || !p.translation.iter().all(|x| x.is_finite())) {
            return Err(SimError::InvalidTrajectory("non-finite keyframe".into()));
        }
        Ok(Self { keyframes, frame_rate })
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn keyframes(&self) -> &[(f64, RotoTranslation)] {
        &self.keyframes
    }

    pub fn start(&self) -> f64 {
        self.keyframes[0].0
    }

    pub fn duration(&self) -> f64 {
        self.keyframes[self.keyframes.len() - 1].0 - self.start()
    }

    /// Frames `k = 0..num_frames()` sampled at `start + k / frame_rate`.
    pub fn num_frames(&self) -> usize {
        ((self.duration() * self.frame_rate).round() as usize).max(1)
    }

    pub fn frame_time(&self, k: usize) -> f64 {
        self.start() + k as f64 / self.frame_rate
    }

    pub fn frame_pose(&self, k: usize) -> RotoTranslation {
        self.pose_at(self.frame_time(k))
    }

    /// Pose at time `t`, clamped to the keyframe span.
    pub fn pose_at(&self, t: f64) -> RotoTranslation {
        let kf = &self.keyframes;
        if t <= kf[0].0 {
            return kf[0].1;
        }
        let last = kf.len() - 1;
        if t >= kf[last].0 {
            return kf[last].1;
        }
        let seg = kf.partition_point(|(tk, _)| *tk <= t) - 1;
        let (t0, p0) = kf[seg];
        let (t1, p1) = kf[seg + 1];
        let s = (t - t0) / (t1 - t0);
        let q = slerp(&p0.rotation.to_quaternion(), &p1.rotation.to_quaternion(), s);
        RotoTranslation::new(q.to_rotation(), p0.translation.lerp(&p1.translation, s))
    }
}
