use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::render::sphere_trace;
use super::scene::Scene;
use super::SimError;
use crate::cesdf::CameraModel;
use crate::geom::RotoTranslation;
use crate::registration::CorrespondenceSet;

/// Range-proportional bounded noise with injected outliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorNoiseModel {
    /// Per-frame bound is `max(delta_fraction·range, delta_floor)`.
    pub delta_fraction: f64,
    pub delta_floor: f64,
    pub outlier_rate: f64,
    pub outlier_magnitude: f64,
    /// Noise magnitudes are drawn from `[0, noise_scale·δ]`. Values below 1
    /// keep the reported bounds while shrinking the actual noise; 0 gives
    /// exact correspondences.
    pub noise_scale: f64,
    #[serde(skip)]
    pub rng_seed: u64,
}

impl Default for SensorNoiseModel {
    fn default() -> Self {
        Self {
            delta_fraction: 0.02,
            delta_floor: 0.005,
            outlier_rate: 0.0,
            outlier_magnitude: 1.0,
            noise_scale: 1.0,
            rng_seed: 0,
        }
    }
}

impl SensorNoiseModel {
    /// Bound for a point at `range` meters in one frame.
    pub fn delta_at(&self, range: f64) -> f64 {
        (self.delta_fraction * range).max(self.delta_floor)
    }

    /// `max_range` is the farthest a correspondence can lie from either
    /// camera; outliers must be displaced farther than any inlier bound.
    pub fn validate(&self, max_range: f64) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidNoise(m));
        if !(self.delta_fraction >= 0.0 && self.delta_fraction.is_finite()) {
            return bad(format!("delta_fraction {} must be ≥ 0", self.delta_fraction));
        }
        if !(self.delta_floor > 0.0 && self.delta_floor.is_finite()) {
            return bad(format!("delta_floor {} must be > 0", self.delta_floor));
        }
        if !(0.0..1.0).contains(&self.outlier_rate) {
            return bad(format!("outlier_rate {} must lie in [0, 1)", self.outlier_rate));
        }
        if !(0.0..=1.0).contains(&self.noise_scale) {
            return bad(format!("noise_scale {} must lie in [0, 1]", self.noise_scale));
        }
        let max_delta = 2.0 * self.delta_at(max_range);
        if self.outlier_rate > 0.0 && !(self.outlier_magnitude > max_delta) {
            return bad(format!(
                "outlier_magnitude {} must exceed the largest combined bound {max_delta}",
                self.outlier_magnitude
            ));
        }
        Ok(())
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-6 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Noise vector with magnitude uniform in `[0, scale·delta)`, shrunk by a
/// relative 1e-9 so rounding cannot push a sum of two past the combined bound.
fn bounded_noise(rng: &mut ChaCha8Rng, delta: f64, scale: f64) -> Vector3<f64> {
    let dir = random_unit(rng);
    let mag: f64 = rng.random_range(0.0..1.0);
    dir * (mag * scale * delta * (1.0 - 1e-9))
}

/// Shortest visible-surface distance tolerance used by the co-visibility test.
const VISIBILITY_TOL: f64 = 1e-2;

fn visible_from(scene: &Scene, cam: &CameraModel, pose: &RotoTranslation, x: &Vector3<f64>) -> bool {
    let local = pose.inverse().transform_point(x);
    if local.z < cam.min_depth || local.z > cam.max_depth || cam.project(&local).is_none() {
        return false;
    }
    let to = x - pose.translation;
    let dist = to.norm();
    match sphere_trace(scene, &pose.translation, &(to / dist), dist + VISIBILITY_TOL) {
        Some(t) => t >= dist - VISIBILITY_TOL,
        None => false,
    }
}

/// Samples `count` surface points seen from both body→inertial poses and
/// returns noisy matches `a` (frame k) and `b` (frame k+1) with combined
/// bounds, plus the exact frame-k → frame-(k+1) motion.
pub fn generate_correspondences(
    scene: &Scene,
    cam: &CameraModel,
    pose_k: &RotoTranslation,
    pose_k1: &RotoTranslation,
    count: usize,
    noise: &SensorNoiseModel,
) -> Result<(CorrespondenceSet, RotoTranslation), SimError> {
    if count < 4 {
        return Err(SimError::InvalidNoise(format!("need at least 4 correspondences, got {count}")));
    }
    noise.validate(cam.max_depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.rng_seed);
    let truth = pose_k1.inverse().compose(pose_k);
    let inv_k = pose_k.inverse();
    let inv_k1 = pose_k1.inverse();

    let mut a = Vec::with_capacity(count);
    let mut b = Vec::with_capacity(count);
    let mut delta = Vec::with_capacity(count);
    let budget = 50 * count + 1000;
    let mut attempts = 0;
    while a.len() < count && attempts < budget {
        attempts += 1;
        let u = rng.random_range(0.0..cam.width as f64);
        let v = rng.random_range(0.0..cam.height as f64);
        let ray = Vector3::new((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
        let len = ray.norm();
        let dir = pose_k.rotation.apply(&(ray / len));
        let Some(t) = sphere_trace(scene, &pose_k.translation, &dir, cam.max_depth * len) else {
            continue;
        };
        let x = pose_k.translation + dir * t;
        let z = t / len;
        if z < cam.min_depth || z > cam.max_depth || !visible_from(scene, cam, pose_k1, &x) {
            continue;
        }
        let pa = inv_k.transform_point(&x);
        let pb = inv_k1.transform_point(&x);
        let (da, db) = (noise.delta_at(pa.norm()), noise.delta_at(pb.norm()));
        a.push(pa + bounded_noise(&mut rng, da, noise.noise_scale));
        b.push(pb + bounded_noise(&mut rng, db, noise.noise_scale));
        delta.push(da + db);
    }
    if a.len() < count {
        return Err(SimError::InsufficientFeatures {
            found: a.len(),
            requested: count,
        });
    }

    let outliers = (noise.outlier_rate * count as f64).round() as usize;
    let mut is_outlier = vec![false; count];
    for i in rand::seq::index::sample(&mut rng, count, outliers) {
        is_outlier[i] = true;
        b[i] += random_unit(&mut rng) * noise.outlier_magnitude;
    }
    for i in 0..count {
        if !is_outlier[i] {
            let r = (b[i] - truth.transform_point(&a[i])).norm();
            assert!(r <= delta[i], "generated inlier {i} violates its bound: {r} > {}", delta[i]);
        }
    }
    let set = CorrespondenceSet::new(a, b, delta).map_err(|e| SimError::InvalidNoise(e.to_string()))?;
    Ok((set, truth))
}
