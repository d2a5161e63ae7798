use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::SimError;

/// Analytic obstacle. Planes are half-spaces: the obstacle is the side
/// opposite the (unit) normal, `{p : n·p ≤ offset}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Primitive {
    Sphere { center: [f64; 3], radius: f64 },
    #[serde(rename = "box")]
    AxisBox { min: [f64; 3], max: [f64; 3] },
    Plane { normal: [f64; 3], offset: f64 },
}

impl Primitive {
    pub fn sdf(&self, p: &Vector3<f64>) -> f64 {
        match self {
            Primitive::Sphere { center, radius } => (p - Vector3::from(*center)).norm() - radius,
            Primitive::AxisBox { min, max } => {
                let lo = Vector3::from(*min);
                let hi = Vector3::from(*max);
                let c = (lo + hi) * 0.5;
                let h = (hi - lo) * 0.5;
                let q = (p - c).abs() - h;
                let outside = q.sup(&Vector3::zeros()).norm();
                outside + q.max().min(0.0)
            }
            Primitive::Plane { normal, offset } => Vector3::from(*normal).dot(p) - offset,
        }
    }

    fn validate(&self) -> Result<Self, SimError> {
        match self {
            Primitive::Sphere { radius, .. } if !(*radius > 0.0) => {
                Err(SimError::InvalidScene(format!("sphere radius {radius} must be positive")))
            }
            Primitive::AxisBox { min, max } if (0..3).any(|k| !(max[k] > min[k])) => {
                Err(SimError::InvalidScene(format!("box {min:?}..{max:?} has a non-positive extent")))
            }
            Primitive::Plane { normal, offset } => {
                let n = Vector3::from(*normal);
                let len = n.norm();
                if !(len > 0.0) {
                    return Err(SimError::InvalidScene("plane normal is zero".into()));
                }
                let u = n / len;
                Ok(Primitive::Plane {
                    normal: [u.x, u.y, u.z],
                    offset: offset / len,
                })
            }
            p => Ok(p.clone()),
        }
    }
}

/// Union of primitives in the inertial frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    primitives: Vec<Primitive>,
}

impl Scene {
    /// Validates extents and normalizes plane normals.
    pub fn new(primitives: Vec<Primitive>) -> Result<Self, SimError> {
        if primitives.is_empty() {
            return Err(SimError::InvalidScene("scene has no primitives".into()));
        }
        let primitives = primitives.iter().map(Primitive::validate).collect::<Result<_, _>>()?;
        Ok(Self { primitives })
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    /// Axis-aligned room: six inward-facing planes enclosing `[lo, hi]`.
    pub fn room(lo: [f64; 3], hi: [f64; 3]) -> Vec<Primitive> {
        let mut out = Vec::new();
        for k in 0..3 {
            let mut n = [0.0; 3];
            n[k] = 1.0;
            out.push(Primitive::Plane { normal: n, offset: lo[k] });
            n[k] = -1.0;
            out.push(Primitive::Plane { normal: n, offset: -hi[k] });
        }
        out
    }
}

/// Distance to the nearest obstacle, negative inside.
pub fn scene_sdf(scene: &Scene, p: &Vector3<f64>) -> f64 {
    scene
        .primitives
        .iter()
        .map(|s| s.sdf(p))
        .fold(f64::INFINITY, f64::min)
}
