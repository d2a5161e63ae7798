use nalgebra::Vector3;
use rayon::prelude::*;

use super::scene::{scene_sdf, Scene};
use crate::cesdf::{CameraModel, DepthImage, INVALID_DEPTH};
use crate::geom::RotoTranslation;

/// A march stops once the SDF drops below this.
pub const HIT_TOLERANCE: f64 = 1e-4;
pub const MAX_STEPS: usize = 256;
const STEP_SCALE: f64 = 0.9;

/// Distance along the unit ray `origin + t·dir` to the first surface, if one
/// is reached within `max_t`.
pub fn sphere_trace(scene: &Scene, origin: &Vector3<f64>, dir: &Vector3<f64>, max_t: f64) -> Option<f64> {
    let mut t = 0.0;
    for _ in 0..MAX_STEPS {
        let s = scene_sdf(scene, &(origin + dir * t));
        if s < HIT_TOLERANCE {
            return Some(t);
        }
        t += STEP_SCALE * s;
        if t > max_t {
            return None;
        }
    }
    None
}

/// Z-depth image seen from `pose` (body→inertial). Misses, unconverged
/// marches and returns beyond `max_depth` are [`INVALID_DEPTH`].
pub fn render_depth(scene: &Scene, cam: &CameraModel, pose: &RotoTranslation) -> DepthImage {
    let (w, h) = (cam.width, cam.height);
    let mut data = vec![INVALID_DEPTH; w * h];
    let origin = pose.translation;
    data.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
        for (i, px) in row.iter_mut().enumerate() {
            let ray = cam.pixel_ray(i, j);
            let len = ray.norm();
            let dir = pose.rotation.apply(&(ray / len));
            if let Some(t) = sphere_trace(scene, &origin, &dir, cam.max_depth * len) {
                let z = t / len;
                if z <= cam.max_depth {
                    *px = z;
                }
            }
        }
    });
    DepthImage::new(w, h, data).expect("buffer sized from the camera")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simworld::{camera_pose, Primitive};

    fn cam() -> CameraModel {
        CameraModel::with_fov(64, 48, 70.0, 0.1, 10.0)
    }

    #[test]
    fn facing_plane() {
        // camera at the origin looking down inertial +z is the identity pose
        let scene = Scene::new(vec![Primitive::Plane {
            normal: [0.0, 0.0, -1.0],
            offset: -2.0,
        }])
        .unwrap();
        let img = render_depth(&scene, &cam(), &RotoTranslation::identity());
        let d = img.get(32, 24);
        assert!((d - 2.0).abs() < 1e-4, "{d}");
        assert!(img.data().iter().all(|d| (d - 2.0).abs() < 1e-4));
    }

    #[test]
    fn miss_is_invalid() {
        let scene = Scene::new(vec![Primitive::Sphere {
            center: [0.0, 0.0, -5.0],
            radius: 1.0,
        }])
        .unwrap();
        let img = render_depth(&scene, &cam(), &RotoTranslation::identity());
        assert!(img.data().iter().all(|d| *d == INVALID_DEPTH));
        // beyond max depth
        let far = Scene::new(vec![Primitive::Plane {
            normal: [0.0, 0.0, -1.0],
            offset: -20.0,
        }])
        .unwrap();
        let img = render_depth(&far, &cam(), &RotoTranslation::identity());
        assert!(img.data().iter().all(|d| *d == INVALID_DEPTH));
    }

    #[test]
    fn reprojected_hits_lie_on_surfaces() {
        let scene = Scene::new(vec![
            Primitive::Sphere {
                center: [3.0, 0.3, 1.0],
                radius: 0.8,
            },
            Primitive::Sphere {
                center: [5.0, -1.0, 0.5],
                radius: 1.2,
            },
            Primitive::AxisBox {
                min: [4.0, 0.5, 0.0],
                max: [4.5, 1.5, 2.0],
            },
            Primitive::Plane {
                normal: [0.0, 0.0, 1.0],
                offset: -0.5,
            },
        ])
        .unwrap();
        let c = cam();
        let pose = camera_pose(Vector3::new(0.0, 0.0, 1.0), 5.0, -10.0);
        let img = render_depth(&scene, &c, &pose);
        let mut valid = 0;
        for j in 0..c.height {
            for i in 0..c.width {
                let d = img.get(i, j);
                if d == INVALID_DEPTH {
                    continue;
                }
                valid += 1;
                let p = pose.transform_point(&(c.pixel_ray(i, j) * d));
                assert!(scene_sdf(&scene, &p).abs() < 1e-3);
            }
        }
        assert!(valid > c.width * c.height / 2);
    }
}
