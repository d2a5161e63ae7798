#![allow(dead_code)]

use certvo::cesdf::{
    certified_distance, deflate, integrate_depth, propagate_esdf, reset_corrections_in_fov, CameraModel, GridConfig, MapPoseEstimate, VoxelGrid,
};
use certvo::geom::{angle_to_frobenius, Rotation, RotoTranslation, UnitQuaternion};
use certvo::registration::CorrespondenceSet;
use certvo::simworld::{render_depth, Primitive, Scene};
use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v: Vector3<f64> = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_pose(rng: &mut ChaCha8Rng, max_angle: f64, max_t: f64) -> RotoTranslation {
    let q = UnitQuaternion::from_axis_angle(&random_unit(rng), rng.random_range(0.0..max_angle));
    RotoTranslation::new(q.to_rotation(), random_unit(rng) * rng.random_range(0.0..max_t))
}

/// Random pair with `b = pose(a)` plus noise of norm at most δ_i, where
/// δ_i = max(2% of range, 5 mm). The first `outliers` points are moved
/// 1–3 m off. Returns the set and the outlier count.
pub fn synthetic_pair(
    rng: &mut ChaCha8Rng,
    n: usize,
    pose: &RotoTranslation,
    noisy: bool,
    outliers: usize,
) -> CorrespondenceSet {
    let (mut a, mut b, mut d) = (Vec::new(), Vec::new(), Vec::new());
    for i in 0..n {
        let p: Vector3<f64> = Vector3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-1.5..1.5),
            rng.random_range(1.0..6.0),
        );
        let delta = (0.02 * p.norm()).max(0.005_f64);
        let mut q = pose.transform_point(&p);
        if noisy {
            q += random_unit(rng) * delta * rng.random_range(0.0..1.0);
        }
        if i < outliers {
            q += random_unit(rng) * rng.random_range(1.0..3.0);
        }
        a.push(p);
        b.push(q);
        d.push(delta);
    }
    CorrespondenceSet::new(a, b, d).unwrap()
}

/// The two-frame wall example: a wall 1 m ahead, the body moves 0.1 m
/// toward it, and the estimate is 2 cm short with a 5° rotation error.
pub struct WallExample {
    pub true_distance: f64,
    pub uncorrected: f64,
    pub certified: f64,
    pub epsilon_r: f64,
    pub delta: f64,
}

pub fn wall_example(resolution: f64) -> WallExample {
    // camera z forward; the wall is the half-space z ≥ 1
    let scene = Scene::new(vec![Primitive::Plane {
        normal: [0.0, 0.0, -1.0],
        offset: -1.0,
    }])
    .unwrap();
    let n = |len: f64| (len / resolution).round() as usize;
    let cfg = GridConfig::new([-0.3, -0.1, -0.1], resolution, [n(0.6), n(0.2), n(1.3)]);
    let mut grid = VoxelGrid::new(&cfg).unwrap();
    let cam = CameraModel::with_fov(320, 240, 120.0, 0.05, 3.0);
    let pose0 = RotoTranslation::identity();
    let depth = render_depth(&scene, &cam, &pose0);
    integrate_depth(&mut grid, &depth, &cam, &pose0).unwrap();
    reset_corrections_in_fov(&mut grid, &cam, &pose0, &depth);
    propagate_esdf(&mut grid, false);

    let angle = 5f64.to_radians();
    let epsilon_r = angle_to_frobenius(angle).unwrap();
    let epsilon_t = 0.02;
    let pose1 = RotoTranslation::new(
        Rotation::from_axis_angle(&Vector3::y(), angle),
        Vector3::new(0.0, 0.0, 0.1 - epsilon_t),
    );
    let delta = pose1.inverse().compose(&pose0);
    let p = Vector3::new(0.05, 0.0, 0.4);
    // the approximate approach reads the stored distance as is
    let uncorrected = grid.esdf()[grid.locate(&pose1.transform_point(&p)).unwrap()];
    deflate(
        &mut grid,
        &MapPoseEstimate {
            pose: pose1,
            delta,
            epsilon_r,
            epsilon_t,
        },
    );
    WallExample {
        true_distance: 1.0 - (0.1 + p.z),
        uncorrected,
        certified: certified_distance(&grid, &pose1, &p).unwrap(),
        epsilon_r,
        delta: epsilon_r * (p - delta.translation).norm() + epsilon_t,
    }
}
