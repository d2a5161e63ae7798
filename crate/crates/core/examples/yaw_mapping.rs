//! A camera yawing in place: voxels that leave the view collect deflation,
//! voxels in view are refreshed and keep a zero correction.

use certvo::cesdf::{CameraModel, GridConfig, MappingConfig, MappingState, VoxelGrid};
use certvo::geom::RotoTranslation;
use certvo::simworld::{camera_pose, render_depth, Scene};
use nalgebra::Vector3;

fn main() {
    let scene = Scene::new(Scene::room([-2.0, -2.0, 0.0], [2.0, 2.0, 2.0])).unwrap();
    let cam = CameraModel::with_fov(96, 72, 80.0, 0.2, 5.0);
    let grid = VoxelGrid::new(&GridConfig::new([-2.5, -2.5, -0.5], 0.1, [50, 50, 30])).unwrap();
    let pose_at = |k: usize| camera_pose(Vector3::new(0.0, 0.0, 1.0), 6.0 * k as f64, 0.0);
    let config = MappingConfig {
        esdf_period: 1,
        ..Default::default()
    };
    let mut map = MappingState::new(grid, cam, pose_at(0), config).unwrap();
    map.initialize(&render_depth(&scene, &cam, &pose_at(0))).unwrap();
    let ahead = map.grid.locate(&Vector3::new(1.5, 0.0, 1.0)).unwrap();

    for k in 1..=15 {
        // exact relative motion with small bounds, as a registration would report
        let delta: RotoTranslation = pose_at(k).inverse().compose(&pose_at(k - 1));
        let rep = map.step(&render_depth(&scene, &cam, &pose_at(k)), &delta, 0.01, 0.005).unwrap();
        let corrected = map.grid.correction().iter().filter(|c| **c > 0.0).count();
        println!(
            "frame {k:>2}: yaw {:>3}°, {:>5} refreshed, {corrected:>6} deflated, correction ahead {:.3} m",
            6 * k,
            rep.reset,
            map.grid.correction()[ahead]
        );
    }
}
