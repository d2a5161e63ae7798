//! Registers one simulated frame pair and checks the estimate against its
//! worst-case error bounds.

use certvo::geom::{frobenius_to_angle, RotoTranslation};
use certvo::simworld::{camera_pose, generate_correspondences, Scene, SensorNoiseModel};
use certvo::{register, GncConfig};
use nalgebra::Vector3;

fn main() {
    let scene = Scene::new(Scene::room([-3.0, -3.0, 0.0], [3.0, 3.0, 2.5])).unwrap();
    let cam = certvo::cesdf::CameraModel::with_fov(160, 120, 80.0, 0.2, 7.0);
    let prev = camera_pose(Vector3::new(0.0, 0.0, 1.2), 20.0, -5.0);
    let cur = camera_pose(Vector3::new(0.05, 0.02, 1.2), 22.0, -5.0);
    let noise = SensorNoiseModel {
        outlier_rate: 0.05,
        rng_seed: 7,
        ..Default::default()
    };
    let (c, truth): (_, RotoTranslation) =
        generate_correspondences(&scene, &cam, &prev, &cur, 300, &noise).expect("features");
    let r = register(&c, 0.05, 1000, &GncConfig::default(), 1).expect("registration");

    let rot_err = r.rotation_estimate.frobenius_distance(&truth.rotation);
    let t_err = (r.translation_estimate - truth.translation).norm();
    println!("edges {} converged {}", r.diagnostics.num_edges, r.converged);
    println!(
        "rotation error {rot_err:.5} ≤ ε_R {:.5} ({:.2}°)",
        r.epsilon_r,
        frobenius_to_angle(r.epsilon_r.min(2.8)).unwrap().to_degrees()
    );
    println!("translation error {t_err:.4} m ≤ ε_t {:.4} m", r.epsilon_t);
    let rejected = r.translation_weights.iter().filter(|w| **w < 0.5).count();
    println!("{rejected} of {} correspondences rejected", c.len());
}
