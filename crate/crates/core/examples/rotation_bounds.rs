//! The rotation error bound over all edges against the sampled star bound
//! as the number of sampling iterations grows.

use certvo::registration::{build_pair_graph, gnc_tls_rotation, rotation_bound_full, rotation_bound_sampled};
use certvo::simworld::{camera_pose, generate_correspondences, Scene, SensorNoiseModel};
use certvo::GncConfig;
use nalgebra::Vector3;

fn main() {
    let scene = Scene::new(Scene::room([-3.0, -3.0, 0.0], [3.0, 3.0, 2.5])).unwrap();
    let cam = certvo::cesdf::CameraModel::with_fov(160, 120, 80.0, 0.2, 7.0);
    let prev = camera_pose(Vector3::new(0.5, -0.5, 1.0), 45.0, 0.0);
    let cur = camera_pose(Vector3::new(0.52, -0.48, 1.0), 46.0, 0.0);
    let noise = SensorNoiseModel {
        rng_seed: 11,
        ..Default::default()
    };
    let (c, truth) = generate_correspondences(&scene, &cam, &prev, &cur, 300, &noise).unwrap();
    let g = build_pair_graph(&c, 0.05, 5).unwrap();
    let r_hat = gnc_tls_rotation(&g, &GncConfig::default()).unwrap().quaternion.to_rotation();
    println!("true error    {:.5}", r_hat.frobenius_distance(&truth.rotation));
    println!("all-edge bound {:.5} over {} edges", rotation_bound_full(&g, &r_hat).unwrap(), g.num_edges());
    for it in [1, 10, 100, 1000, 10000] {
        let b = rotation_bound_sampled(&g, &r_hat, it, 9).unwrap();
        println!("sampled, {it:>5} iterations: {b:.5}");
    }
}
