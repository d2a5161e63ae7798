//! Reads correspondences from a text file (`a_x a_y a_z b_x b_y b_z delta`
//! per line) and registers them. Without an argument, a demo file is
//! written to a temporary directory first.
//!
//! `cargo run --example register_from_file -- pairs.txt`

use certvo::geom::{RotoTranslation, UnitQuaternion};
use certvo::registration::{read_correspondences, write_correspondences};
use certvo::{register, CorrespondenceSet, GncConfig};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn demo_file(dir: &std::path::Path) -> std::path::PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let motion = RotoTranslation::new(
        UnitQuaternion::from_axis_angle(&Vector3::new(0.1, 1.0, 0.0), 0.05).to_rotation(),
        Vector3::new(0.02, 0.0, -0.04),
    );
    let mut a = Vec::new();
    let mut b = Vec::new();
    for _ in 0..200 {
        let p = Vector3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-1.5..1.5),
            rng.random_range(1.0..5.0),
        );
        a.push(p);
        b.push(motion.transform_point(&p) + Vector3::from_fn(|_, _| rng.random_range(-0.004..0.004)));
    }
    let c = CorrespondenceSet::new(a, b, vec![0.01; 200]).unwrap();
    let path = dir.join("pairs.txt");
    write_correspondences(&path, &c).unwrap();
    println!("true translation {:?}", motion.translation.as_slice());
    path
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let path = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| demo_file(tmp.path()));
    let c = match read_correspondences(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            std::process::exit(2);
        }
    };
    match register(&c, 0.05, 1000, &GncConfig::default(), 0) {
        Ok(r) => {
            println!("{} correspondences from {}", c.len(), path.display());
            println!("R̂ = {}", r.rotation_estimate.matrix());
            println!("t̂ = {:?}", r.translation_estimate.as_slice());
            println!("ε_R = {:.5}, ε_t = {:.5} m", r.epsilon_r, r.epsilon_t);
        }
        Err(e) => {
            eprintln!("registration failed: {e}");
            std::process::exit(2);
        }
    }
}
