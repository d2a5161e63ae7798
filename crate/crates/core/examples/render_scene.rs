//! Sphere-traces a depth image of a scenario's scene and prints it as
//! ASCII shading, nearest surfaces darkest.

use certvo::simworld::{render_depth, Scenario};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/lab-yaw.toml").into());
    let sc = Scenario::load(&path).unwrap_or_else(|e| {
        eprintln!("{path}: {e}");
        std::process::exit(2);
    });
    let t = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(2.5);
    let pose = sc.trajectory.pose_at(t);
    let img = render_depth(&sc.scene, &sc.camera, &pose);
    let shades = b"@%#*+=-:. ";
    let (w, h) = (img.width(), img.height());
    let (sx, sy) = ((w / 80).max(1), (h / 30).max(1));
    for y in (0..h).step_by(sy) {
        let row: String = (0..w)
            .step_by(sx)
            .map(|x| match img.get(x, y) {
                d if d > 0.0 => {
                    let k = ((d / sc.camera.max_depth) * (shades.len() - 1) as f64) as usize;
                    shades[k.min(shades.len() - 2)] as char
                }
                _ => ' ',
            })
            .collect();
        println!("{row}");
    }
    println!("{} at t = {t} s, {w}x{h}", sc.name);
}
