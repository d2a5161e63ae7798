//! Scalar-last quaternions, rotations and rigid transforms.

use certvo::geom::{angle_to_frobenius, frobenius_to_angle, RotoTranslation, UnitQuaternion};
use nalgebra::Vector3;

fn main() {
    let qa = UnitQuaternion::from_axis_angle(&Vector3::z(), 0.5);
    let qb = UnitQuaternion::from_axis_angle(&Vector3::x(), -0.3);
    let qc = qa.compose(&qb);
    println!("qa ∘ qb = {:?} (scalar last)", qc.coords().as_slice());

    let v = Vector3::new(1.0, 2.0, 3.0);
    let by_parts = qa.rotate(&qb.rotate(&v));
    println!("rotate by product {:?}", qc.rotate(&v).as_slice());
    println!("rotate in turn    {:?}", by_parts.as_slice());

    let r = qc.to_rotation();
    let back = r.to_quaternion();
    println!("round trip through the matrix: {:?}", back.canonical().coords().as_slice());

    let f = r.frobenius_distance(&qa.to_rotation());
    println!(
        "‖R_c − R_a‖_F = {f:.6}, angle {:.6} rad",
        frobenius_to_angle(f).unwrap()
    );
    println!("5° apart is {:.4} in Frobenius norm", angle_to_frobenius(5f64.to_radians()).unwrap());

    let t = RotoTranslation::new(r, Vector3::new(0.1, -0.2, 0.3));
    let p = Vector3::new(0.5, 0.5, 2.0);
    let there_and_back = t.inverse().transform_point(&t.transform_point(&p));
    println!("T⁻¹(T(p)) − p = {:.2e}", (there_and_back - p).norm());
}
