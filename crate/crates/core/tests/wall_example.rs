mod common;

use common::wall_example;

#[test]
fn uncorrected_overshoots_and_certified_stays_below() {
    let w = wall_example(0.01);
    println!(
        "true {:.4} uncorrected {:.4} certified {:.4} delta {:.4}",
        w.true_distance, w.uncorrected, w.certified, w.delta
    );
    assert!((w.true_distance - 0.5).abs() < 1e-12);
    assert!((w.epsilon_r - 0.123).abs() < 1e-3);
    assert!(w.uncorrected > w.true_distance);
    assert!(w.certified <= w.true_distance);
    assert!((w.uncorrected - 0.526).abs() < 0.03);
    assert!((w.certified - 0.456).abs() < 0.03);
    // the correction uses the distance from the estimated frame origin
    assert!((w.delta - 0.0794).abs() < 1e-3);
    // certified = stored − half voxel diagonal − Δ at the voxel center
    let margin = 0.5 * 3f64.sqrt() * 0.01;
    assert!((w.uncorrected - margin - w.certified - w.delta).abs() < 2e-3);
}

#[test]
fn finer_grid_approaches_the_continuous_values() {
    let coarse = wall_example(0.02);
    let fine = wall_example(0.005);
    let exact_uncorrected = 0.526;
    assert!((fine.uncorrected - exact_uncorrected).abs() <= (coarse.uncorrected - exact_uncorrected).abs() + 1e-9);
    assert!(fine.certified <= 0.5 && coarse.certified <= 0.5);
}
