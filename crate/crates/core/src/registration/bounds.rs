use nalgebra::{Matrix3, Vector3};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PairGraph, RegistrationError};
use crate::geom::Rotation;
use crate::linalg::squared_singular_values;

/// Below this σ₂² + σ₃² the edge directions are treated as collinear.
const SPAN_TOL: f64 = 1e-12;
const CENTER_RETRIES: usize = 10;

/// z_e = (‖b_e − R̂ a_e‖ + δ_e) / ‖a_e‖ and the unit direction a_e / ‖a_e‖.
fn edge_terms(g: &PairGraph, r_hat: &Rotation) -> (Vec<f64>, Vec<Vector3<f64>>) {
    g.edges()
        .iter()
        .map(|e| {
            let n = e.a.norm();
            (((e.b - r_hat.apply(&e.a)).norm() + e.delta) / n, e.a / n)
        })
        .unzip()
}

/// ε_R = √(2‖z‖² / (σ₂² + σ₃²)) over the chosen edges.
fn bound_over<'a>(
    z: impl Iterator<Item = &'a f64>,
    u: impl Iterator<Item = &'a Vector3<f64>>,
) -> Option<f64> {
    let z2: f64 = z.map(|v| v * v).sum();
    let gram = u.fold(Matrix3::zeros(), |acc, v| acc + v * v.transpose());
    let s = squared_singular_values(&gram);
    let span = s[1] + s[2];
    (span >= SPAN_TOL).then(|| (2.0 * z2 / span).sqrt())
}

/// Rotation bound from every edge of `g`, regardless of inlier weights.
pub fn rotation_bound_full(g: &PairGraph, r_hat: &Rotation) -> Result<f64, RegistrationError> {
    if g.num_edges() < 3 {
        return Err(RegistrationError::DegenerateGraph {
            available: g.num_edges(),
        });
    }
    let (z, u) = edge_terms(g, r_hat);
    bound_over(z.iter(), u.iter()).ok_or(RegistrationError::UnobservableRotation)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledBound {
    pub bound: f64,
    /// Edge indices of the star that produced `bound`.
    pub edges: [usize; 3],
    /// Iterations that produced a finite bound.
    pub valid_samples: usize,
}

/// Draws one star (center plus three distinct neighbors) for an iteration.
/// Each iteration owns its RNG stream, so the first k samples are the same
/// whatever the total iteration count.
fn sample_star(g: &PairGraph, seed: u64, iteration: u64) -> Option<[usize; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration);
    for _ in 0..CENTER_RETRIES {
        let center = rng.random_range(0..g.num_vertices());
        let nb = g.neighbors(center);
        if nb.len() < 3 {
            continue;
        }
        let pick = index::sample(&mut rng, nb.len(), 3);
        let mut edges = [nb[pick.index(0)].1, nb[pick.index(1)].1, nb[pick.index(2)].1];
        edges.sort_unstable();
        return Some(edges);
    }
    None
}

/// Tightest 3-edge star bound over `iterations` samples.
pub fn sampled_rotation_bound(
    g: &PairGraph,
    r_hat: &Rotation,
    iterations: usize,
    rng_seed: u64,
) -> Result<SampledBound, RegistrationError> {
    if iterations < 1 {
        return Err(RegistrationError::InvalidInput("iterations must be at least 1".into()));
    }
    let (z, u) = edge_terms(g, r_hat);
    let mut best: Option<SampledBound> = None;
    let mut valid = 0;
    for it in 0..iterations {
        let Some(star) = sample_star(g, rng_seed, it as u64) else {
            continue;
        };
        let Some(b) = bound_over(star.iter().map(|&k| &z[k]), star.iter().map(|&k| &u[k])) else {
            continue;
        };
        valid += 1;
        if best.as_ref().is_none_or(|s| b < s.bound) {
            best = Some(SampledBound {
                bound: b,
                edges: star,
                valid_samples: 0,
            });
        }
    }
    let mut best = best.ok_or(RegistrationError::UnobservableRotation)?;
    best.valid_samples = valid;
    Ok(best)
}

pub fn rotation_bound_sampled(
    g: &PairGraph,
    r_hat: &Rotation,
    iterations: usize,
    rng_seed: u64,
) -> Result<f64, RegistrationError> {
    sampled_rotation_bound(g, r_hat, iterations, rng_seed).map(|s| s.bound)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{build_pair_graph, gnc_tls_rotation, CorrespondenceSet, GncConfig};
    use super::*;
    use crate::geom::UnitQuaternion;
    use rand::SeedableRng;

    /// Independent evaluation through an explicit 3×|E| matrix and
    /// nalgebra's SVD.
    fn svd_bound(g: &PairGraph, r_hat: &Rotation) -> f64 {
        let m = g.num_edges();
        let mut a = nalgebra::Matrix3xX::<f64>::zeros(m);
        let mut z2 = 0.0;
        for (k, e) in g.edges().iter().enumerate() {
            let n = e.a.norm();
            a.set_column(k, &(e.a / n));
            let z = ((e.b - r_hat.matrix() * e.a).norm() + e.delta) / n;
            z2 += z * z;
        }
        let mut s = a.svd(false, false).singular_values.as_slice().to_vec();
        s.sort_by(|x, y| y.total_cmp(x));
        (2.0 * z2 / (s[1] * s[1] + s[2] * s[2])).sqrt()
    }

    #[test]
    fn full_bound_matches_svd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pose = random_pose(&mut rng, 1.0, 0.5);
        let c = synthetic(&mut rng, 50, &pose, 1.0, 0);
        let g = build_pair_graph(&c, 0.3, 0).unwrap();
        let r_hat = gnc_tls_rotation(&g, &GncConfig::default()).unwrap().quaternion.to_rotation();
        let ours = rotation_bound_full(&g, &r_hat).unwrap();
        assert!((ours - svd_bound(&g, &r_hat)).abs() < 1e-9 * ours);
    }

    #[test]
    fn collinear_is_unobservable() {
        let a: Vec<_> = (0..6).map(|i| Vector3::new(0.0, 0.0, 1.0 + i as f64)).collect();
        let c = CorrespondenceSet::new(a.clone(), a, vec![0.01; 6]).unwrap();
        let g = build_pair_graph(&c, 1.0, 0).unwrap();
        assert!(matches!(
            rotation_bound_full(&g, &Rotation::identity()),
            Err(RegistrationError::UnobservableRotation)
        ));
        assert!(matches!(
            rotation_bound_sampled(&g, &Rotation::identity(), 50, 0),
            Err(RegistrationError::UnobservableRotation)
        ));
    }

    #[test]
    fn exact_limit_goes_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pose = random_pose(&mut rng, 1.0, 0.5);
        let clean = synthetic(&mut rng, 30, &pose, 0.0, 0);
        let mut last = f64::INFINITY;
        for scale in [1e-2, 1e-4, 1e-6, 1e-8] {
            let d: Vec<f64> = clean.delta().iter().map(|d| d * scale).collect();
            let c = CorrespondenceSet::new(clean.a().to_vec(), clean.b().to_vec(), d).unwrap();
            let g = build_pair_graph(&c, 0.5, 0).unwrap();
            let b = rotation_bound_full(&g, &pose.rotation).unwrap();
            assert!(b < last);
            last = b;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn star_bound_equals_full_bound_on_star() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..20 {
            let pose = random_pose(&mut rng, 1.0, 0.5);
            let c = synthetic(&mut rng, 40, &pose, 1.0, 0);
            let g = build_pair_graph(&c, 0.3, seed).unwrap();
            let r_hat = UnitQuaternion::from_axis_angle(&Vector3::z(), 0.01)
                .to_rotation()
                .compose(&pose.rotation);
            let s = sampled_rotation_bound(&g, &r_hat, 50, seed).unwrap();
            let e: Vec<_> = s.edges.iter().map(|&k| &g.edges()[k]).collect();
            // the three edges share a center
            let shared = [e[0].i, e[0].j]
                .into_iter()
                .filter(|v| e[1..].iter().all(|x| x.i == *v || x.j == *v))
                .count();
            assert_eq!(shared, 1);
            let full = rotation_bound_full(&g.subgraph(&s.edges), &r_hat).unwrap();
            assert!((s.bound - full).abs() < 1e-12 * full.max(1.0));
        }
    }

    #[test]
    fn sampled_is_monotone_in_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pose = random_pose(&mut rng, 1.0, 0.5);
        let c = synthetic(&mut rng, 100, &pose, 1.0, 0);
        let g = build_pair_graph(&c, 0.1, 0).unwrap();
        let mut prev = f64::INFINITY;
        for k in [1, 2, 5, 10, 50, 200, 1000] {
            let b = rotation_bound_sampled(&g, &pose.rotation, k, 77).unwrap();
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn sampled_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pose = random_pose(&mut rng, 1.0, 0.5);
        let c = synthetic(&mut rng, 100, &pose, 1.0, 0);
        let g = build_pair_graph(&c, 0.1, 0).unwrap();
        assert_eq!(
            sampled_rotation_bound(&g, &pose.rotation, 300, 8).unwrap(),
            sampled_rotation_bound(&g, &pose.rotation, 300, 8).unwrap()
        );
    }

    #[test]
    fn bounds_are_sound_over_trials() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut tighter = 0;
        let trials = 100;
        for t in 0..trials {
            let pose = random_pose(&mut rng, 0.5, 0.5);
            let c = synthetic(&mut rng, 150, &pose, 1.0, 0);
            let g = build_pair_graph(&c, 0.1, t).unwrap();
            let r_hat = gnc_tls_rotation(&g, &GncConfig::default()).unwrap().quaternion.to_rotation();
            let err = r_hat.frobenius_distance(&pose.rotation);
            let full = rotation_bound_full(&g, &r_hat).unwrap();
            let sampled = rotation_bound_sampled(&g, &r_hat, 1000, t).unwrap();
            assert!(err <= full && err <= sampled, "trial {t}: {err} {full} {sampled}");
            if sampled <= full {
                tighter += 1;
            }
        }
        assert!(tighter * 10 >= trials * 9, "sampled tighter in {tighter}/{trials}");
    }
}
