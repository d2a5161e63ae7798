use nalgebra::Matrix4;

use super::gnc::{initial_mu, tls_cost, update_weights, GncConfig};
use super::{PairGraph, RegistrationError};
use crate::geom::{omega1, omega2, pure, Rotation, UnitQuaternion};
use crate::linalg::SymmetricEigen;

/// Per-edge quadratic forms, computed once and reweighted every iteration.
struct QuadraticForms {
    /// Ω1ᵀ(b̄)Ω2(ā) + Ω2ᵀ(ā)Ω1(b̄)
    /// so that ‖b − Ra‖² = ‖a‖² + ‖b‖² − qᵀ q[e] q.
    q: Vec<Matrix4<f64>>,
}

impl QuadraticForms {
    fn new(g: &PairGraph) -> Self {
        let q = g
            .edges()
            .iter()
            .map(|e| {
                let m = omega1(&pure(&e.b)).transpose() * omega2(&pure(&e.a));
                m + m.transpose()
            })
            .collect();
        Self { q }
    }

    fn solve(&self, weights: &[f64]) -> Result<UnitQuaternion, RegistrationError> {
        let active = weights.iter().filter(|w| **w > 0.0).count();
        if active < 3 {
            return Err(RegistrationError::InvalidInput(format!(
                "{active} edges carry weight, need at least 3"
            )));
        }
        let mut big_q = Matrix4::<f64>::zeros();
        for (m, w) in self.q.iter().zip(weights) {
            if *w != 0.0 {
                big_q -= m * *w;
            }
        }
        debug_assert!((big_q - big_q.transpose()).norm() <= 1e-9 * big_q.norm().max(1.0));
        let eig = SymmetricEigen::<4>::new(&big_q);
        let gap = eig.values[1] - eig.values[0];
        let scale = eig.values.amax().max(1.0);
        if gap <= 1e-9 * scale {
            return Err(RegistrationError::AmbiguousRotation { gap });
        }
        let q = UnitQuaternion::from_vector(eig.min_vector())
            .map_err(|e| RegistrationError::InvalidInput(e.to_string()))?;
        Ok(q.canonical())
    }
}

/// Σ w_e ‖b_e − R a_e‖² over the edges of `g`.
pub fn rotation_objective(g: &PairGraph, weights: &[f64], r: &Rotation) -> f64 {
    g.edges()
        .iter()
        .zip(weights)
        .map(|(e, w)| w * (e.b - r.apply(&e.a)).norm_squared())
        .sum()
}

/// Weighted least-squares rotation as the eigenvector of the smallest
/// eigenvalue of Q. Needs at least three weighted edges.
pub fn wls_rotation(g: &PairGraph, weights: &[f64]) -> Result<UnitQuaternion, RegistrationError> {
    if weights.len() != g.num_edges() {
        return Err(RegistrationError::InvalidInput(format!(
            "{} weights for {} edges",
            weights.len(),
            g.num_edges()
        )));
    }
    if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(RegistrationError::InvalidInput("weights must lie in [0, 1]".into()));
    }
    QuadraticForms::new(g).solve(weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GncOutcome {
    pub quaternion: UnitQuaternion,
    pub weights: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// TLS cost Σ min(r², ĉ²) at the returned estimate.
    pub cost: f64,
}

fn edge_residuals(g: &PairGraph, q: &UnitQuaternion, out: &mut [f64]) {
    let r = q.to_rotation();
    for (o, e) in out.iter_mut().zip(g.edges()) {
        *o = (e.b - r.apply(&e.a)).norm();
    }
}

/// GNC-TLS over edge residuals with truncation δ_ij·noise_multiplier.
///
/// On non-convergence the iterate with the lowest TLS cost is returned with
/// `converged = false`.
pub fn gnc_tls_rotation(g: &PairGraph, cfg: &GncConfig) -> Result<GncOutcome, RegistrationError> {
    let forms = QuadraticForms::new(g);
    let m = g.num_edges();
    let trunc: Vec<f64> = g.edges().iter().map(|e| e.delta * cfg.noise_multiplier).collect();
    let mut weights = vec![1.0; m];
    let mut q = forms.solve(&weights)?;
    let mut res = vec![0.0; m];
    edge_residuals(g, &q, &mut res);

    let mut mu = initial_mu(&res, &trunc);
    let mut best = GncOutcome {
        quaternion: q,
        weights: weights.clone(),
        converged: false,
        iterations: 0,
        cost: tls_cost(&res, &trunc),
    };

    for it in 1..=cfg.max_iterations {
        let change = update_weights(&mut weights, &res, &trunc, mu);
        q = match forms.solve(&weights) {
            Ok(q) => q,
            // Too few surviving edges: keep the best iterate seen so far.
            Err(RegistrationError::InvalidInput(_)) => break,
            Err(e) => return Err(e),
        };
        edge_residuals(g, &q, &mut res);
        let cost = tls_cost(&res, &trunc);
        if change < cfg.convergence_tol {
            return Ok(GncOutcome {
                quaternion: q,
                weights,
                converged: true,
                iterations: it,
                cost,
            });
        }
        if cost < best.cost {
            best = GncOutcome {
                quaternion: q,
                weights: weights.clone(),
                converged: false,
                iterations: it,
                cost,
            };
        }
        mu *= cfg.mu_update_factor;
    }
    best.iterations = cfg.max_iterations;
    Ok(best)
}
