use nalgebra::Vector3;

use super::gnc::{initial_mu, tls_cost, update_weights, GncConfig};
use super::{CorrespondenceSet, RegistrationError};
use crate::geom::Rotation;

#[derive(Debug, Clone, PartialEq)]
pub struct TranslationOutcome {
    pub translation: Vector3<f64>,
    pub weights: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

fn weighted_mean(v: &[Vector3<f64>], w: &[f64]) -> Option<Vector3<f64>> {
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 {
        return None;
    }
    let s = v.iter().zip(w).fold(Vector3::zeros(), |acc, (x, wi)| acc + x * *wi);
    Some(s / sw)
}

/// GNC-TLS on r_i = ‖b_i − R̂ a_i − t‖ with the weighted mean as inner solve.
pub fn gnc_tls_translation(
    c: &CorrespondenceSet,
    r_hat: &Rotation,
    cfg: &GncConfig,
) -> Result<TranslationOutcome, RegistrationError> {
    let v: Vec<Vector3<f64>> = c
        .a()
        .iter()
        .zip(c.b())
        .map(|(a, b)| b - r_hat.apply(a))
        .collect();
    let trunc: Vec<f64> = c.delta().iter().map(|d| d * cfg.noise_multiplier).collect();
    let n = c.len();
    let residuals = |t: &Vector3<f64>, out: &mut Vec<f64>| {
        out.clear();
        out.extend(v.iter().map(|x| (x - t).norm()));
    };

    let mut weights = vec![1.0; n];
    let mut t = weighted_mean(&v, &weights).ok_or(RegistrationError::NoConsensus)?;
    let mut res = Vec::with_capacity(n);
    residuals(&t, &mut res);
    let mut mu = initial_mu(&res, &trunc);
    let mut best = (tls_cost(&res, &trunc), t, weights.clone());

    for it in 1..=cfg.max_iterations {
        let change = update_weights(&mut weights, &res, &trunc, mu);
        t = weighted_mean(&v, &weights).ok_or(RegistrationError::NoConsensus)?;
        residuals(&t, &mut res);
        if change < cfg.convergence_tol {
            return Ok(TranslationOutcome {
                translation: t,
                weights,
                converged: true,
                iterations: it,
            });
        }
        let cost = tls_cost(&res, &trunc);
        if cost < best.0 {
            best = (cost, t, weights.clone());
        }
        mu *= cfg.mu_update_factor;
    }
    Ok(TranslationOutcome {
        translation: best.1,
        weights: best.2,
        converged: false,
        iterations: cfg.max_iterations,
    })
}

/// ε_t = min_i (ε_R‖a_i‖ + ‖b_i − R̂a_i − t̂‖ + δ_i) over all points.
pub fn translation_bound(
    c: &CorrespondenceSet,
    r_hat: &Rotation,
    t_hat: &Vector3<f64>,
    epsilon_r: f64,
) -> f64 {
    debug_assert!(epsilon_r >= 0.0);
    c.a()
        .iter()
        .zip(c.b())
        .zip(c.delta())
        .map(|((a, b), d)| epsilon_r * a.norm() + (b - r_hat.apply(a) - t_hat).norm() + d)
        .fold(f64::INFINITY, f64::min)
}
