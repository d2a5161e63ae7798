//! GNC-TLS surrogate: weight update and annealing schedule shared by the
//! rotation and translation stages.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GncConfig {
    pub max_iterations: usize,
    /// μ is multiplied by this factor after every outer iteration.
    pub mu_update_factor: f64,
    /// Stop once no weight moves by more than this.
    pub convergence_tol: f64,
    /// Scales the per-measurement noise bound into the TLS truncation.
    pub noise_multiplier: f64,
}

impl Default for GncConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            mu_update_factor: 1.4,
            convergence_tol: 1e-6,
            noise_multiplier: 1.0,
        }
    }
}

impl GncConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_iterations < 1 {
            return Err("max_iterations must be at least 1".into());
        }
        if !(self.mu_update_factor > 1.0) {
            return Err("mu_update_factor must exceed 1".into());
        }
        if !(self.convergence_tol > 0.0) || !(self.noise_multiplier > 0.0) {
            return Err("convergence_tol and noise_multiplier must be positive".into());
        }
        Ok(())
    }
}

pub(crate) const MU_MIN: f64 = 1e-6;
pub(crate) const MU_MAX: f64 = 1e6;

/// μ₀ = ĉ² / (2 r_max² − ĉ²), written on residuals normalized by their own
/// truncation so heterogeneous bounds share one schedule.
pub(crate) fn initial_mu(residuals: &[f64], truncations: &[f64]) -> f64 {
    let ratio = residuals
        .iter()
        .zip(truncations)
        .map(|(r, c)| (r / c).powi(2))
        .fold(0.0, f64::max);
    let denom = 2.0 * ratio - 1.0;
    if denom <= 0.0 {
        MU_MAX
    } else {
        (1.0 / denom).clamp(MU_MIN, MU_MAX)
    }
}

/// Closed-form GNC-TLS weight for residual `r`, truncation `c` and μ.
pub(crate) fn tls_weight(r: f64, c: f64, mu: f64) -> f64 {
    let r2 = r * r;
    let c2 = c * c;
    if r2 >= (mu + 1.0) / mu * c2 {
        0.0
    } else if r2 <= mu / (mu + 1.0) * c2 {
        1.0
    } else {
        (c / r * (mu * (mu + 1.0)).sqrt() - mu).clamp(0.0, 1.0)
    }
}

/// Σ min(r², c²).
pub(crate) fn tls_cost(residuals: &[f64], truncations: &[f64]) -> f64 {
    residuals
        .iter()
        .zip(truncations)
        .map(|(r, c)| (r * r).min(c * c))
        .sum()
}

/// Updates `weights` in place and returns the largest absolute change.
pub(crate) fn update_weights(
    weights: &mut [f64],
    residuals: &[f64],
    truncations: &[f64],
    mu: f64,
) -> f64 {
    let mut max_change: f64 = 0.0;
    for ((w, r), c) in weights.iter_mut().zip(residuals).zip(truncations) {
        let nw = tls_weight(*r, *c, mu);
        max_change = max_change.max((nw - *w).abs());
        *w = nw;
    }
    max_change
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_bands() {
        let mu = 2.0;
        // inner band edge: r² = μ/(μ+1) c²
        let c = 1.0;
        assert_eq!(tls_weight(0.5, c, mu), 1.0);
        assert_eq!(tls_weight(1.3, c, mu), 0.0);
        let w = tls_weight(1.0, c, mu);
        assert!((w - ((6f64).sqrt() - 2.0)).abs() < 1e-12);
        // the surrogate approaches TLS as μ grows
        assert_eq!(tls_weight(0.999, 1.0, 1e9), 1.0);
        assert_eq!(tls_weight(1.001, 1.0, 1e9), 0.0);
    }

    #[test]
    fn weights_continuous_at_band_edges() {
        let mu: f64 = 0.7;
        let c = 0.3;
        let lo = (mu / (mu + 1.0)).sqrt() * c;
        let hi = ((mu + 1.0) / mu).sqrt() * c;
        assert!((tls_weight(lo * (1.0 + 1e-9), c, mu) - 1.0).abs() < 1e-6);
        assert!(tls_weight(hi * (1.0 - 1e-9), c, mu).abs() < 1e-6);
    }

    #[test]
    fn initial_mu_clamps() {
        assert_eq!(initial_mu(&[0.1, 0.2], &[1.0, 1.0]), MU_MAX);
        let mu = initial_mu(&[10.0], &[1.0]);
        assert!((mu - 1.0 / 199.0).abs() < 1e-15);
        assert_eq!(initial_mu(&[1e9], &[1.0]), MU_MIN);
    }

    #[test]
    fn cost_truncates() {
        assert_eq!(tls_cost(&[0.5, 3.0], &[1.0, 1.0]), 1.25);
    }

    #[test]
    fn config_validation() {
        assert!(GncConfig::default().validate().is_ok());
        let bad = GncConfig {
            mu_update_factor: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
