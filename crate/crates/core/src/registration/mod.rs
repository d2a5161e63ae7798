//! Robust frame-to-frame registration with certified error bounds.
//!
//! Convention: the estimate `(R̂, t̂)` maps frame-k points `a` into frame k+1
//! as `b = R̂ a + t̂`.

mod bounds;
mod gnc;
mod graph;
mod io;
mod rotation;
mod translation;

use nalgebra::Vector3;
use thiserror::Error;

use crate::geom::Rotation;

pub use bounds::{rotation_bound_full, rotation_bound_sampled, sampled_rotation_bound, SampledBound};
pub use gnc::GncConfig;
pub use graph::{build_pair_graph, Edge, PairGraph, DEGENERACY_FLOOR};
pub use io::{parse_correspondences, read_correspondences, write_correspondences};
pub use rotation::{gnc_tls_rotation, rotation_objective, wls_rotation, GncOutcome};
pub use translation::{gnc_tls_translation, translation_bound, TranslationOutcome};

#[derive(Debug, Error)]
pub enum RegistrationError {
    #[error("invalid correspondence set: {0}")]
    InvalidInput(String),
    #[error("pair graph has {available} usable edges, need at least 3")]
    DegenerateGraph { available: usize },
    #[error("smallest eigenvalue of Q is not simple (gap {gap:.3e})")]
    AmbiguousRotation { gap: f64 },
    #[error("edge directions do not span two dimensions; rotation bound is unbounded")]
    UnobservableRotation,
    #[error("every translation weight collapsed to zero")]
    NoConsensus,
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<RegistrationError>,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RegistrationError {
    fn at(self, stage: &'static str) -> Self {
        RegistrationError::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage labels stripped.
    pub fn root(&self) -> &RegistrationError {
        match self {
            RegistrationError::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

/// Matched points `a_i` (frame k) and `b_i` (frame k+1) with noise bounds δ_i.
///
/// The constructor checks lengths and δ_i > 0. The N ≥ 4 requirement of the
/// rotation stage is enforced where the pair graph is built, so the
/// translation routines stay usable on tiny sets.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    a: Vec<Vector3<f64>>,
    b: Vec<Vector3<f64>>,
    delta: Vec<f64>,
}

impl CorrespondenceSet {
    pub fn new(
        a: Vec<Vector3<f64>>,
        b: Vec<Vector3<f64>>,
        delta: Vec<f64>,
    ) -> Result<Self, RegistrationError> {
        if a.len() != b.len() || a.len() != delta.len() {
            return Err(RegistrationError::InvalidInput(format!(
                "length mismatch: |a|={}, |b|={}, |delta|={}",
                a.len(),
                b.len(),
                delta.len()
            )));
        }
        if a.is_empty() {
            return Err(RegistrationError::InvalidInput("empty set".into()));
        }
        if let Some(i) = delta.iter().position(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(RegistrationError::InvalidInput(format!(
                "delta[{i}] = {} is not a positive finite bound",
                delta[i]
            )));
        }
        if a.iter().chain(&b).any(|p| !p.iter().all(|x| x.is_finite())) {
            return Err(RegistrationError::InvalidInput("non-finite coordinate".into()));
        }
        Ok(Self { a, b, delta })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a(&self) -> &[Vector3<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[Vector3<f64>] {
        &self.b
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationResult {
    pub rotation_estimate: Rotation,
    pub translation_estimate: Vector3<f64>,
    /// Frobenius-norm bound on ‖R − R̂‖.
    pub epsilon_r: f64,
    /// Euclidean bound on ‖t − t̂‖, meters.
    pub epsilon_t: f64,
    pub rotation_weights: Vec<f64>,
    pub translation_weights: Vec<f64>,
    /// Both GNC stages met the weight-change tolerance.
    pub converged: bool,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub num_edges: usize,
    pub rotation_iterations: usize,
    pub translation_iterations: usize,
    pub rotation_converged: bool,
    pub translation_converged: bool,
    pub bound_samples_used: usize,
}

impl RegistrationResult {
    pub fn pose_delta(&self) -> crate::geom::RotoTranslation {
        crate::geom::RotoTranslation::new(self.rotation_estimate, self.translation_estimate)
    }
}

/// Graph sampling and bound sampling draw from independent streams.
fn substream(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Full pipeline: pair graph, GNC rotation, sampled rotation bound, GNC
/// translation, translation bound.
pub fn register(
    c: &CorrespondenceSet,
    fraction: f64,
    iterations: usize,
    cfg: &GncConfig,
    rng_seed: u64,
) -> Result<RegistrationResult, RegistrationError> {
    cfg.validate()
        .map_err(|m| RegistrationError::InvalidInput(m).at("config"))?;
    let g = build_pair_graph(c, fraction, substream(rng_seed, 1)).map_err(|e| e.at("graph"))?;
    let rot = gnc_tls_rotation(&g, cfg).map_err(|e| e.at("rotation"))?;
    let r_hat = rot.quaternion.to_rotation();
    let sb = sampled_rotation_bound(&g, &r_hat, iterations, substream(rng_seed, 2))
        .map_err(|e| e.at("rotation bound"))?;
    let tr = gnc_tls_translation(c, &r_hat, cfg).map_err(|e| e.at("translation"))?;
    let epsilon_t = translation_bound(c, &r_hat, &tr.translation, sb.bound);
    Ok(RegistrationResult {
        rotation_estimate: r_hat,
        translation_estimate: tr.translation,
        epsilon_r: sb.bound,
        epsilon_t,
        rotation_weights: rot.weights,
        translation_weights: tr.weights,
        converged: rot.converged && tr.converged,
        diagnostics: Diagnostics {
            num_edges: g.num_edges(),
            rotation_iterations: rot.iterations,
            translation_iterations: tr.iterations,
            rotation_converged: rot.converged,
            translation_converged: tr.converged,
            bound_samples_used: sb.valid_samples,
        },
    })
}
