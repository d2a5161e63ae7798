//! Data behind the bound-tightness and graph-fraction plots.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{frame_seed, PipelineError};
use crate::registration::{
    build_pair_graph, gnc_tls_rotation, register, rotation_bound_full, rotation_bound_sampled, CorrespondenceSet,
    GncConfig,
};
use crate::geom::RotoTranslation;
use crate::simworld::{generate_correspondences, Scenario};

pub const FIG3_ITERATIONS: [usize; 5] = [1, 10, 100, 1000, 10000];
pub const FIG5_FRACTIONS: [f64; 6] = [0.005, 0.01, 0.05, 0.1, 0.5, 1.0];

#[derive(Debug, Clone)]
pub struct FigureConfig {
    pub scenario: Scenario,
    pub trials: usize,
    /// Frame pairs per fraction in the graph-fraction sweep.
    pub frames: usize,
    pub fraction: f64,
    pub iterations: usize,
    pub gnc: GncConfig,
    pub seed: u64,
}

impl FigureConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            trials: 100,
            frames: 10,
            fraction: scenario.registration.fraction,
            iterations: scenario.registration.iterations,
            gnc: scenario.registration.gnc.clone(),
            seed: scenario.seed,
            scenario,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig3Row {
    pub iterations: usize,
    pub lemma2_median: f64,
    pub lemma2_q1: f64,
    pub lemma2_q3: f64,
    pub lemma3_median: f64,
    pub lemma3_q1: f64,
    pub lemma3_q3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig5Row {
    pub fraction: f64,
    pub mean_time_ms: f64,
    pub mean_rre: f64,
}

/// Per-trial bounds: the all-edge bound and the sampled bound at each
/// entry of [`FIG3_ITERATIONS`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrialBounds {
    pub full: f64,
    pub sampled: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn quartiles(mut v: Vec<f64>) -> (f64, f64, f64) {
    v.sort_by(f64::total_cmp);
    (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75))
}

/// A simulated frame pair drawn from the scenario's trajectory.
fn sample_pair(cfg: &FigureConfig, index: usize, salt: u64) -> Result<(CorrespondenceSet, RotoTranslation), PipelineError> {
    let sc = &cfg.scenario;
    let seed = frame_seed(cfg.seed, index, salt);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..sc.trajectory.num_frames());
    let (prev, cur) = (sc.trajectory.frame_pose(k - 1), sc.trajectory.frame_pose(k));
    let mut noise = sc.noise;
    noise.rng_seed = seed;
    generate_correspondences(&sc.scene, &sc.camera, &prev, &cur, sc.features, &noise).map_err(|e| PipelineError::Frame {
        frame: k,
        stage: "correspondences",
        message: e.to_string(),
    })
}

fn trial_bounds(cfg: &FigureConfig, trial: usize) -> Result<TrialBounds, PipelineError> {
    let (c, _) = sample_pair(cfg, trial, 10)?;
    let g = build_pair_graph(&c, cfg.fraction, frame_seed(cfg.seed, trial, 11))?;
    let r_hat = gnc_tls_rotation(&g, &cfg.gnc)?.quaternion.to_rotation();
    let full = rotation_bound_full(&g, &r_hat)?;
    let seed = frame_seed(cfg.seed, trial, 12);
    let sampled = FIG3_ITERATIONS
        .iter()
        .map(|&it| rotation_bound_sampled(&g, &r_hat, it, seed))
        .collect::<Result<_, _>>()?;
    Ok(TrialBounds { full, sampled })
}

/// Randomized trials comparing the all-edge rotation bound with the
/// sampled star bound across iteration counts. Writes CSV when `out` is set.
pub fn export_fig3_data(
    cfg: &FigureConfig,
    out: Option<&mut dyn Write>,
) -> Result<(Vec<Fig3Row>, Vec<TrialBounds>), PipelineError> {
    let trials: Vec<TrialBounds> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| trial_bounds(cfg, t))
        .collect::<Result<_, _>>()?;
    let (l2q1, l2m, l2q3) = quartiles(trials.iter().map(|t| t.full).collect());
    let rows: Vec<Fig3Row> = FIG3_ITERATIONS
        .iter()
        .enumerate()
        .map(|(j, &iterations)| {
            let (q1, m, q3) = quartiles(trials.iter().map(|t| t.sampled[j]).collect());
            Fig3Row {
                iterations,
                lemma2_median: l2m,
                lemma2_q1: l2q1,
                lemma2_q3: l2q3,
                lemma3_median: m,
                lemma3_q1: q1,
                lemma3_q3: q3,
            }
        })
        .collect();
    if let Some(out) = out {
        write_rows(out, &rows)?;
    }
    Ok((rows, trials))
}

/// Graph-fraction sweep over fixed frame pairs: mean registration time and
/// mean rotation error per fraction. Writes CSV when `out` is set.
pub fn export_fig5_data(cfg: &FigureConfig, out: Option<&mut dyn Write>) -> Result<Vec<Fig5Row>, PipelineError> {
    let pairs = (0..cfg.frames)
        .map(|i| sample_pair(cfg, i, 20))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::with_capacity(FIG5_FRACTIONS.len());
    for &fraction in &FIG5_FRACTIONS {
        let (mut time, mut rre) = (0.0, 0.0);
        for (i, (c, truth)) in pairs.iter().enumerate() {
            let t = Instant::now();
            let r = register(c, fraction, cfg.iterations, &cfg.gnc, frame_seed(cfg.seed, i, 21))?;
            time += t.elapsed().as_secs_f64() * 1e3;
            rre += r.rotation_estimate.frobenius_distance(&truth.rotation);
        }
        let n = pairs.len() as f64;
        rows.push(Fig5Row {
            fraction,
            mean_time_ms: time / n,
            mean_rre: rre / n,
        });
    }
    if let Some(out) = out {
        write_rows(out, &rows)?;
    }
    Ok(rows)
}

fn write_rows<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
