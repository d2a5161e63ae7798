use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::oracle::Oracle;
use super::{frame_seed, PipelineError, RunConfig};
use crate::cesdf::{step_frame, write_slice_csv, write_snapshot, MappingConfig, MappingState, VoxelGrid};
use crate::registration::{read_correspondences, register, CorrespondenceSet};
use crate::simworld::{generate_correspondences, render_depth};

/// One registered frame. Timing fields are wall-clock milliseconds.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FrameTrace {
    pub k: usize,
    /// ‖R̂ − R‖_F against the simulated motion.
    pub rre: f64,
    /// ‖t̂ − t‖ in meters.
    pub rte: f64,
    pub epsilon_r: f64,
    pub epsilon_t: f64,
    pub converged: bool,
    /// Observed voxels whose certified distance exceeds the truth.
    pub violation_count: usize,
    /// Same check on the undeflated distances.
    pub baseline_violations: usize,
    pub simulate_ms: f64,
    pub registration_ms: f64,
    pub integrate_ms: f64,
    pub deflate_ms: f64,
    pub reset_ms: f64,
    pub propagate_ms: f64,
    pub oracle_ms: f64,
    pub frame_ms: f64,
}

impl FrameTrace {
    pub fn rotation_bound_holds(&self) -> bool {
        self.rre <= self.epsilon_r
    }

    pub fn translation_bound_holds(&self) -> bool {
        self.rte <= self.epsilon_t
    }

    /// Sum of the individually timed stages.
    pub fn accounted_ms(&self) -> f64 {
        self.simulate_ms
            + self.registration_ms
            + self.integrate_ms
            + self.deflate_ms
            + self.reset_ms
            + self.propagate_ms
            + self.oracle_ms
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StageMeans {
    pub simulate_ms: f64,
    pub registration_ms: f64,
    pub integrate_ms: f64,
    pub deflate_ms: f64,
    pub reset_ms: f64,
    /// Mean over the frames that recomputed the ESDF.
    pub propagate_ms: f64,
    pub oracle_ms: f64,
    pub frame_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub frames: usize,
    pub seed: u64,
    pub fraction: f64,
    pub iterations: usize,
    pub oracle: bool,
    pub rms_rre: f64,
    pub rms_rte: f64,
    pub rms_epsilon_r: f64,
    pub rms_epsilon_t: f64,
    /// RMS bound over RMS error.
    pub bound_ratio_r: f64,
    pub bound_ratio_t: f64,
    pub rotation_bound_failures: usize,
    pub translation_bound_failures: usize,
    pub nonconverged_frames: usize,
    /// Certified-distance violations over all frames, the initial one included.
    pub total_violations: usize,
    pub baseline_violations: usize,
    pub mean_ms: StageMeans,
    pub wall_s: f64,
    #[serde(skip)]
    pub traces: Vec<FrameTrace>,
    #[serde(skip)]
    pub grid: Option<VoxelGrid>,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x * x, n + 1));
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Runs every frame of the scenario and, with `out_dir` set, writes
/// `trace.csv`, `timings.csv`, `summary.json`, `snapshot.bin` and
/// `slice.csv` (the layer at the starting camera height).
pub fn run_scenario(cfg: &RunConfig) -> Result<RunSummary, PipelineError> {
    cfg.validate()?;
    let wall = Instant::now();
    let sc = &cfg.scenario;
    let traj = &sc.trajectory;
    let cam = sc.camera;
    let frames = cfg.max_frames.map_or(traj.num_frames(), |m| m.min(traj.num_frames()));
    let mapping = MappingConfig {
        esdf_period: cfg.esdf_period,
        ..sc.mapping.clone()
    };
    let pose0 = traj.frame_pose(0);
    let mut state = MappingState::new(VoxelGrid::new(&cfg.grid)?, cam, pose0, mapping)?;
    state.initialize(&render_depth(&sc.scene, &cam, &pose0))?;
    let (mut total_violations, mut baseline_violations) = (0, 0);
    let oracle = cfg.oracle.then(|| Oracle::new(&state.grid, &sc.scene));
    if let Some(oracle) = &oracle {
        let v = oracle.count(&state.grid, &sc.scene, state.pose(), &pose0);
        total_violations += v.certified;
        baseline_violations += v.uncorrected;
    }

    let mut traces = Vec::with_capacity(frames);
    for k in 1..frames {
        let start = Instant::now();
        let stage = |stage: &'static str| move |e: &dyn std::fmt::Display| PipelineError::Frame {
            frame: k,
            stage,
            message: e.to_string(),
        };
        let mut tr = FrameTrace {
            k,
            ..Default::default()
        };

        let t = Instant::now();
        let (prev, cur) = (traj.frame_pose(k - 1), traj.frame_pose(k));
        let truth = cur.inverse().compose(&prev);
        let corr: CorrespondenceSet = match &cfg.correspondence_file {
            Some(pattern) => read_correspondences(pattern.replace("{k}", &k.to_string()))
                .map_err(|e| stage("correspondences")(&e))?,
            None => {
                let mut noise = sc.noise;
                noise.rng_seed = frame_seed(cfg.seed, k, 0);
                generate_correspondences(&sc.scene, &cam, &prev, &cur, sc.features, &noise)
                    .map_err(|e| stage("correspondences")(&e))?
                    .0
            }
        };
        let depth = render_depth(&sc.scene, &cam, &cur);
        tr.simulate_ms = ms(t);

        let t = Instant::now();
        let reg = register(&corr, cfg.fraction, cfg.iterations, &cfg.gnc, frame_seed(cfg.seed, k, 1))
            .map_err(|e| stage("registration")(&e))?;
        tr.registration_ms = ms(t);
        tr.rre = reg.rotation_estimate.frobenius_distance(&truth.rotation);
        tr.rte = (reg.translation_estimate - truth.translation).norm();
        tr.epsilon_r = reg.epsilon_r;
        tr.epsilon_t = reg.epsilon_t;
        tr.converged = reg.converged;

        let rep = step_frame(&mut state, &depth, &reg).map_err(|e| stage("mapping")(&e))?;
        tr.integrate_ms = rep.integrate_ms;
        tr.deflate_ms = rep.deflate_ms;
        tr.reset_ms = rep.reset_ms;
        tr.propagate_ms = rep.propagate_ms;

        if let Some(oracle) = &oracle {
            let t = Instant::now();
            let v = oracle.count(&state.grid, &sc.scene, state.pose(), &cur);
            tr.violation_count = v.certified;
            tr.baseline_violations = v.uncorrected;
            total_violations += tr.violation_count;
            baseline_violations += tr.baseline_violations;
            tr.oracle_ms = ms(t);
        }
        if k % 100 == 0 {
            log::info!(
                "frame {k}/{frames}: rre {:.2e} (bound {:.2e}), rte {:.3} (bound {:.3}), violations {} / baseline {}",
                tr.rre,
                tr.epsilon_r,
                tr.rte,
                tr.epsilon_t,
                total_violations,
                baseline_violations
            );
        }
        tr.frame_ms = ms(start);
        traces.push(tr);
    }

    let n = traces.len().max(1) as f64;
    let mean = |f: fn(&FrameTrace) -> f64| traces.iter().map(f).sum::<f64>() / n;
    let propagated: Vec<f64> = traces.iter().map(|t| t.propagate_ms).filter(|t| *t > 0.0).collect();
    let mean_ms = StageMeans {
        simulate_ms: mean(|t| t.simulate_ms),
        registration_ms: mean(|t| t.registration_ms),
        integrate_ms: mean(|t| t.integrate_ms),
        deflate_ms: mean(|t| t.deflate_ms),
        reset_ms: mean(|t| t.reset_ms),
        propagate_ms: propagated.iter().sum::<f64>() / propagated.len().max(1) as f64,
        oracle_ms: mean(|t| t.oracle_ms),
        frame_ms: mean(|t| t.frame_ms),
    };
    let rms_rre = rms(traces.iter().map(|t| t.rre));
    let rms_rte = rms(traces.iter().map(|t| t.rte));
    let rms_epsilon_r = rms(traces.iter().map(|t| t.epsilon_r));
    let rms_epsilon_t = rms(traces.iter().map(|t| t.epsilon_t));
    let mut summary = RunSummary {
        scenario: sc.name.clone(),
        frames,
        seed: cfg.seed,
        fraction: cfg.fraction,
        iterations: cfg.iterations,
        oracle: cfg.oracle,
        rms_rre,
        rms_rte,
        rms_epsilon_r,
        rms_epsilon_t,
        bound_ratio_r: rms_epsilon_r / rms_rre,
        bound_ratio_t: rms_epsilon_t / rms_rte,
        rotation_bound_failures: traces.iter().filter(|t| !t.rotation_bound_holds()).count(),
        translation_bound_failures: traces.iter().filter(|t| !t.translation_bound_holds()).count(),
        nonconverged_frames: traces.iter().filter(|t| !t.converged).count(),
        total_violations,
        baseline_violations,
        mean_ms,
        wall_s: 0.0,
        traces,
        grid: None,
    };
    if let Some(dir) = &cfg.out_dir {
        let slice_z = pose0.translation.z;
        write_outputs(dir, &summary, &state.grid, slice_z)?;
    }
    summary.wall_s = wall.elapsed().as_secs_f64();
    if let Some(dir) = &cfg.out_dir {
        fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    }
    summary.grid = Some(state.grid);
    Ok(summary)
}

/// Deterministic columns only; timings go to a separate file.
pub(crate) fn write_trace(path: &Path, traces: &[FrameTrace]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "k",
        "rre",
        "rte",
        "epsilon_r",
        "epsilon_t",
        "rotation_bound_holds",
        "translation_bound_holds",
        "converged",
        "violation_count",
        "baseline_violations",
    ])?;
    for t in traces {
        w.write_record([
            t.k.to_string(),
            t.rre.to_string(),
            t.rte.to_string(),
            t.epsilon_r.to_string(),
            t.epsilon_t.to_string(),
            t.rotation_bound_holds().to_string(),
            t.translation_bound_holds().to_string(),
            t.converged.to_string(),
            t.violation_count.to_string(),
            t.baseline_violations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_timings(path: &Path, traces: &[FrameTrace]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "k",
        "simulate_ms",
        "registration_ms",
        "integrate_ms",
        "deflate_ms",
        "reset_ms",
        "propagate_ms",
        "oracle_ms",
        "frame_ms",
    ])?;
    for t in traces {
        let row = [
            t.simulate_ms,
            t.registration_ms,
            t.integrate_ms,
            t.deflate_ms,
            t.reset_ms,
            t.propagate_ms,
            t.oracle_ms,
            t.frame_ms,
        ];
        let mut rec = vec![t.k.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:.4}")));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_outputs(dir: &Path, s: &RunSummary, grid: &VoxelGrid, slice_z: f64) -> Result<(), PipelineError> {
    fs::create_dir_all(dir)?;
    write_trace(&dir.join("trace.csv"), &s.traces)?;
    write_timings(&dir.join("timings.csv"), &s.traces)?;
    write_snapshot(grid, dir.join("snapshot.bin"))?;
    if grid.locate(&nalgebra::Vector3::new(grid.origin().x, grid.origin().y, slice_z)).is_some() {
        let f = fs::File::create(dir.join("slice.csv"))?;
        write_slice_csv(grid, slice_z, std::io::BufWriter::new(f))?;
    }
    Ok(())
}
