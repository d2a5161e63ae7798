//! Certified distance map: TSDF fusion, per-frame deflation by the odometry
//! error bounds, FOV reset, periodic ESDF recompute and certified queries.

mod camera;
mod edt;
mod export;
mod grid;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::RotoTranslation;
use crate::registration::RegistrationResult;

pub use camera::{CameraModel, DepthImage, INVALID_DEPTH};
pub use edt::{propagate_esdf, refresh_esdf_in_view, PropagationStats};
pub use export::{read_snapshot, write_slice_csv, write_snapshot};
pub use grid::{certified_distance, deflate, integrate_depth, reset_corrections_in_fov, GridConfig, VoxelGrid};

#[derive(Debug, Error)]
pub enum MapError {
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid bounds: epsilon_r = {epsilon_r}, epsilon_t = {epsilon_t}")]
    InvalidBounds { epsilon_r: f64, epsilon_t: f64 },
    #[error("{0}")]
    OutOfGrid(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Estimated body-to-map pose after a frame, the frame's estimated motion
/// and its error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapPoseEstimate {
    /// Estimated B_{k+1} → M.
    pub pose: RotoTranslation,
    /// Estimated B_k → B_{k+1}.
    pub delta: RotoTranslation,
    pub epsilon_r: f64,
    pub epsilon_t: f64,
}

/// How ESDF values get refreshed and corrections reset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EsdfRefresh {
    /// On refresh frames, voxels seen by the current image get distances
    /// computed from that image alone and a zero correction. Everything
    /// else keeps deflating.
    #[default]
    CurrentView,
    /// Voxels seen each frame get a zero correction; on refresh frames the
    /// whole observed map is recomputed from the fused TSDF.
    FusedMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingConfig {
    /// Frames between ESDF refreshes.
    pub esdf_period: usize,
    pub refresh: EsdfRefresh,
    /// Treat never-observed voxels as obstacles in fused-map propagation.
    pub unknown_as_occupied: bool,
    /// Apply the per-frame deflation. Off gives the uncorrected baseline.
    pub deflation: bool,
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self {
            esdf_period: 6,
            refresh: EsdfRefresh::default(),
            unknown_as_occupied: true,
            deflation: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub frame: usize,
    pub integrated: usize,
    pub reset: usize,
    pub propagated: bool,
    pub integrate_ms: f64,
    pub deflate_ms: f64,
    pub reset_ms: f64,
    pub propagate_ms: f64,
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Owns the grid and the running pose estimate of one mapping session.
#[derive(Debug, Clone)]
pub struct MappingState {
    pub grid: VoxelGrid,
    pub cam: CameraModel,
    pub config: MappingConfig,
    pose: RotoTranslation,
    frame: usize,
}

impl MappingState {
    pub fn new(
        grid: VoxelGrid,
        cam: CameraModel,
        initial_pose: RotoTranslation,
        config: MappingConfig,
    ) -> Result<Self, MapError> {
        cam.validate()?;
        if config.esdf_period == 0 {
            return Err(MapError::InvalidGrid("esdf_period must be at least 1".into()));
        }
        Ok(Self {
            grid,
            cam,
            config,
            pose: initial_pose,
            frame: 0,
        })
    }

    /// Estimated body-to-map pose of the latest frame.
    pub fn pose(&self) -> &RotoTranslation {
        &self.pose
    }

    pub fn frame(&self) -> usize {
        self.frame
    }

    /// Fuses the first frame at the initial pose and builds the ESDF.
    pub fn initialize(&mut self, depth: &DepthImage) -> Result<StepReport, MapError> {
        self.grid.set_frame(0);
        let mut rep = StepReport::default();
        let t = Instant::now();
        rep.integrated = integrate_depth(&mut self.grid, depth, &self.cam, &self.pose)?;
        rep.integrate_ms = ms_since(t);
        self.refresh(depth, true, &mut rep);
        Ok(rep)
    }

    fn refresh(&mut self, depth: &DepthImage, scheduled: bool, rep: &mut StepReport) {
        if self.config.refresh == EsdfRefresh::FusedMap {
            let t = Instant::now();
            rep.reset = reset_corrections_in_fov(&mut self.grid, &self.cam, &self.pose, depth);
            rep.reset_ms = ms_since(t);
        }
        if !scheduled {
            return;
        }
        let t = Instant::now();
        match self.config.refresh {
            EsdfRefresh::CurrentView => rep.reset = refresh_esdf_in_view(&mut self.grid).1,
            EsdfRefresh::FusedMap => {
                propagate_esdf(&mut self.grid, self.config.unknown_as_occupied);
            }
        }
        rep.propagate_ms = ms_since(t);
        rep.propagated = true;
    }

    /// One mapping frame: pose update, fusion, deflation and, on schedule,
    /// ESDF refresh with correction reset (every frame for fused-map reset).
    pub fn step(
        &mut self,
        depth: &DepthImage,
        delta: &RotoTranslation,
        epsilon_r: f64,
        epsilon_t: f64,
    ) -> Result<StepReport, MapError> {
        if !(epsilon_r >= 0.0 && epsilon_t >= 0.0 && epsilon_r.is_finite() && epsilon_t.is_finite()) {
            return Err(MapError::InvalidBounds { epsilon_r, epsilon_t });
        }
        self.frame += 1;
        self.grid.set_frame(self.frame as u32);
        self.pose = self.pose.compose(&delta.inverse());
        let est = MapPoseEstimate {
            pose: self.pose,
            delta: *delta,
            epsilon_r,
            epsilon_t,
        };
        let mut rep = StepReport {
            frame: self.frame,
            ..Default::default()
        };

        let t = Instant::now();
        rep.integrated = integrate_depth(&mut self.grid, depth, &self.cam, &self.pose)?;
        rep.integrate_ms = ms_since(t);

        let t = Instant::now();
        if self.config.deflation {
            deflate(&mut self.grid, &est);
        }
        rep.deflate_ms = ms_since(t);

        self.refresh(depth, self.frame % self.config.esdf_period == 0, &mut rep);
        Ok(rep)
    }
}

/// [`MappingState::step`] driven by a registration result.
pub fn step_frame(
    state: &mut MappingState,
    depth: &DepthImage,
    reg: &RegistrationResult,
) -> Result<StepReport, MapError> {
    state.step(depth, &reg.pose_delta(), reg.epsilon_r, reg.epsilon_t)
}
