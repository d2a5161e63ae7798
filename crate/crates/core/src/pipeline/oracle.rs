use rayon::prelude::*;

use crate::cesdf::VoxelGrid;
use crate::geom::RotoTranslation;
use crate::simworld::{scene_sdf, Scene};

/// Slack for the comparison against the analytic distance.
pub const ORACLE_TOL: f64 = 1e-9;

/// Which stored distance to hold against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    /// ESDF minus discretization margin minus accumulated correction.
    Certified,
    /// ESDF minus discretization margin only.
    Uncorrected,
}

/// Violation counts of both certificates from one pass over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ViolationCounts {
    pub certified: usize,
    pub uncorrected: usize,
}

/// Scene distances at the voxel centers, cached once per run. The distance
/// field is 1-Lipschitz, so a claim at most the cached value minus how far
/// the center moves under the map-to-world transform cannot violate, and
/// only the remaining voxels need the scene evaluated.
#[derive(Debug, Clone)]
pub struct Oracle {
    center_sdf: Vec<f64>,
}

impl Oracle {
    pub fn new(grid: &VoxelGrid, scene: &Scene) -> Self {
        let center_sdf = (0..grid.len())
            .into_par_iter()
            .map(|i| scene_sdf(scene, &grid.center(i)))
            .collect();
        Self { center_sdf }
    }

    /// Same counts as [`count_violations`] for both certificates.
    pub fn count(
        &self,
        grid: &VoxelGrid,
        scene: &Scene,
        pose_est: &RotoTranslation,
        pose_true: &RotoTranslation,
    ) -> ViolationCounts {
        assert_eq!(grid.len(), self.center_sdf.len(), "oracle built for another grid");
        let map_to_world = pose_true.compose(&pose_est.inverse());
        (0..grid.len())
            .into_par_iter()
            .fold(ViolationCounts::default, |mut acc, i| {
                let Some(u) = grid.uncorrected_at(i).filter(|u| *u > 0.0) else {
                    return acc;
                };
                let c = grid.center(i);
                let x = map_to_world.transform_point(&c);
                if u <= self.center_sdf[i] - (x - c).norm() {
                    return acc;
                }
                let truth = scene_sdf(scene, &x).max(0.0) + ORACLE_TOL;
                acc.uncorrected += usize::from(u > truth);
                acc.certified += usize::from(u - grid.correction()[i] > truth);
                acc
            })
            .reduce(ViolationCounts::default, |a, b| ViolationCounts {
                certified: a.certified + b.certified,
                uncorrected: a.uncorrected + b.uncorrected,
            })
    }
}

/// Observed voxels whose claimed distance exceeds the true clearance of the
/// body point they stand for. A voxel center `c` in the estimated map frame
/// is the body point `pose_est⁻¹ c`, which truly sits at `pose_true` of it.
pub fn count_violations(
    grid: &VoxelGrid,
    scene: &Scene,
    pose_est: &RotoTranslation,
    pose_true: &RotoTranslation,
    which: Certificate,
) -> usize {
    let map_to_world = pose_true.compose(&pose_est.inverse());
    (0..grid.len())
        .into_par_iter()
        .filter(|&i| {
            let claimed = match which {
                Certificate::Certified => grid.certified_at(i),
                Certificate::Uncorrected => grid.uncorrected_at(i),
            };
            match claimed {
                Some(d) if d > 0.0 => {
                    let x = map_to_world.transform_point(&grid.center(i));
                    d > scene_sdf(scene, &x).max(0.0) + ORACLE_TOL
                }
                _ => false,
            }
        })
        .count()
}
