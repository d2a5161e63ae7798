use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::camera::{CameraModel, DepthImage};
use super::{MapError, MapPoseEstimate};
use crate::geom::RotoTranslation;

/// Extent and fusion parameters of a dense grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Map-frame position of the outer corner of voxel (0, 0, 0).
    pub origin: [f64; 3],
    pub resolution: f64,
    pub dims: [usize; 3],
    #[serde(default = "default_truncation_voxels")]
    pub truncation_voxels: f64,
    #[serde(default = "default_weight_cap")]
    pub weight_cap: f64,
    /// When set, a voxel that has gone unobserved for more than this many
    /// frames discards its fused history on the next observation.
    #[serde(default)]
    pub restart_after_frames: Option<u32>,
}

fn default_truncation_voxels() -> f64 {
    4.0
}

fn default_weight_cap() -> f64 {
    100.0
}

impl GridConfig {
    pub fn new(origin: [f64; 3], resolution: f64, dims: [usize; 3]) -> Self {
        Self {
            origin,
            resolution,
            dims,
            truncation_voxels: default_truncation_voxels(),
            weight_cap: default_weight_cap(),
            restart_after_frames: None,
        }
    }

    pub fn validate(&self) -> Result<(), MapError> {
        let bad = |m: &str| Err(MapError::InvalidGrid(m.to_string()));
        if !(self.resolution > 0.0) || !self.resolution.is_finite() {
            return bad("resolution must be positive");
        }
        if self.dims.iter().any(|d| *d == 0) {
            return bad("every dimension needs at least one voxel");
        }
        if self.dims.iter().product::<usize>() > u32::MAX as usize {
            return bad("grid too large");
        }
        if !(self.truncation_voxels > 0.0) || !(self.weight_cap >= 1.0) {
            return bad("truncation must be positive and weight cap at least 1");
        }
        if self.origin.iter().any(|x| !x.is_finite()) {
            return bad("origin must be finite");
        }
        Ok(())
    }
}

/// Dense voxel grid in the map frame, x-fastest storage.
#[derive(Debug, Clone)]
pub struct VoxelGrid {
    origin: Vector3<f64>,
    resolution: f64,
    dims: [usize; 3],
    truncation: f64,
    weight_cap: f64,
    restart_after: Option<u32>,
    pub(crate) tsdf: Vec<f64>,
    pub(crate) weight: Vec<f64>,
    /// Meters; NaN until the voxel is observed and propagated.
    pub(crate) esdf: Vec<f64>,
    pub(crate) correction: Vec<f64>,
    pub(crate) observed: Vec<bool>,
    /// Frame of the last in-FOV observation.
    pub(crate) stamp: Vec<u32>,
    /// Frame counter used for stamps, advanced by the owner.
    pub(crate) frame: u32,
    /// Clipped signed distance from the latest integrated image; NaN where
    /// that image did not see the voxel. Scratch, not part of equality.
    pub(crate) view_sdf: Vec<f64>,
}

/// Bitwise equality of geometry and every voxel field (NaN equals NaN).
impl PartialEq for VoxelGrid {
    fn eq(&self, o: &Self) -> bool {
        let bits = |a: &[f64], b: &[f64]| a.iter().map(|x| x.to_bits()).eq(b.iter().map(|x| x.to_bits()));
        self.origin == o.origin
            && self.resolution == o.resolution
            && self.dims == o.dims
            && bits(&self.tsdf, &o.tsdf)
            && bits(&self.weight, &o.weight)
            && bits(&self.esdf, &o.esdf)
            && bits(&self.correction, &o.correction)
            && self.observed == o.observed
            && self.stamp == o.stamp
    }
}

/// Per-slice mutable views used by the data-parallel passes.
struct SliceMut<'a> {
    z: usize,
    tsdf: &'a mut [f64],
    weight: &'a mut [f64],
    correction: &'a mut [f64],
    observed: &'a mut [bool],
    stamp: &'a mut [u32],
    view_sdf: &'a mut [f64],
}

impl VoxelGrid {
    pub fn new(cfg: &GridConfig) -> Result<Self, MapError> {
        cfg.validate()?;
        let n = cfg.dims.iter().product();
        Ok(Self {
            origin: Vector3::from(cfg.origin),
            resolution: cfg.resolution,
            dims: cfg.dims,
            truncation: cfg.truncation_voxels * cfg.resolution,
            weight_cap: cfg.weight_cap,
            restart_after: cfg.restart_after_frames,
            tsdf: vec![0.0; n],
            weight: vec![0.0; n],
            esdf: vec![f64::NAN; n],
            correction: vec![0.0; n],
            observed: vec![false; n],
            stamp: vec![0; n],
            frame: 0,
            view_sdf: vec![f64::NAN; n],
        })
    }

    pub fn origin(&self) -> &Vector3<f64> {
        &self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.tsdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tsdf.is_empty()
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    /// Half the voxel diagonal: the most a nearest-center lookup can be off.
    pub fn margin(&self) -> f64 {
        0.5 * 3f64.sqrt() * self.resolution
    }

    /// Length of the grid diagonal, used when no surface exists.
    pub fn diagonal(&self) -> f64 {
        let [x, y, z] = self.dims.map(|d| d as f64);
        (x * x + y * y + z * z).sqrt() * self.resolution
    }

    pub fn set_frame(&mut self, frame: u32) {
        self.frame = frame;
    }

    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    pub fn center(&self, idx: usize) -> Vector3<f64> {
        let [x, y, z] = self.coords(idx);
        self.center_of(x, y, z)
    }

    pub fn center_of(&self, x: usize, y: usize, z: usize) -> Vector3<f64> {
        self.origin + Vector3::new(x as f64 + 0.5, y as f64 + 0.5, z as f64 + 0.5) * self.resolution
    }

    /// Voxel containing a map-frame point.
    pub fn locate(&self, p: &Vector3<f64>) -> Option<usize> {
        let rel = (p - self.origin) / self.resolution;
        let mut c = [0usize; 3];
        for k in 0..3 {
            let f = rel[k].floor();
            if !(f >= 0.0 && f < self.dims[k] as f64) {
                return None;
            }
            c[k] = f as usize;
        }
        Some(self.index(c[0], c[1], c[2]))
    }

    pub fn tsdf(&self) -> &[f64] {
        &self.tsdf
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn esdf(&self) -> &[f64] {
        &self.esdf
    }

    pub fn correction(&self) -> &[f64] {
        &self.correction
    }

    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    /// Signed distance from the latest integrated image, if it saw the voxel.
    pub fn view_sdf_at(&self, idx: usize) -> Option<f64> {
        Some(self.view_sdf[idx]).filter(|v| !v.is_nan())
    }

    pub(crate) fn from_parts(
        origin: Vector3<f64>,
        resolution: f64,
        dims: [usize; 3],
        tsdf: Vec<f64>,
        esdf: Vec<f64>,
        correction: Vec<f64>,
        observed: Vec<bool>,
    ) -> Self {
        let n = tsdf.len();
        let weight = observed.iter().map(|o| if *o { 1.0 } else { 0.0 }).collect();
        Self {
            origin,
            resolution,
            dims,
            truncation: default_truncation_voxels() * resolution,
            weight_cap: default_weight_cap(),
            restart_after: None,
            tsdf,
            weight,
            esdf,
            correction,
            observed,
            stamp: vec![0; n],
            frame: 0,
            view_sdf: vec![f64::NAN; n],
        }
    }

    fn slices_mut(&mut self) -> impl IndexedParallelIterator<Item = SliceMut<'_>> {
        let plane = self.dims[0] * self.dims[1];
        (
            self.tsdf.par_chunks_mut(plane),
            self.weight.par_chunks_mut(plane),
            self.correction.par_chunks_mut(plane),
            self.observed.par_chunks_mut(plane),
            self.stamp.par_chunks_mut(plane),
            self.view_sdf.par_chunks_mut(plane),
        )
            .into_par_iter()
            .enumerate()
            .map(|(z, (tsdf, weight, correction, observed, stamp, view_sdf))| SliceMut {
                z,
                tsdf,
                weight,
                correction,
                observed,
                stamp,
                view_sdf,
            })
    }

    /// Voxel index box `[lo, hi)` covering the viewing frustum, clipped to
    /// the grid.
    fn frustum_box(&self, cam: &CameraModel, pose: &RotoTranslation) -> Option<([usize; 3], [usize; 3])> {
        let w = cam.width as f64;
        let h = cam.height as f64;
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for (u, v) in [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)] {
            let ray = Vector3::new((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
            for d in [cam.min_depth, cam.max_depth] {
                let p = pose.transform_point(&(ray * d));
                lo = lo.inf(&p);
                hi = hi.sup(&p);
            }
        }
        let mut a = [0usize; 3];
        let mut b = [0usize; 3];
        for k in 0..3 {
            let l = ((lo[k] - self.origin[k]) / self.resolution - 1.0).floor().max(0.0);
            let u = ((hi[k] - self.origin[k]) / self.resolution + 1.0).ceil().min(self.dims[k] as f64);
            if !(l < u) {
                return None;
            }
            a[k] = l as usize;
            b[k] = u as usize;
        }
        Some((a, b))
    }
}

/// Projective signed distance of a camera-frame point, if the point is in
/// the field of view, has a depth return and is not occluded beyond the
/// truncation band. Integration and FOV reset share this predicate, so a
/// voxel is reset exactly when it was fused this frame.
fn fov_sdf(cam: &CameraModel, depth: &DepthImage, p: &Vector3<f64>, trunc: f64) -> Option<f64> {
    if p.z < cam.min_depth || p.z > cam.max_depth {
        return None;
    }
    let (u, v) = cam.project(p)?;
    let d = depth.lookup(u, v, cam)?;
    let sdf = d - p.z;
    (sdf >= -trunc).then_some(sdf)
}

/// Walks every voxel center inside the frustum box in camera coordinates
/// and calls `f(slice, in-slice index, camera point)`.
fn for_each_in_frustum<F>(grid: &mut VoxelGrid, cam: &CameraModel, pose: &RotoTranslation, f: F)
where
    F: Fn(&mut SliceMut<'_>, usize, &Vector3<f64>) + Sync,
{
    let Some((lo, hi)) = grid.frustum_box(cam, pose) else {
        return;
    };
    let inv = pose.inverse();
    let rt = *inv.rotation.matrix();
    let step_x = rt.column(0) * grid.resolution;
    let step_y = rt.column(1) * grid.resolution;
    let nx = grid.dims[0];
    let base = inv.transform_point(&grid.center_of(0, 0, 0));
    let step_z = rt.column(2) * grid.resolution;
    grid.slices_mut()
        .filter(|s| s.z >= lo[2] && s.z < hi[2])
        .for_each(|mut s| {
            let pz = base + step_z * s.z as f64;
            for y in lo[1]..hi[1] {
                let py = pz + step_y * y as f64;
                for x in lo[0]..hi[0] {
                    let p = py + step_x * x as f64;
                    f(&mut s, x + nx * y, &p);
                }
            }
        });
}

/// Projective TSDF fusion of one depth image taken from `pose` (camera to
/// map). Returns the number of voxels updated.
pub fn integrate_depth(
    grid: &mut VoxelGrid,
    depth: &DepthImage,
    cam: &CameraModel,
    pose: &RotoTranslation,
) -> Result<usize, MapError> {
    if depth.width() != cam.width || depth.height() != cam.height {
        return Err(MapError::DimensionMismatch(format!(
            "depth image {}x{} vs camera {}x{}",
            depth.width(),
            depth.height(),
            cam.width,
            cam.height
        )));
    }
    let trunc = grid.truncation;
    let cap = grid.weight_cap;
    let frame = grid.frame;
    let restart = grid.restart_after;
    let updated = std::sync::atomic::AtomicUsize::new(0);
    grid.view_sdf.par_iter_mut().for_each(|v| *v = f64::NAN);
    for_each_in_frustum(grid, cam, pose, |s, i, p| {
        let Some(sdf) = fov_sdf(cam, depth, p, trunc) else {
            return;
        };
        let sdf = sdf.min(trunc);
        s.view_sdf[i] = sdf;
        let mut w = s.weight[i];
        if let Some(gap) = restart {
            if w > 0.0 && frame.saturating_sub(s.stamp[i]) > gap {
                w = 0.0;
            }
        }
        s.tsdf[i] = (s.tsdf[i] * w + sdf) / (w + 1.0);
        s.weight[i] = (w + 1.0).min(cap);
        updated.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
    });
    Ok(updated.into_inner())
}

/// Adds Δ = ε_R‖p̂ − t̂‖ + ε_t to every voxel's correction, where p̂ is the
/// voxel center in the current body frame and t̂ the estimated frame
/// translation.
///
/// ‖p̂ − t̂‖ equals the map-frame distance from the voxel center to
/// `pose(t̂)`, which is what the loop evaluates.
pub fn deflate(grid: &mut VoxelGrid, est: &MapPoseEstimate) {
    let (epsilon_r, epsilon_t) = (est.epsilon_r, est.epsilon_t);
    debug_assert!(epsilon_r >= 0.0 && epsilon_t >= 0.0);
    if epsilon_r == 0.0 && epsilon_t == 0.0 {
        return;
    }
    let o = est.pose.transform_point(&est.delta.translation);
    let c0 = grid.center_of(0, 0, 0);
    let res = grid.resolution;
    let [nx, ny, _] = grid.dims;
    grid.correction
        .par_chunks_mut(nx * ny)
        .enumerate()
        .for_each(|(z, slice)| {
            let dz = c0.z + z as f64 * res - o.z;
            for y in 0..ny {
                let dy = c0.y + y as f64 * res - o.y;
                let row = &mut slice[y * nx..(y + 1) * nx];
                for (x, c) in row.iter_mut().enumerate() {
                    let dx = c0.x + x as f64 * res - o.x;
                    *c += epsilon_r * (dx * dx + dy * dy + dz * dz).sqrt() + epsilon_t;
                }
            }
        });
}

/// Zeroes the correction of every voxel seen this frame and marks it
/// observed. Returns the number of voxels reset.
pub fn reset_corrections_in_fov(
    grid: &mut VoxelGrid,
    cam: &CameraModel,
    pose: &RotoTranslation,
    depth: &DepthImage,
) -> usize {
    let trunc = grid.truncation;
    let frame = grid.frame;
    let count = std::sync::atomic::AtomicUsize::new(0);
    for_each_in_frustum(grid, cam, pose, |s, i, p| {
        if fov_sdf(cam, depth, p, trunc).is_some() {
            s.correction[i] = 0.0;
            s.observed[i] = true;
            s.stamp[i] = frame;
            count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        }
    });
    count.into_inner()
}

/// Certified distance at a body-frame point: ESDF at the containing voxel
/// minus its correction and the discretization margin. `None` when the
/// point is off the grid or its voxel is unknown.
pub fn certified_distance(grid: &VoxelGrid, pose: &RotoTranslation, p_body: &Vector3<f64>) -> Option<f64> {
    let idx = grid.locate(&pose.transform_point(p_body))?;
    grid.certified_at(idx)
}

impl VoxelGrid {
    pub fn certified_at(&self, idx: usize) -> Option<f64> {
        self.uncorrected_at(idx).map(|d| d - self.correction[idx])
    }

    /// ESDF minus the discretization margin, ignoring deflation.
    pub fn uncorrected_at(&self, idx: usize) -> Option<f64> {
        let e = self.esdf[idx];
        (self.observed[idx] && !e.is_nan()).then(|| e - self.margin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Rotation, UnitQuaternion};

    fn est(pose: RotoTranslation, t_hat: Vector3<f64>, er: f64, et: f64) -> MapPoseEstimate {
        MapPoseEstimate {
            pose,
            delta: RotoTranslation::from_translation(t_hat),
            epsilon_r: er,
            epsilon_t: et,
        }
    }

    fn wall_setup(depth_m: f64) -> (VoxelGrid, CameraModel, DepthImage) {
        let cfg = GridConfig::new([-1.0, -1.0, 0.0], 0.05, [40, 40, 60]);
        let grid = VoxelGrid::new(&cfg).unwrap();
        let cam = CameraModel::with_fov(64, 48, 90.0, 0.1, 5.0);
        let img = DepthImage::new(64, 48, vec![depth_m; 64 * 48]).unwrap();
        (grid, cam, img)
    }

    #[test]
    fn flat_wall_tsdf() {
        let (mut g, cam, img) = wall_setup(2.0);
        let n = integrate_depth(&mut g, &img, &cam, &RotoTranslation::identity()).unwrap();
        assert!(n > 0);
        // centers on the optical axis at z = 1.975, 1.775, ...
        let near_wall = g.locate(&Vector3::new(0.01, 0.01, 1.975)).unwrap();
        assert!((g.tsdf[near_wall] - 0.025).abs() < 1e-12);
        let in_front = g.locate(&Vector3::new(0.01, 0.01, 1.775)).unwrap();
        assert!((g.tsdf[in_front] - 0.2).abs() < 1e-12);
        let far = g.locate(&Vector3::new(0.01, 0.01, 1.0)).unwrap();
        assert_eq!(g.tsdf[far], g.truncation());
        let behind = g.locate(&Vector3::new(0.01, 0.01, 2.125)).unwrap();
        assert!((g.tsdf[behind] + 0.125).abs() < 1e-12);
        // beyond the truncation band behind the wall: untouched
        let hidden = g.locate(&Vector3::new(0.01, 0.01, 2.5)).unwrap();
        assert_eq!(g.weight[hidden], 0.0);
    }

    #[test]
    fn wall_tsdf_matches_plane_distance_oracle() {
        let (mut g, cam, img) = wall_setup(2.0);
        integrate_depth(&mut g, &img, &cam, &RotoTranslation::identity()).unwrap();
        for idx in 0..g.len() {
            if g.weight[idx] > 0.0 {
                let c = g.center(idx);
                let expect = (2.0 - c.z).clamp(-g.truncation(), g.truncation());
                assert!((g.tsdf[idx] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_image_leaves_grid_unchanged() {
        let (mut g, cam, _) = wall_setup(2.0);
        let before = g.clone();
        let img = DepthImage::invalid(64, 48);
        assert_eq!(integrate_depth(&mut g, &img, &cam, &RotoTranslation::identity()).unwrap(), 0);
        assert_eq!(reset_corrections_in_fov(&mut g, &cam, &RotoTranslation::identity(), &img), 0);
        assert!(g == before);
    }

    #[test]
    fn repeated_integration_is_idempotent() {
        let (mut g, cam, img) = wall_setup(1.5);
        integrate_depth(&mut g, &img, &cam, &RotoTranslation::identity()).unwrap();
        let once = g.tsdf.clone();
        integrate_depth(&mut g, &img, &cam, &RotoTranslation::identity()).unwrap();
        for (a, b) in once.iter().zip(&g.tsdf) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn weight_is_capped() {
        let (mut g, cam, img) = wall_setup(1.5);
        for _ in 0..120 {
            integrate_depth(&mut g, &img, &cam, &RotoTranslation::identity()).unwrap();
        }
        assert!(g.weight.iter().all(|w| *w <= 100.0));
        assert!(g.weight.iter().any(|w| *w == 100.0));
    }

    #[test]
    fn mismatched_image_rejected() {
        let (mut g, cam, _) = wall_setup(1.5);
        let img = DepthImage::invalid(10, 10);
        assert!(integrate_depth(&mut g, &img, &cam, &RotoTranslation::identity()).is_err());
    }

    #[test]
    fn uniform_translation_deflation() {
        let (mut g, _, _) = wall_setup(1.5);
        deflate(&mut g, &est(RotoTranslation::identity(), Vector3::zeros(), 0.0, 0.02));
        assert!(g.correction.iter().all(|c| *c == 0.02));
    }

    #[test]
    fn deflation_matches_closed_form() {
        let (mut g, _, _) = wall_setup(1.5);
        let q = UnitQuaternion::from_axis_angle(&Vector3::new(0.3, -1.0, 0.2), 0.4);
        let pose = RotoTranslation::new(q.to_rotation(), Vector3::new(0.2, -0.1, 0.5));
        let t_hat = Vector3::new(0.01, 0.03, -0.02);
        let (er, et) = (0.013, 0.004);
        deflate(&mut g, &est(pose, t_hat, er, et));
        for idx in [0, 1234, 50_000, g.len() - 1] {
            let p = pose.inverse().transform_point(&g.center(idx));
            let expect = er * (p - t_hat).norm() + et;
            assert!((g.correction[idx] - expect).abs() < 1e-12);
            assert!(g.correction[idx] >= et);
        }
    }

    #[test]
    fn reset_respects_fov_and_occlusion() {
        let (mut g, cam, img) = wall_setup(2.0);
        deflate(&mut g, &est(RotoTranslation::identity(), Vector3::zeros(), 0.0, 0.5));
        integrate_depth(&mut g, &img, &cam, &RotoTranslation::identity()).unwrap();
        reset_corrections_in_fov(&mut g, &cam, &RotoTranslation::identity(), &img);
        let front = g.locate(&Vector3::new(0.01, 0.01, 1.0)).unwrap();
        assert_eq!(g.correction[front], 0.0);
        assert!(g.observed[front]);
        let hidden = g.locate(&Vector3::new(0.01, 0.01, 2.6)).unwrap();
        assert_eq!(g.correction[hidden], 0.5);
        assert!(!g.observed[hidden]);
        // the grid starts at z = 0; voxels beside the camera (z < min_depth)
        // and outside the image stay deflated
        let beside = g.locate(&Vector3::new(0.9, 0.0, 0.05)).unwrap();
        assert_eq!(g.correction[beside], 0.5);
    }

    #[test]
    fn behind_camera_untouched() {
        let (mut g, cam, img) = wall_setup(2.0);
        // camera at z = 2.9 looking toward −z sees the region z < 2.9 only
        let flip = Rotation::from_axis_angle(&Vector3::x(), std::f64::consts::PI);
        let pose = RotoTranslation::new(flip, Vector3::new(0.0, 0.0, 2.9));
        deflate(&mut g, &est(pose, Vector3::zeros(), 0.0, 0.1));
        reset_corrections_in_fov(&mut g, &cam, &pose, &img);
        let behind = g.locate(&Vector3::new(0.0, 0.0, 2.95)).unwrap();
        assert_eq!(g.correction[behind], 0.1);
        let ahead = g.locate(&Vector3::new(0.0, 0.0, 1.5)).unwrap();
        assert_eq!(g.correction[ahead], 0.0);
    }

    #[test]
    fn restart_discards_stale_history() {
        let cfg = GridConfig {
            restart_after_frames: Some(1),
            ..GridConfig::new([-1.0, -1.0, 0.0], 0.05, [40, 40, 60])
        };
        let mut g = VoxelGrid::new(&cfg).unwrap();
        let cam = CameraModel::with_fov(64, 48, 90.0, 0.1, 5.0);
        let far = DepthImage::new(64, 48, vec![2.0; 64 * 48]).unwrap();
        let near = DepthImage::new(64, 48, vec![1.5; 64 * 48]).unwrap();
        let id = RotoTranslation::identity();
        for f in 0..10 {
            g.set_frame(f);
            integrate_depth(&mut g, &far, &cam, &id).unwrap();
            reset_corrections_in_fov(&mut g, &cam, &id, &far);
        }
        let v = g.locate(&Vector3::new(0.01, 0.01, 1.625)).unwrap();
        assert!(g.tsdf[v] > 0.0);
        g.set_frame(20);
        integrate_depth(&mut g, &near, &cam, &id).unwrap();
        assert!((g.tsdf[v] + 0.125).abs() < 1e-12);
        assert_eq!(g.weight[v], 1.0);
    }

    #[test]
    fn locate_and_centers() {
        let (g, _, _) = wall_setup(1.0);
        for idx in [0, 17, 4321, g.len() - 1] {
            assert_eq!(g.locate(&g.center(idx)), Some(idx));
        }
        assert!(g.locate(&Vector3::new(-1.01, 0.0, 0.5)).is_none());
        assert!(g.locate(&Vector3::new(0.0, 0.0, 3.0)).is_none());
    }
}
