use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::MapError;

/// Pinhole camera. Camera frame: z forward, x right, y down. Pixel `(i, j)`
/// covers `u ∈ [i, i+1)`, `v ∈ [j, j+1)` with `u = fx·x/z + cx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    pub min_depth: f64,
    pub max_depth: f64,
}

impl CameraModel {
    /// Camera with the principal point at the image center and the given
    /// horizontal field of view.
    pub fn with_fov(width: usize, height: usize, hfov_deg: f64, min_depth: f64, max_depth: f64) -> Self {
        let f = 0.5 * width as f64 / (0.5 * hfov_deg.to_radians()).tan();
        Self {
            fx: f,
            fy: f,
            cx: 0.5 * width as f64,
            cy: 0.5 * height as f64,
            width,
            height,
            min_depth,
            max_depth,
        }
    }

    pub fn validate(&self) -> Result<(), MapError> {
        let ok = self.fx > 0.0
            && self.fy > 0.0
            && self.width > 0
            && self.height > 0
            && self.min_depth > 0.0
            && self.min_depth < self.max_depth
            && self.max_depth.is_finite();
        if ok {
            Ok(())
        } else {
            Err(MapError::InvalidCamera(format!("{self:?}")))
        }
    }

    /// Continuous pixel coordinates of a camera-frame point, if it lies in
    /// front of the camera and inside the image.
    pub fn project(&self, p: &Vector3<f64>) -> Option<(f64, f64)> {
        if p.z <= 0.0 {
            return None;
        }
        let u = self.fx * p.x / p.z + self.cx;
        let v = self.fy * p.y / p.z + self.cy;
        (u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64).then_some((u, v))
    }

    /// Ray through the center of pixel `(i, j)`, scaled so that z = 1.
    pub fn pixel_ray(&self, i: usize, j: usize) -> Vector3<f64> {
        Vector3::new(
            (i as f64 + 0.5 - self.cx) / self.fx,
            (j as f64 + 0.5 - self.cy) / self.fy,
            1.0,
        )
    }
}

/// Row-major z-depth image in meters. `0.0` marks a pixel without a return.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

pub const INVALID_DEPTH: f64 = 0.0;

impl DepthImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, MapError> {
        if data.len() != width * height {
            return Err(MapError::DimensionMismatch(format!(
                "{} samples for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn invalid(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![INVALID_DEPTH; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.width + i]
    }

    pub fn set(&mut self, i: usize, j: usize, d: f64) {
        self.data[j * self.width + i] = d;
    }

    /// Depth usable for fusion: positive, finite and within range.
    fn usable(d: f64, cam: &CameraModel) -> bool {
        d > 0.0 && d.is_finite() && d <= cam.max_depth
    }

    /// Smallest usable depth among the (up to) four pixels whose centers
    /// surround `(u, v)`. Taking the minimum keeps silhouette edges from
    /// leaking far depths onto near voxels.
    pub fn lookup(&self, u: f64, v: f64, cam: &CameraModel) -> Option<f64> {
        let i0 = (u - 0.5).floor();
        let j0 = (v - 0.5).floor();
        let mut best: Option<f64> = None;
        for dj in 0..2 {
            for di in 0..2 {
                let i = i0 + di as f64;
                let j = j0 + dj as f64;
                if i < 0.0 || j < 0.0 || i >= self.width as f64 || j >= self.height as f64 {
                    continue;
                }
                let d = self.get(i as usize, j as usize);
                if Self::usable(d, cam) {
                    best = Some(best.map_or(d, |b: f64| b.min(d)));
                }
            }
        }
        best
    }
}
