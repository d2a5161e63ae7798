//! TOML scenario files.
//!
//! ```toml
//! name = "demo"
//! seed = 7
//! frame_rate = 30.0
//! features = 300
//!
//! [camera]
//! width = 160
//! height = 120
//! hfov_deg = 80.0
//! min_depth = 0.2
//! max_depth = 7.0
//!
//! [noise]                # optional, defaults shown
//! delta_fraction = 0.02
//! delta_floor = 0.005
//! outlier_rate = 0.0
//! outlier_magnitude = 1.0
//! noise_scale = 1.0
//!
//! [grid]
//! origin = [-5.0, -5.0, 0.0]
//! resolution = 0.05
//! dims = [200, 200, 60]
//!
//! [mapping]              # optional
//! esdf_period = 6
//!
//! [registration]         # optional
//! fraction = 0.05
//! iterations = 1000
//!
//! [[scene]]
//! type = "plane"         # or "sphere" (center, radius), "box" (min, max)
//! normal = [0.0, 0.0, 1.0]
//! offset = 0.0
//!
//! [[keyframe]]
//! t = 0.0
//! position = [0.0, 0.0, 1.2]
//! yaw_deg = 0.0          # heading about +z, 0 looks along +x
//! pitch_deg = 0.0        # optional, positive looks up
//! ```

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use toml::Spanned;

use super::{camera_pose, Primitive, Scene, SensorNoiseModel, SimError, Trajectory};
use crate::cesdf::{CameraModel, GridConfig, MappingConfig};
use crate::registration::GncConfig;

/// Registration parameters a scenario suggests; run options may override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegistrationSettings {
    pub fraction: f64,
    pub iterations: usize,
    pub gnc: GncConfig,
}

impl Default for RegistrationSettings {
    fn default() -> Self {
        Self {
            fraction: 0.05,
            iterations: 1000,
            gnc: GncConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraSpec {
    width: usize,
    height: usize,
    hfov_deg: f64,
    min_depth: f64,
    max_depth: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyframeSpec {
    t: f64,
    position: [f64; 3],
    yaw_deg: f64,
    #[serde(default)]
    pitch_deg: f64,
}

fn default_features() -> usize {
    300
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    seed: u64,
    frame_rate: f64,
    #[serde(default = "default_features")]
    features: usize,
    camera: Spanned<CameraSpec>,
    noise: Option<Spanned<SensorNoiseModel>>,
    grid: Spanned<GridConfig>,
    mapping: Option<Spanned<MappingConfig>>,
    #[serde(default)]
    registration: RegistrationSettings,
    scene: Vec<Spanned<Primitive>>,
    keyframe: Vec<Spanned<KeyframeSpec>>,
}

/// A validated simulation setup.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    /// Master seed; per-frame seeds derive from it.
    pub seed: u64,
    /// Correspondences requested per frame pair.
    pub features: usize,
    pub scene: Scene,
    pub trajectory: Trajectory,
    pub camera: CameraModel,
    pub noise: SensorNoiseModel,
    pub grid: GridConfig,
    pub mapping: MappingConfig,
    pub registration: RegistrationSettings,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|b| *b == b'\n').count() + 1
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Scenario {
            line: None,
            message: format!("{}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, SimError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| SimError::Scenario {
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        let at = |span: std::ops::Range<usize>, message: String| SimError::Scenario {
            line: Some(line_of(text, span.start)),
            message,
        };
        let whole = |message: String| SimError::Scenario { line: None, message };

        let camera = {
            let c = raw.camera.get_ref();
            let cam = CameraModel::with_fov(c.width, c.height, c.hfov_deg, c.min_depth, c.max_depth);
            let fov_ok = c.hfov_deg > 0.0 && c.hfov_deg < 180.0;
            if !fov_ok || cam.validate().is_err() {
                return Err(at(raw.camera.span(), format!("invalid camera {c:?}")));
            }
            cam
        };
        let noise = match &raw.noise {
            Some(n) => {
                n.get_ref()
                    .validate(camera.max_depth)
                    .map_err(|e| at(n.span(), e.to_string()))?;
                *n.get_ref()
            }
            None => SensorNoiseModel::default(),
        };
        raw.grid
            .get_ref()
            .validate()
            .map_err(|e| at(raw.grid.span(), e.to_string()))?;
        let mapping = match &raw.mapping {
            Some(m) if m.get_ref().esdf_period == 0 => {
                return Err(at(m.span(), "esdf_period must be at least 1".into()));
            }
            Some(m) => m.get_ref().clone(),
            None => MappingConfig::default(),
        };
        let reg = &raw.registration;
        if !(reg.fraction > 0.0 && reg.fraction <= 1.0) || reg.iterations == 0 {
            return Err(whole(format!(
                "registration needs fraction in (0, 1] and iterations ≥ 1, got {} and {}",
                reg.fraction, reg.iterations
            )));
        }
        reg.gnc.validate().map_err(whole)?;
        if raw.features < 4 {
            return Err(whole(format!("features = {} but at least 4 are needed", raw.features)));
        }

        let mut prims = Vec::with_capacity(raw.scene.len());
        for s in &raw.scene {
            Scene::new(vec![s.get_ref().clone()]).map_err(|e| at(s.span(), e.to_string()))?;
            prims.push(s.get_ref().clone());
        }
        let scene = Scene::new(prims).map_err(|e| whole(e.to_string()))?;

        let mut keys = Vec::with_capacity(raw.keyframe.len());
        for (i, k) in raw.keyframe.iter().enumerate() {
            let s = k.get_ref();
            if i > 0 && !(s.t > raw.keyframe[i - 1].get_ref().t) {
                return Err(at(k.span(), format!("keyframe time {} does not increase", s.t)));
            }
            keys.push((s.t, camera_pose(Vector3::from(s.position), s.yaw_deg, s.pitch_deg)));
        }
        let trajectory = Trajectory::new(keys, raw.frame_rate).map_err(|e| whole(e.to_string()))?;
        if trajectory.num_frames() < 2 {
            return Err(whole("trajectory spans fewer than two frames".into()));
        }

        Ok(Self {
            name: raw.name,
            seed: raw.seed,
            features: raw.features,
            scene,
            trajectory,
            camera,
            noise,
            grid: raw.grid.into_inner(),
            mapping,
            registration: raw.registration,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "mini"
seed = 3
frame_rate = 10.0
features = 50

[camera]
width = 32
height = 24
hfov_deg = 70.0
min_depth = 0.1
max_depth = 5.0

[grid]
origin = [-2.0, -2.0, 0.0]
resolution = 0.1
dims = [40, 40, 20]

[[scene]]
type = "plane"
normal = [0.0, 0.0, 1.0]
offset = 0.0

[[scene]]
type = "sphere"
center = [1.0, 0.0, 1.0]
radius = 0.3

[[scene]]
type = "box"
min = [1.5, -1.0, 0.0]
max = [1.8, 1.0, 1.5]

[[keyframe]]
t = 0.0
position = [0.0, 0.0, 1.0]
yaw_deg = 0.0

[[keyframe]]
t = 1.0
position = [0.1, 0.0, 1.0]
yaw_deg = 10.0
pitch_deg = -5.0
"#;

    #[test]
    fn parses_minimal_file() {
        let s = Scenario::parse(MINIMAL).unwrap();
        assert_eq!(s.name, "mini");
        assert_eq!(s.seed, 3);
        assert_eq!(s.features, 50);
        assert_eq!(s.scene.primitives().len(), 3);
        assert_eq!(s.trajectory.num_frames(), 10);
        assert_eq!(s.grid.dims, [40, 40, 20]);
        assert_eq!(s.mapping, MappingConfig::default());
        assert_eq!(s.registration, RegistrationSettings::default());
        assert_eq!(s.noise, SensorNoiseModel::default());
        assert_eq!(s.camera.width, 32);
    }

    fn expect_line(text: &str, line: usize) {
        match Scenario::parse(text) {
            Err(SimError::Scenario { line: Some(l), .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("expected a line-numbered error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_and_type_errors_carry_lines() {
        let broken = MINIMAL.replace("radius = 0.3", "radius = = 0.3");
        let line = MINIMAL.lines().position(|l| l.contains("radius = 0.3")).unwrap() + 1;
        expect_line(&broken, line);
        let typed = MINIMAL.replace("features = 50", "features = \"many\"");
        let line = MINIMAL.lines().position(|l| l.contains("features = 50")).unwrap() + 1;
        expect_line(&typed, line);
    }

    #[test]
    fn semantic_errors_point_at_their_table() {
        let bad = MINIMAL.replace("radius = 0.3", "radius = -0.3");
        match Scenario::parse(&bad) {
            Err(SimError::Scenario { line: Some(l), message }) => {
                let sphere = MINIMAL.lines().position(|l| l.contains("\"sphere\"")).unwrap() + 1;
                assert!(l >= sphere - 2 && l <= sphere + 2, "line {l}: {message}");
                assert!(message.contains("radius"));
            }
            other => panic!("{other:?}"),
        }
        let bad = MINIMAL.replace("t = 1.0", "t = 0.0");
        assert!(matches!(Scenario::parse(&bad), Err(SimError::Scenario { line: Some(_), .. })));
        let bad = MINIMAL.replace("hfov_deg = 70.0", "hfov_deg = 70.0\nzoom = 2");
        assert!(Scenario::parse(&bad).is_err());
    }

    #[test]
    fn shipped_scenarios_parse() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");
        let mut n = 0;
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.extension().is_some_and(|x| x == "toml") {
                Scenario::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
                n += 1;
            }
        }
        assert!(n >= 2);
    }
}
