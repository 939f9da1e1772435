use serde::{Deserialize, Serialize};

use crate::classify::ClassifyParams;
use crate::flow::SolverParams;
use crate::shape::HoughParams;
use crate::stereo::{LaneBands, StereoParams};
use crate::track::TrackParams;
use crate::ttc::TtcParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapeMode {
    Off,
    Always,
    /// Circles only on frames where the flow path emitted no box.
    #[default]
    FallbackOnly,
}

/// Every tunable of a detection run. Missing keys in a config file take
/// the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub frame_skip: usize,
    pub flow_enabled: bool,
    pub shape_mode: ShapeMode,
    /// Runs whenever depth frames are supplied.
    pub stereo_enabled: bool,
    pub ttc_enabled: bool,
    /// Blind spot on the right: objects approach moving left.
    pub mirror: bool,
    pub overlay: bool,
    /// Overlays on a black canvas instead of the frame.
    pub overlay_pure: bool,
    /// Drop timing fields so logs compare byte-for-byte.
    pub canonical_log: bool,
    pub rose_bins: usize,
    pub corner_fraction: f64,
    /// Gaussian sigma applied to depth maps before alerting.
    pub depth_smoothing: Option<f64>,
    pub solver: SolverParams,
    pub classify: ClassifyParams,
    pub track: TrackParams,
    pub hough: HoughParams,
    pub stereo: StereoParams,
    pub bands: LaneBands,
    pub ttc: TtcParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            frame_skip: 5,
            flow_enabled: true,
            shape_mode: ShapeMode::FallbackOnly,
            stereo_enabled: true,
            ttc_enabled: true,
            mirror: false,
            overlay: false,
            overlay_pure: false,
            canonical_log: false,
            rose_bins: 24,
            corner_fraction: 0.2,
            depth_smoothing: None,
            solver: PipelineConfig::solver_profile(),
            classify: ClassifyParams::default(),
            track: TrackParams::default(),
            hough: HoughParams::default(),
            stereo: StereoParams::default(),
            bands: LaneBands::default(),
            ttc: TtcParams::default(),
        }
    }
}

impl PipelineConfig {
    /// Weaker smoothing and more sweeps than the bare solver defaults, so
    /// a vehicle a few pixels per frame fast converges within one frame
    /// pair.
    pub fn solver_profile() -> SolverParams {
        SolverParams { alpha: 0.3, max_iters: 300, ..SolverParams::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.frame_skip == 0 {
            return Err("frame_skip must be >= 1".into());
        }
        if !self.flow_enabled && self.shape_mode == ShapeMode::Off && !self.stereo_enabled {
            return Err("at least one of flow, shape or stereo must be enabled".into());
        }
        if !(0.0..0.5).contains(&self.corner_fraction) {
            return Err(format!("corner_fraction must be in [0, 0.5), got {}", self.corner_fraction));
        }
        if let Some(s) = self.depth_smoothing {
            if !(s > 0.0) {
                return Err(format!("depth_smoothing sigma must be positive, got {s}"));
            }
        }
        self.solver.validate().map_err(|e| e.to_string())?;
        self.classify.validate().map_err(|e| e.to_string())?;
        self.track.validate().map_err(|e| e.to_string())?;
        self.hough.validate()?;
        self.stereo.validate().map_err(|e| e.to_string())?;
        self.bands.validate().map_err(|e| e.to_string())?;
        self.ttc.validate().map_err(|e| e.to_string())?;
        if self.rose_bins < 4 {
            return Err("rose_bins must be >= 4".into());
        }
        Ok(())
    }

    /// Classification and tracking parameters with the mirror flag applied.
    pub fn sided(&self) -> (ClassifyParams, TrackParams) {
        if self.mirror {
            (self.classify.mirrored(), TrackParams { mirror: true, ..self.track.clone() })
        } else {
            (self.classify, self.track.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_files() {
        let cfg = PipelineConfig::from_toml("").unwrap();
        assert_eq!(cfg, PipelineConfig::default());
        assert_eq!(cfg.frame_skip, 5);
        let cfg = PipelineConfig::from_toml("frame_skip = 1\nshape_mode = \"always\"\n[track]\nratio_gate = 0.2\n").unwrap();
        assert_eq!(cfg.frame_skip, 1);
        assert_eq!(cfg.shape_mode, ShapeMode::Always);
        assert_eq!(cfg.track.ratio_gate, 0.2);
        assert_eq!(cfg.track.base_size, TrackParams::default().base_size);
    }

    #[test]
    fn round_trip_and_validation() {
        let cfg = PipelineConfig { mirror: true, depth_smoothing: Some(1.5), ..PipelineConfig::default() };
        assert_eq!(PipelineConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert!(PipelineConfig::from_toml("frame_skip = 0").is_err());
        assert!(PipelineConfig::from_toml("flow_enabled = false\nshape_mode = \"off\"\nstereo_enabled = false").is_err());
        assert!(PipelineConfig::from_toml("[bands]\nt1 = 0.9").is_err());
        assert!(PipelineConfig::from_toml("bogus = [").is_err());
    }

    #[test]
    fn mirror_flips_side() {
        let cfg = PipelineConfig { mirror: true, ..PipelineConfig::default() };
        let (c, t) = cfg.sided();
        assert!((c.object_heading.abs() - std::f64::consts::PI).abs() < 1e-12);
        assert!(t.mirror);
    }
}
