//! Deterministic synthetic scenes with per-frame ground truth.
//!
//! Scenes are 2-D sprite composites: a value-noise background that pans
//! horizontally, textured rectangles (optionally with wheels) moving and
//! growing linearly or exponentially, and static occluding walls. Pixel
//! `(x, y)` is centered on the continuous coordinate `(x, y)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{DepthFrame, Frame, FrameSequence, DEFAULT_FRAME_PERIOD};
use crate::stereo::{LaneBands, BACKGROUND};
use crate::track::{Box, Viewport};

/// Fill value of wheel discs.
pub const WHEEL_SHADE: f64 = 0.02;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scene: {0}")]
    BadSpec(String),
    #[error("object {id} is outside the frame on every frame")]
    NeverVisible { id: usize },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("scene file: {0}")]
    Parse(#[from] toml::de::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundStyle {
    #[default]
    Day,
    /// Dark, low-contrast ground with no sky gradient.
    Night,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackgroundSpec {
    pub style: BackgroundStyle,
    /// Mean ground intensity.
    pub base: f64,
    /// Peak deviation of the ground texture from `base`.
    pub contrast: f64,
    /// Horizontal noise lattice spacing, pixels.
    pub noise_scale: f64,
    /// Vertical over horizontal lattice spacing. Stretched blobs keep the
    /// texture from reading as circles.
    pub noise_stretch: f64,
    /// Scattered rectangles drawn over the ground texture.
    pub shape_count: usize,
    /// Fraction of the frame height covered by untextured sky.
    pub sky_fraction: f64,
    /// Bottom fraction of the frame drawn as road, with `road_contrast`
    /// in place of `contrast`.
    pub road_fraction: f64,
    pub road_contrast: f64,
}

impl Default for BackgroundSpec {
    fn default() -> Self {
        Self { style: BackgroundStyle::Day, base: 0.5, contrast: 0.45, noise_scale: 6.0, noise_stretch: 4.0, shape_count: 24, sky_fraction: 0.25, road_fraction: 0.0, road_contrast: 0.03 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ObjectShape {
    #[default]
    RectangleWithWheels,
    PlainRectangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectSpec {
    pub shape: ObjectShape,
    pub entry_frame: usize,
    /// Last frame the object is drawn, inclusive.
    pub exit_frame: Option<usize>,
    /// Center at the entry frame.
    pub position: [f64; 2],
    /// Pixels per frame.
    pub velocity: [f64; 2],
    /// Width and height at the entry frame.
    pub size: [f64; 2],
    /// Linear size change, pixels per frame.
    pub growth: [f64; 2],
    /// Exponential size change per frame, applied on top of `growth`.
    pub growth_rate: f64,
    /// When set, the center also scales away from this point in step with
    /// the size, as an object closing in along a line of sight does.
    pub expansion_center: Option<[f64; 2]>,
    /// Position and size stop changing after this frame.
    pub motion_until: Option<usize>,
    pub depth: f64,
    /// Depth change per frame.
    pub depth_rate: f64,
    /// Wheel radius at the entry size; zero means no wheels.
    pub wheel_radius: f64,
    pub brightness: f64,
    pub contrast: f64,
    /// Horizontal texture lattice spacing at the entry size, pixels.
    pub texture_scale: f64,
    pub texture_stretch: f64,
    /// Two bright lamps near the leading edge.
    pub headlights: bool,
}

impl Default for ObjectSpec {
    fn default() -> Self {
        Self {
            shape: ObjectShape::RectangleWithWheels,
            entry_frame: 0,
            exit_frame: None,
            position: [0.0, 0.0],
            velocity: [0.0, 0.0],
            size: [40.0, 24.0],
            growth: [0.0, 0.0],
            growth_rate: 0.0,
            expansion_center: None,
            motion_until: None,
            depth: 0.5,
            depth_rate: 0.0,
            wheel_radius: 0.0,
            brightness: 0.6,
            contrast: 0.3,
            texture_scale: 5.0,
            texture_stretch: 2.5,
            headlights: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WallSpec {
    /// `[x0, y0, x1, y1]` in pixels.
    pub rect: [f64; 4],
    pub shade: f64,
    /// The wall is drawn on frames before this one.
    pub until_frame: Option<usize>,
    /// Depth proxy of the wall; `None` leaves it out of depth maps.
    pub depth: Option<f64>,
}

impl Default for WallSpec {
    fn default() -> Self {
        Self { rect: [0.0, 0.0, 0.0, 0.0], shade: 0.35, until_frame: None, depth: None }
    }
}

impl WallSpec {
    fn active(&self, frame: usize) -> bool {
        self.until_frame.is_none_or(|u| frame < u)
    }

    fn covers(&self, x: f64, y: f64) -> bool {
        let [x0, y0, x1, y1] = self.rect;
        x >= x0 && x < x1 && y >= y0 && y < y1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub n_frames: usize,
    pub seed: u64,
    /// Background displacement is `-camera_pan` pixels per frame.
    pub camera_pan: f64,
    pub background: BackgroundSpec,
    pub objects: Vec<ObjectSpec>,
    pub walls: Vec<WallSpec>,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 320,
            height: 240,
            n_frames: 60,
            seed: 1,
            camera_pan: 2.0,
            background: BackgroundSpec::default(),
            objects: Vec::new(),
            walls: Vec::new(),
        }
    }
}

impl SceneSpec {
    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        let spec: SceneSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scene specs always serialize")
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::BadSpec(m));
        if self.width < 2 || self.height < 2 {
            return bad(format!("frame must be at least 2x2, got {}x{}", self.width, self.height));
        }
        if self.n_frames < 2 {
            return bad(format!("need at least 2 frames, got {}", self.n_frames));
        }
        if !self.camera_pan.is_finite() {
            return bad("camera_pan must be finite".into());
        }
        let bg = &self.background;
        if !(bg.noise_scale > 0.0 && bg.noise_stretch > 0.0) || !(0.0..1.0).contains(&bg.sky_fraction) {
            return bad("background needs positive noise scales and sky_fraction in [0, 1)".into());
        }
        if !(bg.road_fraction >= 0.0 && bg.sky_fraction + bg.road_fraction <= 1.0) {
            return bad("sky_fraction + road_fraction must not exceed 1".into());
        }
        for (id, o) in self.objects.iter().enumerate() {
            let finite = o.position.iter().chain(&o.velocity).chain(&o.size).chain(&o.growth).all(|v| v.is_finite())
                && o.growth_rate.is_finite()
                && o.depth_rate.is_finite();
            if !finite {
                return bad(format!("object {id} has non-finite kinematics"));
            }
            if !(o.size[0] > 0.0 && o.size[1] > 0.0) {
                return bad(format!("object {id} needs a positive size"));
            }
            if !(0.0..=1.0).contains(&o.depth) || !(o.wheel_radius >= 0.0) || !(o.texture_scale > 0.0 && o.texture_stretch > 0.0) {
                return bad(format!("object {id} needs depth in [0, 1], wheel_radius >= 0 and positive texture scales"));
            }
        }
        for (i, w) in self.walls.iter().enumerate() {
            let [x0, y0, x1, y1] = w.rect;
            if !(x0 < x1 && y0 < y1) {
                return bad(format!("wall {i} has an empty rectangle"));
            }
        }
        Ok(())
    }

    pub fn viewport(&self) -> Viewport {
        Viewport::new(self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Wheel {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTruth {
    pub id: usize,
    /// Body and wheels, clipped to the frame.
    pub bbox: Box,
    /// Scripted body center; may lie outside the frame.
    pub centroid: [f64; 2],
    pub depth: f64,
    /// Lane band under the default thresholds, `None` beyond the last band.
    pub lane: Option<u8>,
    pub wheels: Vec<Wheel>,
    /// Scripted time to collision in frames (`width / d width/dt`) while
    /// the object grows.
    pub ttc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTruth {
    pub frame: usize,
    pub objects: Vec<ObjectTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub frames: Vec<FrameTruth>,
    /// Smallest scripted TTC over the whole scene.
    pub min_ttc: Option<f64>,
}

impl GroundTruth {
    /// One JSON object per frame.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for f in &self.frames {
            out.push_str(&serde_json::to_string(f).expect("truth serializes"));
            out.push('\n');
        }
        out
    }
}

/// Object geometry at one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Pose {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    depth: f64,
    ttc: Option<f64>,
}

impl Pose {
    fn body(&self) -> (f64, f64, f64, f64) {
        (self.cx - self.w / 2.0, self.cy - self.h / 2.0, self.cx + self.w / 2.0, self.cy + self.h / 2.0)
    }
}

impl ObjectSpec {
    fn present(&self, frame: usize) -> bool {
        frame >= self.entry_frame && self.exit_frame.is_none_or(|e| frame <= e)
    }

    fn pose(&self, frame: usize) -> Pose {
        let last = self.motion_until.map_or(frame, |m| frame.min(m.max(self.entry_frame)));
        let t = last.saturating_sub(self.entry_frame) as f64;
        let scale = (self.growth_rate * t).exp();
        let w = (self.size[0] + self.growth[0] * t).max(1.0) * scale;
        let h = (self.size[1] + self.growth[1] * t).max(1.0) * scale;
        let moving = self.motion_until.is_none_or(|m| frame < m);
        let lin_w = self.size[0] + self.growth[0] * t;
        let rate = self.growth[0] / lin_w + self.growth_rate;
        let ttc = (moving && rate > 0.0).then(|| 1.0 / rate);
        let (mut cx, mut cy) = (self.position[0], self.position[1]);
        if let Some([fx, fy]) = self.expansion_center {
            let k = w / self.size[0];
            cx = fx + (cx - fx) * k;
            cy = fy + (cy - fy) * k;
        }
        Pose {
            cx: cx + self.velocity[0] * t,
            cy: cy + self.velocity[1] * t,
            w,
            h,
            depth: (self.depth + self.depth_rate * t).clamp(0.0, 1.0),
            ttc,
        }
    }

    fn wheels(&self, pose: &Pose) -> Vec<Wheel> {
        if self.shape != ObjectShape::RectangleWithWheels || self.wheel_radius <= 0.0 {
            return Vec::new();
        }
        let r = self.wheel_radius * pose.w / self.size[0];
        let cy = pose.cy + pose.h / 2.0;
        vec![Wheel { cx: pose.cx - 0.3 * pose.w, cy, r }, Wheel { cx: pose.cx + 0.3 * pose.w, cy, r }]
    }

    /// Drawn extent including antialiased fringe pixels.
    fn extent(&self, pose: &Pose) -> (f64, f64, f64, f64) {
        let (mut x0, mut y0, mut x1, mut y1) = pose.body();
        for wh in self.wheels(pose) {
            x0 = x0.min(wh.cx - wh.r);
            x1 = x1.max(wh.cx + wh.r);
            y0 = y0.min(wh.cy - wh.r);
            y1 = y1.max(wh.cy + wh.r);
        }
        (x0 - 0.5, y0 - 0.5, x1 + 0.5, y1 + 0.5)
    }
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn lattice(ix: i64, iy: i64, seed: u64) -> f64 {
    let h = mix64(seed ^ mix64((ix as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (iy as u64).wrapping_add(0x632b_e59b_d9b4_e019)));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Smoothly interpolated lattice noise in [0, 1].
fn value_noise(x: f64, y: f64, seed: u64) -> f64 {
    let (fx, fy) = (x.floor(), y.floor());
    let (ix, iy) = (fx as i64, fy as i64);
    let (tx, ty) = (smooth(x - fx), smooth(y - fy));
    let a = lattice(ix, iy, seed);
    let b = lattice(ix + 1, iy, seed);
    let c = lattice(ix, iy + 1, seed);
    let d = lattice(ix + 1, iy + 1, seed);
    let top = a + (b - a) * tx;
    let bottom = c + (d - c) * tx;
    top + (bottom - top) * ty
}

/// Two octaves, stretched to roughly [-1, 1].
fn texture(x: f64, y: f64, sx: f64, sy: f64, seed: u64) -> f64 {
    let n = 0.65 * value_noise(x / sx, y / sy, seed) + 0.35 * value_noise(2.0 * x / sx, 2.0 * y / sy, seed ^ 0x5151);
    ((n - 0.5) * 3.0).clamp(-1.0, 1.0)
}

/// Length of `[a0, a1]` inside the pixel centered on `p`.
fn coverage(a0: f64, a1: f64, p: f64) -> f64 {
    (a1.min(p + 0.5) - a0.max(p - 0.5)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy)]
struct GroundShape {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    shade: f64,
}

/// Precomputed per-scene state shared by all frames.
struct Scene<'a> {
    spec: &'a SceneSpec,
    shapes: Vec<GroundShape>,
    horizon: f64,
    road_top: f64,
}

impl<'a> Scene<'a> {
    fn new(spec: &'a SceneSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let horizon = spec.background.sky_fraction * spec.height as f64;
        let travel = spec.camera_pan * spec.n_frames as f64;
        let (lo, hi) = (travel.min(0.0) - 40.0, spec.width as f64 + travel.max(0.0) + 40.0);
        let shapes = (0..spec.background.shape_count)
            .map(|_| {
                let w = rng.random_range(6.0..30.0);
                let h = rng.random_range(6.0..30.0);
                let x0 = rng.random_range(lo..hi);
                let y0 = rng.random_range(horizon..(1.0 - spec.background.road_fraction) * spec.height as f64 + 1.0);
                let shade = if spec.background.style == BackgroundStyle::Night {
                    rng.random_range(0.0..0.2)
                } else {
                    rng.random_range(0.05..0.95)
                };
                GroundShape { x0, y0, x1: x0 + w, y1: y0 + h, shade }
            })
            .collect();
        let road_top = (1.0 - spec.background.road_fraction) * spec.height as f64;
        Self { spec, shapes, horizon, road_top }
    }

    fn background(&self, x: f64, y: f64, frame: usize) -> f64 {
        let bg = &self.spec.background;
        if y < self.horizon {
            return match bg.style {
                BackgroundStyle::Day => 0.85 - 0.1 * y / self.horizon.max(1.0),
                BackgroundStyle::Night => 0.03,
            };
        }
        let wx = x + self.spec.camera_pan * frame as f64;
        let contrast = if y >= self.road_top { bg.road_contrast } else { bg.contrast };
        let mut v = bg.base + contrast * texture(wx, y, bg.noise_scale, bg.noise_scale * bg.noise_stretch, self.spec.seed);
        for s in &self.shapes {
            let cov = coverage(s.x0, s.x1, wx) * coverage(s.y0, s.y1, y);
            if cov > 0.0 {
                v = cov * s.shade + (1.0 - cov) * v;
            }
        }
        v
    }

    fn object_value(&self, id: usize, o: &ObjectSpec, pose: &Pose, x: f64, y: f64) -> f64 {
        // texture lives in object-local coordinates, so growth reads as expansion
        let lx = (x - pose.cx) / pose.w * o.size[0];
        let ly = (y - pose.cy) / pose.h * o.size[1];
        let seed = self.spec.seed ^ mix64(id as u64 + 1);
        let mut v = o.brightness + o.contrast * texture(lx, ly, o.texture_scale, o.texture_scale * o.texture_stretch, seed);
        if o.headlights {
            let lead = if o.velocity[0] >= 0.0 { 0.4 } else { -0.4 };
            for ly_frac in [-0.15, 0.25] {
                let (hx, hy) = (pose.cx + lead * pose.w, pose.cy + ly_frac * pose.h);
                let sigma = 0.07 * pose.w;
                let d2 = (x - hx).powi(2) + (y - hy).powi(2);
                v += 0.9 * (-d2 / (2.0 * sigma * sigma)).exp();
            }
        }
        v
    }

    fn render(&self, frame: usize) -> Frame {
        let spec = self.spec;
        let active: Vec<(usize, &ObjectSpec, Pose, Vec<Wheel>)> = spec
            .objects
            .iter()
            .enumerate()
            .filter(|(_, o)| o.present(frame))
            .map(|(id, o)| {
                let pose = o.pose(frame);
                let wheels = o.wheels(&pose);
                (id, o, pose, wheels)
            })
            .collect();
        let walls: Vec<&WallSpec> = spec.walls.iter().filter(|w| w.active(frame)).collect();
        Frame::from_fn(spec.width, spec.height, |px, py| {
            let (x, y) = (px as f64, py as f64);
            let mut v = self.background(x, y, frame);
            // later objects paint over earlier ones
            for (id, o, pose, wheels) in &active {
                let (x0, y0, x1, y1) = pose.body();
                let cov = coverage(x0, x1, x) * coverage(y0, y1, y);
                if cov > 0.0 {
                    v = cov * self.object_value(*id, o, pose, x, y) + (1.0 - cov) * v;
                }
                for wh in wheels {
                    let d = (x - wh.cx).hypot(y - wh.cy);
                    let cov = (wh.r + 0.5 - d).clamp(0.0, 1.0);
                    if cov > 0.0 {
                        v = cov * WHEEL_SHADE + (1.0 - cov) * v;
                    }
                }
            }
            for w in &walls {
                if w.covers(x, y) {
                    v = w.shade;
                }
            }
            v
        })
    }

    fn render_depth(&self, frame: usize) -> DepthFrame {
        let spec = self.spec;
        let active: Vec<(&ObjectSpec, Pose, Vec<Wheel>)> = spec
            .objects
            .iter()
            .filter(|o| o.present(frame))
            .map(|o| {
                let pose = o.pose(frame);
                let wheels = o.wheels(&pose);
                (o, pose, wheels)
            })
            .collect();
        let walls: Vec<&WallSpec> = spec.walls.iter().filter(|w| w.active(frame) && w.depth.is_some()).collect();
        DepthFrame::from_fn(spec.width, spec.height, |px, py| {
            let (x, y) = (px as f64, py as f64);
            let mut d = BACKGROUND;
            for (_, pose, wheels) in &active {
                let (x0, y0, x1, y1) = pose.body();
                let in_body = x >= x0 && x < x1 && y >= y0 && y < y1;
                let in_wheel = wheels.iter().any(|w| (x - w.cx).hypot(y - w.cy) <= w.r);
                if in_body || in_wheel {
                    d = d.min(pose.depth);
                }
            }
            for w in &walls {
                if w.covers(x, y) {
                    d = w.depth.expect("filtered");
                }
            }
            d
        })
    }

    fn truth(&self, frame: usize) -> FrameTruth {
        let spec = self.spec;
        let view = spec.viewport();
        let bands = LaneBands::default();
        let walls: Vec<&WallSpec> = spec.walls.iter().filter(|w| w.active(frame)).collect();
        let objects = spec
            .objects
            .iter()
            .enumerate()
            .filter(|(_, o)| o.present(frame))
            .filter_map(|(id, o)| {
                let pose = o.pose(frame);
                let (x0, y0, x1, y1) = o.extent(&pose);
                let on_screen = x1 >= -0.5 && x0 <= spec.width as f64 - 0.5 && y1 >= -0.5 && y0 <= spec.height as f64 - 0.5;
                if !on_screen {
                    return None;
                }
                let bbox = Box::from_corners(x0, y0, x1, y1).clipped(&view);
                let hidden = walls.iter().any(|w| {
                    let [wx0, wy0, wx1, wy1] = w.rect;
                    bbox.x_min() >= wx0 && bbox.x_max() < wx1 && bbox.y_min() >= wy0 && bbox.y_max() < wy1
                });
                if hidden {
                    return None;
                }
                Some(ObjectTruth {
                    id,
                    bbox,
                    centroid: [pose.cx, pose.cy],
                    depth: pose.depth,
                    lane: bands.lane_of(pose.depth),
                    wheels: o.wheels(&pose),
                    ttc: pose.ttc,
                })
            })
            .collect();
        FrameTruth { frame, objects }
    }
}

fn check_visibility(spec: &SceneSpec) -> Result<(), SynthError> {
    let (w, h) = (spec.width as f64, spec.height as f64);
    for (id, o) in spec.objects.iter().enumerate() {
        let visible = (0..spec.n_frames).filter(|&f| o.present(f)).any(|f| {
            let (x0, y0, x1, y1) = o.extent(&o.pose(f));
            x1 >= -0.5 && x0 <= w - 0.5 && y1 >= -0.5 && y0 <= h - 0.5
        });
        if !visible {
            return Err(SynthError::NeverVisible { id });
        }
    }
    Ok(())
}

/// Renders every frame and its ground truth. Output depends only on the spec.
pub fn render_sequence(spec: &SceneSpec) -> Result<(FrameSequence, GroundTruth), SynthError> {
    spec.validate()?;
    check_visibility(spec)?;
    let scene = Scene::new(spec);
    let frames: Vec<Frame> = (0..spec.n_frames).into_par_iter().map(|i| scene.render(i)).collect();
    let truth: Vec<FrameTruth> = (0..spec.n_frames).map(|i| scene.truth(i)).collect();
    let min_ttc = truth
        .iter()
        .flat_map(|f| f.objects.iter().filter_map(|o| o.ttc))
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.min(t))));
    let seq = FrameSequence::new(frames, DEFAULT_FRAME_PERIOD).map_err(|e| SynthError::BadSpec(e.to_string()))?;
    Ok((seq, GroundTruth { frames: truth, min_ttc }))
}

/// Depth maps aligned with [`render_sequence`]: objects at their scripted
/// proxy, everything else at 1.0.
pub fn render_depth_sequence(spec: &SceneSpec) -> Result<Vec<DepthFrame>, SynthError> {
    spec.validate()?;
    check_visibility(spec)?;
    let scene = Scene::new(spec);
    Ok((0..spec.n_frames).into_par_iter().map(|i| scene.render_depth(i)).collect())
}

pub const PRESET_NAMES: [&str; 9] = [
    "approach",
    "overtake",
    "zero_relative_hold",
    "wall_reveal",
    "multi_lane",
    "frontal_deceleration",
    "night_low_texture",
    "empty_road",
    "static_gray",
];

/// Growth rate taking a width from 5% to 40% of the frame in 60 frames.
fn approach_rate() -> f64 {
    8f64.ln() / 60.0
}

/// A named scene from the built-in catalog.
pub fn preset(name: &str) -> Result<SceneSpec, SynthError> {
    let base = SceneSpec::default();
    let car = ObjectSpec::default();
    let spec = match name {
        "approach" => SceneSpec {
            seed: 11,
            camera_pan: 1.0,
            background: BackgroundSpec { sky_fraction: 0.35, road_fraction: 0.45, ..base.background.clone() },
            objects: vec![ObjectSpec {
                position: [20.0, 120.0],
                expansion_center: Some([0.0, 120.0]),
                size: [16.0, 11.0],
                growth_rate: approach_rate(),
                depth: 0.78,
                depth_rate: -0.01,
                wheel_radius: 2.0,
                ..car.clone()
            }],
            ..base
        },
        "overtake" => SceneSpec {
            seed: 12,
            objects: vec![ObjectSpec {
                position: [-40.0, 150.0],
                velocity: [6.0, 0.0],
                size: [90.0, 50.0],
                depth: 0.3,
                wheel_radius: 9.0,
                ..car.clone()
            }],
            ..base
        },
        "zero_relative_hold" => SceneSpec {
            seed: 13,
            objects: vec![ObjectSpec {
                position: [100.0, 140.0],
                size: [120.0, 56.0],
                depth: 0.25,
                wheel_radius: 13.0,
                ..car.clone()
            }],
            ..base
        },
        "wall_reveal" => SceneSpec {
            seed: 14,
            camera_pan: 1.0,
            background: BackgroundSpec { sky_fraction: 0.35, road_fraction: 0.45, ..base.background.clone() },
            objects: vec![ObjectSpec {
                position: [160.0, 140.0],
                velocity: [1.5, 0.0],
                size: [90.0, 50.0],
                growth: [0.3, 0.15],
                depth: 0.4,
                wheel_radius: 9.0,
                ..car.clone()
            }],
            walls: vec![WallSpec { rect: [90.0, 90.0, 250.0, 225.0], until_frame: Some(20), ..WallSpec::default() }],
            ..base
        },
        "multi_lane" => SceneSpec {
            seed: 15,
            objects: vec![
                ObjectSpec { position: [40.0, 190.0], velocity: [1.5, 0.0], size: [90.0, 40.0], depth: 0.2, wheel_radius: 8.0, ..car.clone() },
                ObjectSpec { position: [150.0, 130.0], velocity: [1.0, 0.0], size: [60.0, 28.0], depth: 0.45, wheel_radius: 6.0, ..car.clone() },
                ObjectSpec { position: [250.0, 95.0], velocity: [0.5, 0.0], size: [40.0, 18.0], depth: 0.65, ..car.clone() },
            ],
            ..base
        },
        "frontal_deceleration" => SceneSpec {
            seed: 16,
            camera_pan: 0.0,
            objects: vec![ObjectSpec {
                position: [160.0, 140.0],
                size: [110.0, 50.0],
                growth: [0.6, 0.3],
                depth: 0.5,
                depth_rate: -0.004,
                wheel_radius: 12.0,
                ..car.clone()
            }],
            ..base
        },
        "night_low_texture" => SceneSpec {
            seed: 17,
            camera_pan: 1.0,
            background: BackgroundSpec { style: BackgroundStyle::Night, base: 0.08, contrast: 0.05, ..BackgroundSpec::default() },
            objects: vec![ObjectSpec {
                position: [20.0, 150.0],
                velocity: [2.5, 0.0],
                size: [70.0, 36.0],
                growth: [0.5, 0.25],
                depth: 0.4,
                brightness: 0.12,
                contrast: 0.05,
                headlights: true,
                shape: ObjectShape::PlainRectangle,
                ..car.clone()
            }],
            ..base
        },
        "empty_road" => SceneSpec { seed: 18, ..base },
        "static_gray" => SceneSpec {
            seed: 19,
            camera_pan: 0.0,
            background: BackgroundSpec { contrast: 0.0, shape_count: 0, sky_fraction: 0.0, ..BackgroundSpec::default() },
            objects: vec![ObjectSpec { position: [40.0, 120.0], velocity: [2.0, 0.0], size: [60.0, 36.0], ..car }],
            ..base
        },
        other => return Err(SynthError::UnknownPreset(other.to_string())),
    };
    Ok(spec)
}

/// Every built-in scene, in catalog order.
pub fn preset_scenarios() -> Vec<(&'static str, SceneSpec)> {
    PRESET_NAMES.iter().map(|&n| (n, preset(n).expect("catalog names resolve"))).collect()
}
