//! Depth maps and the triple-layer lane alert.
//!
//! Depth is a normalized distance proxy (`1.0` farthest). Maps come either
//! from outside (synthetic scenes, a stereo rig) or from the basic SAD block
//! matcher in [`compute_disparity`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{DepthFrame, Frame};

/// Proxy value of removed background.
pub const BACKGROUND: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum StereoError {
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("empty band: lo {lo} must be below hi {hi}")]
    EmptyBand { lo: f64, hi: f64 },
    #[error("invalid stereo parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "8")]
    Eight,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StereoParams {
    pub max_disparity: usize,
    /// Odd block side, pixels.
    pub block_size: usize,
    /// Depth at or beyond this is treated as background.
    pub far_cutoff: f64,
    pub min_blob_area: usize,
    pub connectivity: Connectivity,
    /// SAD spread per block pixel below which a block counts as textureless.
    pub flatness_tolerance: f64,
}

impl Default for StereoParams {
    fn default() -> Self {
        Self {
            max_disparity: 16,
            block_size: 9,
            far_cutoff: 0.8,
            min_blob_area: 50,
            connectivity: Connectivity::Four,
            flatness_tolerance: 0.01,
        }
    }
}

impl StereoParams {
    pub fn validate(&self) -> Result<(), StereoError> {
        if self.block_size < 3 || self.block_size % 2 == 0 {
            return Err(StereoError::BadParams(format!("block_size must be odd and >= 3, got {}", self.block_size)));
        }
        if !(self.far_cutoff > 0.0 && self.far_cutoff <= 1.0) {
            return Err(StereoError::BadParams(format!("far_cutoff must be in (0, 1], got {}", self.far_cutoff)));
        }
        if self.max_disparity == 0 {
            return Err(StereoError::BadParams("max_disparity must be >= 1".into()));
        }
        Ok(())
    }
}

/// Distance-proxy thresholds: nearest lane below `t1`, lanes two and three
/// in `[t1, t3)` split at `t2`, beyond at `t3` and above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaneBands {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

impl Default for LaneBands {
    fn default() -> Self {
        Self { t1: 0.35, t2: 0.55, t3: 0.75 }
    }
}

impl LaneBands {
    pub fn validate(&self) -> Result<(), StereoError> {
        if !(0.0 < self.t1 && self.t1 < self.t2 && self.t2 < self.t3 && self.t3 <= 1.0) {
            return Err(StereoError::BadParams(format!(
                "lane bands need 0 < t1 < t2 < t3 <= 1, got {} {} {}",
                self.t1, self.t2, self.t3
            )));
        }
        Ok(())
    }

    /// 1 for the nearest lane, 2 or 3 for the next ones, `None` beyond.
    pub fn lane_of(&self, proxy: f64) -> Option<u8> {
        if proxy < self.t1 {
            Some(1)
        } else if proxy < self.t2 {
            Some(2)
        } else if proxy < self.t3 {
            Some(3)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertLevel {
    Green,
    Yellow,
    Red,
}

impl AlertLevel {
    pub fn name(&self) -> &'static str {
        match self {
            AlertLevel::Green => "green",
            AlertLevel::Yellow => "yellow",
            AlertLevel::Red => "red",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// SAD block matching along rows; `right(x) ≈ left(x + d)` for disparity `d`.
/// Output proxy is `1 − d / max_disparity`; textureless blocks are farthest.
pub fn compute_disparity(left: &Frame, right: &Frame, p: &StereoParams) -> Result<DepthFrame, StereoError> {
    if left.dimensions() != right.dimensions() {
        return Err(StereoError::DimensionMismatch(left.dimensions(), right.dimensions()));
    }
    p.validate()?;
    let (w, h) = left.dimensions();
    let half = (p.block_size / 2) as isize;
    let block_area = (p.block_size * p.block_size) as f64;
    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|y| {
            let mut row = Vec::with_capacity(w);
            let mut costs = vec![0.0; p.max_disparity + 1];
            for x in 0..w {
                for (d, cost) in costs.iter_mut().enumerate() {
                    let mut sad = 0.0;
                    for dy in -half..=half {
                        let yy = y as isize + dy;
                        for dx in -half..=half {
                            let xl = x as isize + dx;
                            let xr = xl - d as isize;
                            sad += (left.get_clamped(xl, yy) - right.get_clamped(xr, yy)).abs();
                        }
                    }
                    *cost = sad;
                }
                let (mut best_d, mut best) = (0, f64::INFINITY);
                let mut worst = f64::NEG_INFINITY;
                for (d, &c) in costs.iter().enumerate() {
                    // strict comparison keeps the smallest disparity on ties
                    if c < best {
                        best = c;
                        best_d = d;
                    }
                    worst = worst.max(c);
                }
                if worst - best < p.flatness_tolerance * block_area {
                    row.push(BACKGROUND);
                } else {
                    row.push(1.0 - best_d as f64 / p.max_disparity as f64);
                }
            }
            row
        })
        .collect();
    Ok(DepthFrame::from_raw(w, h, rows.concat()))
}

/// Sets everything at or beyond `far_cutoff` to the background value.
pub fn remove_background(depth: &DepthFrame, far_cutoff: f64) -> DepthFrame {
    depth.map(|v| if v >= far_cutoff { BACKGROUND } else { v })
}

/// Pixels with `lo <= value < hi`.
pub fn isolate_band(depth: &DepthFrame, lo: f64, hi: f64) -> Result<BinaryMask, StereoError> {
    if !(lo < hi) {
        return Err(StereoError::EmptyBand { lo, hi });
    }
    let (w, h) = depth.dimensions();
    Ok(BinaryMask::from_fn(w, h, |x, y| {
        let v = depth.get(x, y);
        v >= lo && v < hi
    }))
}

/// Areas of the connected components of `mask`, in scan order of their
/// first pixel.
pub fn component_areas(mask: &BinaryMask, connectivity: Connectivity) -> Vec<usize> {
    let (w, h) = mask.dimensions();
    let mut seen = vec![false; w * h];
    let mut areas = Vec::new();
    let mut stack = Vec::new();
    let neighbors: &[(isize, isize)] = match connectivity {
        Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
        Connectivity::Eight => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
    };
    for start in 0..w * h {
        if !mask.bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut area = 0;
        while let Some(i) = stack.pop() {
            area += 1;
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for &(dx, dy) in neighbors {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if mask.bits[j] && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        areas.push(area);
    }
    areas
}

/// Connected components with at least `min_blob_area` pixels.
pub fn count_objects(mask: &BinaryMask, p: &StereoParams) -> usize {
    component_areas(mask, p.connectivity).into_iter().filter(|&a| a >= p.min_blob_area).count()
}

/// Objects per lane band: `[lane 1, lane 2, lane 3]`.
pub type BandCounts = [usize; 3];

/// Red when anything sits in the nearest lane, yellow when something is in
/// lanes two or three, green otherwise. Background is removed first.
pub fn classify_alert(depth: &DepthFrame, bands: &LaneBands, p: &StereoParams) -> (AlertLevel, BandCounts) {
    let cleaned = remove_background(depth, p.far_cutoff);
    let count = |lo: f64, hi: f64| isolate_band(&cleaned, lo, hi).map(|m| count_objects(&m, p)).unwrap_or(0);
    let counts = [count(0.0, bands.t1), count(bands.t1, bands.t2), count(bands.t2, bands.t3)];
    let level = if counts[0] >= 1 {
        AlertLevel::Red
    } else if count(bands.t1, bands.t3) >= 1 {
        AlertLevel::Yellow
    } else {
        AlertLevel::Green
    };
    (level, counts)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let k: Vec<f64> = (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = k.iter().sum();
    k.into_iter().map(|v| v / sum).collect()
}

/// Separable Gaussian blur that ignores background pixels (normalized
/// convolution). Background pixels stay background.
pub fn smooth_depth(depth: &DepthFrame, sigma: f64) -> DepthFrame {
    assert!(sigma > 0.0, "sigma must be positive");
    let (w, h) = depth.dimensions();
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as isize;
    let valid: Vec<f64> = depth.data().iter().map(|&v| if v >= BACKGROUND { 0.0 } else { 1.0 }).collect();
    let weighted: Vec<f64> = depth.data().iter().zip(&valid).map(|(v, m)| v * m).collect();

    let pass = |src: &[f64], horizontal: bool| -> Vec<f64> {
        let mut out = vec![0.0; w * h];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0;
                for (k, &kv) in kernel.iter().enumerate() {
                    let off = k as isize - radius;
                    let (sx, sy) = if horizontal {
                        ((x as isize + off).clamp(0, w as isize - 1) as usize, y)
                    } else {
                        (x, (y as isize + off).clamp(0, h as isize - 1) as usize)
                    };
                    acc += kv * src[sy * w + sx];
                }
                out[y * w + x] = acc;
            }
        }
        out
    };
    let num = pass(&pass(&weighted, true), false);
    let den = pass(&pass(&valid, true), false);
    let data = (0..w * h)
        .map(|i| {
            if valid[i] == 0.0 || den[i] <= 0.0 {
                BACKGROUND
            } else {
                (num[i] / den[i]).clamp(0.0, 1.0)
            }
        })
        .collect();
    DepthFrame::from_raw(w, h, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize) -> Frame {
        Frame::from_fn(w, h, |x, y| {
            let s = ((x * 37 + y * 101) ^ (x * y + 7)) % 97;
            s as f64 / 96.0
        })
    }

    #[test]
    fn identical_pair_is_far() {
        let f = textured(40, 30);
        let d = compute_disparity(&f, &f, &StereoParams::default()).unwrap();
        assert!(d.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn uniform_pair_is_far() {
        let f = Frame::filled(30, 20, 0.4);
        let d = compute_disparity(&f, &f, &StereoParams::default()).unwrap();
        assert!(d.data().iter().all(|&v| v == BACKGROUND));
    }

    #[test]
    fn shifted_pair_recovers_disparity() {
        let left = textured(64, 40);
        let right = Frame::from_fn(64, 40, |x, y| left.get_clamped(x as isize + 4, y as isize));
        let d = compute_disparity(&left, &right, &StereoParams::default()).unwrap();
        for y in 8..32 {
            for x in 24..56 {
                assert!((d.get(x, y) - 0.75).abs() < 1e-12, "({x},{y}) = {}", d.get(x, y));
            }
        }
        let bad = Frame::filled(10, 10, 0.0);
        assert!(compute_disparity(&left, &bad, &StereoParams::default()).is_err());
    }

    #[test]
    fn background_removal() {
        let d = DepthFrame::new(2, 2, vec![1.0, 0.9, 0.3, 0.8]).unwrap();
        let r = remove_background(&d, 0.8);
        assert_eq!(r.data(), &[1.0, 1.0, 0.3, 1.0]);
        let far = DepthFrame::far(3, 3);
        assert_eq!(remove_background(&far, 0.8), far);
    }

    #[test]
    fn band_masks() {
        let d = DepthFrame::from_fn(10, 10, |x, y| if (2..6).contains(&x) && (3..7).contains(&y) { 0.2 } else { 1.0 });
        let m = isolate_band(&d, 0.0, 0.35).unwrap();
        assert_eq!(m.count(), 16);
        assert!(m.get(2, 3) && !m.get(6, 3));
        assert_eq!(isolate_band(&d, 0.4, 0.6).unwrap().count(), 0);
        // half-open: background 1.0 is outside [0, 1)
        assert_eq!(isolate_band(&d, 0.0, 1.0).unwrap().count(), 16);
        assert!(isolate_band(&d, 0.5, 0.5).is_err());
    }

    #[test]
    fn object_counting() {
        let p = StereoParams::default();
        let empty = BinaryMask::from_fn(30, 30, |_, _| false);
        assert_eq!(count_objects(&empty, &p), 0);
        let blobs = |bridge: bool| {
            BinaryMask::from_fn(30, 30, move |x, y| {
                (x < 10 && y < 10) || (x >= 15 && x < 25 && y < 10) || (bridge && y == 5 && x < 15)
            })
        };
        assert_eq!(count_objects(&blobs(false), &p), 2);
        assert_eq!(count_objects(&blobs(true), &p), 1);
        // diagonal contact joins only under 8-connectivity
        let diag = BinaryMask::from_fn(30, 30, |x, y| (x < 10 && y < 10) || ((10..20).contains(&x) && (10..20).contains(&y)));
        assert_eq!(count_objects(&diag, &p), 2);
        let p8 = StereoParams { connectivity: Connectivity::Eight, ..p };
        assert_eq!(count_objects(&diag, &p8), 1);
    }

    #[test]
    fn alert_levels() {
        let p = StereoParams::default();
        let bands = LaneBands::default();
        let blob = |v: f64| DepthFrame::from_fn(40, 40, move |x, y| if x < 12 && y < 12 { v } else { 1.0 });
        assert_eq!(classify_alert(&DepthFrame::far(40, 40), &bands, &p).0, AlertLevel::Green);
        assert_eq!(classify_alert(&blob(0.2), &bands, &p), (AlertLevel::Red, [1, 0, 0]));
        assert_eq!(classify_alert(&blob(0.45), &bands, &p), (AlertLevel::Yellow, [0, 1, 0]));
        assert_eq!(classify_alert(&blob(0.65), &bands, &p), (AlertLevel::Yellow, [0, 0, 1]));
        // beyond t3 but below the cutoff still counts as no danger
        assert_eq!(classify_alert(&blob(0.78), &bands, &p).0, AlertLevel::Green);
    }

    #[test]
    fn smoothing_constant_and_mass() {
        let c = DepthFrame::from_fn(20, 20, |_, _| 0.4);
        let s = smooth_depth(&c, 1.5);
        assert!(s.data().iter().all(|v| (v - 0.4).abs() < 1e-12));

        let spike = DepthFrame::from_fn(31, 31, |x, y| if x == 15 && y == 15 { 0.9 } else { 0.0 });
        let s = smooth_depth(&spike, 2.0);
        let mass: f64 = s.data().iter().sum();
        assert!((mass - 0.9).abs() < 1e-6, "mass {mass}");
        assert!(s.get(15, 15) < 0.9);
    }

    #[test]
    fn smoothing_ignores_background() {
        let d = DepthFrame::from_fn(20, 20, |x, _| if x < 10 { 0.3 } else { 1.0 });
        let s = smooth_depth(&d, 2.0);
        for y in 0..20 {
            for x in 0..20 {
                let expected = if x < 10 { 0.3 } else { 1.0 };
                assert!((s.get(x, y) - expected).abs() < 1e-12);
            }
        }
    }
}
