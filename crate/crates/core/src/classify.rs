//! Flow vector sampling, object/background classification, the rose-plot
//! histogram and the object-to-background ratio.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::FlowField;

/// Ratio reported when object vectors exist but no background vectors do.
/// It passes every finite threshold and saturates the box-size law.
pub const SATURATED_RATIO: f64 = f64::INFINITY;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("stride {stride} out of range for a {width}x{height} field")]
    BadStride { stride: usize, width: usize, height: usize },
    #[error("rose histogram needs at least 4 bins, got {0}")]
    TooFewBins(usize),
    #[error("invalid classification parameters: {0}")]
    BadParams(String),
}

/// One subsampled flow arrow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowVectorSample {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
    pub magnitude: f64,
    /// Radians in `(−π, π]`, zero pointing right (+x), image y down.
    pub angle: f64,
}

impl FlowVectorSample {
    pub fn new(x: f64, y: f64, u: f64, v: f64) -> Self {
        Self { x, y, u, v, magnitude: u.hypot(v), angle: v.atan2(u) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorClass {
    Object,
    Background,
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifiedSample {
    pub sample: FlowVectorSample,
    pub class: VectorClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyParams {
    /// Samples slower than this (pixels/frame) are stationary.
    pub magnitude_threshold: f64,
    /// Direction approaching objects move in, radians.
    pub object_heading: f64,
    /// Total width of the object window centered on `object_heading`.
    pub angle_window: f64,
    pub grid_stride: usize,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        Self { magnitude_threshold: 0.25, object_heading: 0.0, angle_window: PI / 4.0, grid_stride: 8 }
    }
}

impl ClassifyParams {
    /// The same parameters for the opposite-side mirror (heading flipped).
    pub fn mirrored(mut self) -> Self {
        self.object_heading = wrap_angle(self.object_heading + PI);
        self
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        if !(self.angle_window > 0.0 && self.angle_window <= PI) {
            return Err(ClassifyError::BadParams(format!(
                "angle_window must be in (0, π], got {}",
                self.angle_window
            )));
        }
        if self.grid_stride < 1 {
            return Err(ClassifyError::BadParams("grid_stride must be >= 1".into()));
        }
        if !(self.magnitude_threshold >= 0.0) {
            return Err(ClassifyError::BadParams("magnitude_threshold must be >= 0".into()));
        }
        Ok(())
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Absolute angular distance in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// One sample per grid site `(i·stride, j·stride)`, row-major.
pub fn sample_vectors(flow: &FlowField, stride: usize) -> Result<Vec<FlowVectorSample>, ClassifyError> {
    let (w, h) = flow.dimensions();
    if stride < 1 || stride > w.min(h) {
        return Err(ClassifyError::BadStride { stride, width: w, height: h });
    }
    let mut out = Vec::with_capacity(w.div_ceil(stride) * h.div_ceil(stride));
    for y in (0..h).step_by(stride) {
        for x in (0..w).step_by(stride) {
            let (u, v) = flow.at(x, y);
            out.push(FlowVectorSample::new(x as f64, y as f64, u, v));
        }
    }
    Ok(out)
}

pub fn classify(sample: &FlowVectorSample, p: &ClassifyParams) -> VectorClass {
    if sample.magnitude < p.magnitude_threshold {
        VectorClass::Stationary
    } else if angular_distance(sample.angle, p.object_heading) <= p.angle_window / 2.0 {
        VectorClass::Object
    } else {
        VectorClass::Background
    }
}

pub fn classify_all(samples: &[FlowVectorSample], p: &ClassifyParams) -> Vec<ClassifiedSample> {
    samples.iter().map(|s| ClassifiedSample { sample: *s, class: classify(s, p) }).collect()
}

/// Angular census of moving samples. Bin `k` covers
/// `(−π + k·w, −π + (k+1)·w]` with `w = 2π / n_bins`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoseHistogram {
    pub n_bins: usize,
    pub object_counts: Vec<usize>,
    pub background_counts: Vec<usize>,
}

impl RoseHistogram {
    pub fn bin_width(&self) -> f64 {
        2.0 * PI / self.n_bins as f64
    }

    pub fn bin_start(&self, k: usize) -> f64 {
        -PI + k as f64 * self.bin_width()
    }

    pub fn bin_of(&self, angle: f64) -> usize {
        bin_index(angle, self.n_bins)
    }

    /// `bin_start_rad,object_count,background_count`, one row per bin.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_start_rad,object_count,background_count\n");
        for k in 0..self.n_bins {
            let _ = writeln!(
                s,
                "{:.6},{},{}",
                self.bin_start(k),
                self.object_counts[k],
                self.background_counts[k]
            );
        }
        s
    }
}

fn bin_index(angle: f64, n_bins: usize) -> usize {
    let a = wrap_angle(angle);
    let w = 2.0 * PI / n_bins as f64;
    // upper-closed bins: an angle exactly on a boundary belongs to the lower bin
    let k = ((a + PI) / w).ceil() as isize - 1;
    k.clamp(0, n_bins as isize - 1) as usize
}

pub fn rose_histogram(samples: &[ClassifiedSample], n_bins: usize) -> Result<RoseHistogram, ClassifyError> {
    if n_bins < 4 {
        return Err(ClassifyError::TooFewBins(n_bins));
    }
    let mut h = RoseHistogram {
        n_bins,
        object_counts: vec![0; n_bins],
        background_counts: vec![0; n_bins],
    };
    for s in samples {
        let k = bin_index(s.sample.angle, n_bins);
        match s.class {
            VectorClass::Object => h.object_counts[k] += 1,
            VectorClass::Background => h.background_counts[k] += 1,
            VectorClass::Stationary => {}
        }
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCounts {
    pub object: usize,
    pub background: usize,
    pub stationary: usize,
}

pub fn class_counts(samples: &[ClassifiedSample]) -> ClassCounts {
    let mut c = ClassCounts::default();
    for s in samples {
        match s.class {
            VectorClass::Object => c.object += 1,
            VectorClass::Background => c.background += 1,
            VectorClass::Stationary => c.stationary += 1,
        }
    }
    c
}

/// `object / background`; [`SATURATED_RATIO`] when only object vectors
/// exist, `0` when neither does. Stationary samples are ignored.
pub fn object_ratio(samples: &[ClassifiedSample]) -> f64 {
    ratio_from_counts(class_counts(samples))
}

pub fn ratio_from_counts(c: ClassCounts) -> f64 {
    match (c.object, c.background) {
        (0, _) => 0.0,
        (_, 0) => SATURATED_RATIO,
        (o, b) => o as f64 / b as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cs(angle: f64, class: VectorClass) -> ClassifiedSample {
        ClassifiedSample { sample: FlowVectorSample::new(0.0, 0.0, angle.cos(), angle.sin()), class }
    }

    #[test]
    fn sampling_grid() {
        let flow = FlowField::zeros(64, 64);
        let s = sample_vectors(&flow, 8).unwrap();
        assert_eq!(s.len(), 64);
        assert!(s.iter().all(|p| p.x as usize % 8 == 0 && p.y as usize % 8 == 0));
        assert_eq!((s[1].x, s[1].y), (8.0, 0.0));
        assert_eq!(sample_vectors(&flow, 1).unwrap().len(), 64 * 64);
        assert!(sample_vectors(&flow, 65).is_err());
        assert!(sample_vectors(&flow, 0).is_err());
    }

    #[test]
    fn classification_cases() {
        let p = ClassifyParams { magnitude_threshold: 0.1, ..Default::default() };
        assert_eq!(classify(&FlowVectorSample::new(0.0, 0.0, 1.0, 0.0), &p), VectorClass::Object);
        assert_eq!(classify(&FlowVectorSample::new(0.0, 0.0, -1.0, 0.0), &p), VectorClass::Background);
        assert_eq!(classify(&FlowVectorSample::new(0.0, 0.0, 0.01, 0.0), &p), VectorClass::Stationary);
        // window edge: ±π/8 is inside, slightly beyond is not
        let a = PI / 8.0;
        assert_eq!(classify(&FlowVectorSample::new(0.0, 0.0, a.cos(), a.sin() * 0.999), &p), VectorClass::Object);
        let b = PI / 8.0 + 1e-6;
        assert_eq!(classify(&FlowVectorSample::new(0.0, 0.0, b.cos(), b.sin()), &p), VectorClass::Background);
    }

    #[test]
    fn mirrored_heading_flips_classes() {
        let p = ClassifyParams::default().mirrored();
        assert_eq!(classify(&FlowVectorSample::new(0.0, 0.0, -1.0, 0.0), &p), VectorClass::Object);
        assert_eq!(classify(&FlowVectorSample::new(0.0, 0.0, 1.0, 0.0), &p), VectorClass::Background);
    }

    #[test]
    fn sample_angle_and_magnitude() {
        let s = FlowVectorSample::new(1.0, 2.0, -1.0, 0.0);
        assert_eq!(s.angle, PI);
        let s = FlowVectorSample::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(s.magnitude, 5.0);
    }

    #[test]
    fn empty_histogram() {
        let h = rose_histogram(&[], 8).unwrap();
        assert!(h.object_counts.iter().chain(&h.background_counts).all(|&c| c == 0));
        assert_eq!(rose_histogram(&[], 3), Err(ClassifyError::TooFewBins(3)));
    }

    #[test]
    fn histogram_single_bin() {
        let samples: Vec<_> = (0..10).map(|_| cs(0.0, VectorClass::Object)).collect();
        let h = rose_histogram(&samples, 8).unwrap();
        // bin 3 covers (−π/4, 0]
        assert_eq!(h.object_counts, vec![0, 0, 0, 10, 0, 0, 0, 0]);
    }

    #[test]
    fn histogram_matches_manual_binning() {
        // 8 bins of width π/4 starting at −π; bin k = (−π + kπ/4, −π + (k+1)π/4]
        let cases = [
            (PI, VectorClass::Background, 7),
            (-PI + 0.1, VectorClass::Background, 0),
            (-PI / 2.0 - 0.05, VectorClass::Background, 1),
            (0.1, VectorClass::Object, 4),
            (-0.1, VectorClass::Object, 3),
            (PI / 2.0 + 0.2, VectorClass::Background, 6),
            (PI / 4.0 - 0.01, VectorClass::Object, 4),
            (2.0, VectorClass::Stationary, 6),
        ];
        let samples: Vec<_> = cases.iter().map(|&(a, c, _)| cs(a, c)).collect();
        let h = rose_histogram(&samples, 8).unwrap();
        let mut obj = vec![0; 8];
        let mut bg = vec![0; 8];
        for &(_, c, k) in &cases {
            match c {
                VectorClass::Object => obj[k] += 1,
                VectorClass::Background => bg[k] += 1,
                VectorClass::Stationary => {}
            }
        }
        assert_eq!(h.object_counts, obj);
        assert_eq!(h.background_counts, bg);
        assert!(h.to_csv().starts_with("bin_start_rad,object_count,background_count\n-3.141593,0,1\n"));
    }

    #[test]
    fn ratio_conventions() {
        let mut s: Vec<_> = (0..10).map(|_| cs(0.0, VectorClass::Object)).collect();
        s.extend((0..100).map(|_| cs(PI, VectorClass::Background)));
        assert!((object_ratio(&s) - 0.1).abs() < 1e-15);
        assert!(object_ratio(&s) >= 0.1);

        let bg: Vec<_> = (0..40).map(|_| cs(PI, VectorClass::Background)).collect();
        assert_eq!(object_ratio(&bg), 0.0);

        let obj: Vec<_> = (0..30).map(|_| cs(0.0, VectorClass::Object)).collect();
        assert_eq!(object_ratio(&obj), SATURATED_RATIO);
        assert!(object_ratio(&obj) >= 1e300);
        assert_eq!(object_ratio(&[]), 0.0);
    }
}
