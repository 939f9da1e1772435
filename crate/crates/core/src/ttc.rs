//! Focus of expansion, per-column time to collision and the advisory
//! heading angle.
//!
//! TTC values are in frames; divide by the frame period for seconds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::FlowVectorSample;
use crate::flow::FlowField;

/// Fewest usable vectors for a focus-of-expansion fit.
pub const MIN_FOE_SAMPLES: usize = 8;

/// Smallest eigenvalue ratio of the normal matrix before the field is
/// considered parallel.
const DEGENERACY_RATIO: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TtcError {
    #[error("too few vectors above the magnitude floor: {found} < {MIN_FOE_SAMPLES}")]
    TooFewVectors { found: usize },
    #[error("degenerate flow field: vectors are near-parallel, no finite focus of expansion")]
    Degenerate,
    #[error("invalid ttc parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HeadingRule {
    /// Steer toward the column with the longest time to collision.
    #[default]
    TowardLongest,
    /// Steer away from the column with the shortest time to collision.
    AvoidShortest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TtcParams {
    pub column_width: usize,
    pub max_steer: f64,
    pub magnitude_floor: f64,
    pub heading_rule: HeadingRule,
}

impl Default for TtcParams {
    fn default() -> Self {
        Self { column_width: 16, max_steer: 0.35, magnitude_floor: 0.25, heading_rule: HeadingRule::TowardLongest }
    }
}

impl TtcParams {
    pub fn validate(&self) -> Result<(), TtcError> {
        if self.column_width == 0 {
            return Err(TtcError::BadParams("column_width must be >= 1".into()));
        }
        if !(self.max_steer.is_finite() && self.max_steer >= 0.0) {
            return Err(TtcError::BadParams(format!("max_steer must be finite and >= 0, got {}", self.max_steer)));
        }
        if !(self.magnitude_floor >= 0.0) {
            return Err(TtcError::BadParams(format!("magnitude_floor must be >= 0, got {}", self.magnitude_floor)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusOfExpansion {
    pub x: f64,
    pub y: f64,
    /// RMS perpendicular distance from the point to the sample lines.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TtcProfile {
    pub column_width: usize,
    /// One value per column; `f64::INFINITY` where nothing expands.
    pub values: Vec<f64>,
}

impl TtcProfile {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("column_index,ttc_frames\n");
        for (i, v) in self.values.iter().enumerate() {
            if v.is_finite() {
                out.push_str(&format!("{i},{v:.6}\n"));
            } else {
                out.push_str(&format!("{i},inf\n"));
            }
        }
        out
    }
}

/// Radians; negative steers left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeadingAngle {
    pub angle: f64,
}

fn dense_samples(flow: &FlowField) -> Vec<FlowVectorSample> {
    let (w, h) = flow.dimensions();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (u, v) = flow.at(x, y);
            out.push(FlowVectorSample::new(x as f64, y as f64, u, v));
        }
    }
    out
}

/// Least-squares intersection of the lines through every vector above
/// `magnitude_floor`.
pub fn estimate_foe(flow: &FlowField, magnitude_floor: f64) -> Result<FocusOfExpansion, TtcError> {
    estimate_foe_from_samples(&dense_samples(flow), magnitude_floor)
}

pub fn estimate_foe_from_samples(
    samples: &[FlowVectorSample],
    magnitude_floor: f64,
) -> Result<FocusOfExpansion, TtcError> {
    let usable: Vec<&FlowVectorSample> =
        samples.iter().filter(|s| s.magnitude > magnitude_floor && s.magnitude.is_finite()).collect();
    if usable.len() < MIN_FOE_SAMPLES {
        return Err(TtcError::TooFewVectors { found: usable.len() });
    }
    // centering keeps the normal equations well scaled far from the origin
    let n = usable.len() as f64;
    let ox = usable.iter().map(|s| s.x).sum::<f64>() / n;
    let oy = usable.iter().map(|s| s.y).sum::<f64>() / n;
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in &usable {
        let (nx, ny) = (-s.v / s.magnitude, s.u / s.magnitude);
        let d = nx * (s.x - ox) + ny * (s.y - oy);
        a11 += nx * nx;
        a12 += nx * ny;
        a22 += ny * ny;
        b1 += nx * d;
        b2 += ny * d;
    }
    let trace = a11 + a22;
    let det = a11 * a22 - a12 * a12;
    let disc = ((a11 - a22).powi(2) / 4.0 + a12 * a12).sqrt();
    let (l_max, l_min) = (trace / 2.0 + disc, trace / 2.0 - disc);
    if !(l_max > 0.0) || l_min / l_max < DEGENERACY_RATIO || det <= 0.0 {
        return Err(TtcError::Degenerate);
    }
    let fx = (a22 * b1 - a12 * b2) / det;
    let fy = (a11 * b2 - a12 * b1) / det;
    let ss: f64 = usable
        .iter()
        .map(|s| {
            let (nx, ny) = (-s.v / s.magnitude, s.u / s.magnitude);
            (nx * (fx - (s.x - ox)) + ny * (fy - (s.y - oy))).powi(2)
        })
        .sum();
    Ok(FocusOfExpansion { x: fx + ox, y: fy + oy, residual: (ss / n).sqrt() })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Median `ρ / ρ̇` per column over every pixel of the field.
pub fn column_ttc(flow: &FlowField, foe: &FocusOfExpansion, column_width: usize) -> TtcProfile {
    column_ttc_from_samples(&dense_samples(flow), flow.width(), foe, column_width)
}

/// Same as [`column_ttc`] for an arbitrary sample set over a frame of
/// `frame_width` pixels.
pub fn column_ttc_from_samples(
    samples: &[FlowVectorSample],
    frame_width: usize,
    foe: &FocusOfExpansion,
    column_width: usize,
) -> TtcProfile {
    assert!(column_width > 0, "column_width must be positive");
    let n_cols = frame_width.div_ceil(column_width).max(1);
    let mut per_col: Vec<Vec<f64>> = vec![Vec::new(); n_cols];
    for s in samples {
        let (dx, dy) = (s.x - foe.x, s.y - foe.y);
        let rho_sq = dx * dx + dy * dy;
        // ρ/ρ̇ with ρ̇ = (u,v)·(dx,dy)/ρ
        let outward = s.u * dx + s.v * dy;
        if rho_sq > 0.0 && outward > 0.0 {
            let col = ((s.x.max(0.0) as usize) / column_width).min(n_cols - 1);
            per_col[col].push(rho_sq / outward);
        }
    }
    let values = per_col.into_iter().map(|mut c| if c.is_empty() { f64::INFINITY } else { median(&mut c) }).collect();
    TtcProfile { column_width, values }
}

fn pick_column(values: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mid = values.len() / 2;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        let b = values[best];
        if better(v, b) || (v == b && i.abs_diff(mid) < best.abs_diff(mid)) {
            best = i;
        }
    }
    best
}

/// `max_steer · (c − c_mid) / c_mid` with `c_mid = ⌊n/2⌋`; `c` is the
/// longest-TTC column (ties: closest to center, then leftmost).
pub fn heading_angle(profile: &TtcProfile, max_steer: f64) -> HeadingAngle {
    heading_angle_with(profile, max_steer, HeadingRule::TowardLongest)
}

pub fn heading_angle_with(profile: &TtcProfile, max_steer: f64, rule: HeadingRule) -> HeadingAngle {
    let values = &profile.values;
    let c_mid = values.len() / 2;
    if c_mid == 0 || values.iter().all(|v| v.is_infinite()) {
        return HeadingAngle { angle: 0.0 };
    }
    let offset = match rule {
        HeadingRule::TowardLongest => pick_column(values, |a, b| a > b) as f64 - c_mid as f64,
        HeadingRule::AvoidShortest => c_mid as f64 - pick_column(values, |a, b| a < b) as f64,
    };
    HeadingAngle { angle: (max_steer * offset / c_mid as f64).clamp(-max_steer, max_steer) }
}

/// FOE, profile and heading from one sample set.
pub fn analyze_samples(
    samples: &[FlowVectorSample],
    frame_width: usize,
    p: &TtcParams,
) -> Result<(FocusOfExpansion, TtcProfile, HeadingAngle), TtcError> {
    p.validate()?;
    let foe = estimate_foe_from_samples(samples, p.magnitude_floor)?;
    let profile = column_ttc_from_samples(samples, frame_width, &foe, p.column_width);
    let heading = heading_angle_with(&profile, p.max_steer, p.heading_rule);
    Ok((foe, profile, heading))
}

pub fn analyze(flow: &FlowField, p: &TtcParams) -> Result<(FocusOfExpansion, TtcProfile, HeadingAngle), TtcError> {
    analyze_samples(&dense_samples(flow), flow.width(), p)
}
