//! Box capture: turns the object vectors of one frame into a detection box
//! and runs it through the nullification gates, carrying the inter-frame
//! memory those gates need.
//!
//! Per frame the order is fixed: ratio gate, mean center, standard
//! deviation refinement, ratio-proportional sizing, containment, movement
//! (or midfield when there is no recent box), and finally the size/position
//! rule.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{class_counts, ratio_from_counts, ClassCounts, ClassifiedSample, FlowVectorSample, VectorClass};

/// Accepted boxes kept in [`TrackState::history`].
pub const HISTORY_LEN: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum TrackError {
    #[error("no object samples")]
    Empty,
    #[error("invalid tracking parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned detection box given by center and half extents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box {
    pub cx: f64,
    pub cy: f64,
    pub half_w: f64,
    pub half_h: f64,
}

impl Box {
    pub fn center(&self) -> Point {
        Point::new(self.cx, self.cy)
    }

    pub fn x_min(&self) -> f64 {
        self.cx - self.half_w
    }

    pub fn x_max(&self) -> f64 {
        self.cx + self.half_w
    }

    pub fn y_min(&self) -> f64 {
        self.cy - self.half_h
    }

    pub fn y_max(&self) -> f64 {
        self.cy + self.half_h
    }

    /// Longer side length.
    pub fn side(&self) -> f64 {
        2.0 * self.half_w.max(self.half_h)
    }

    /// Closed-interval membership.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min() && x <= self.x_max() && y >= self.y_min() && y <= self.y_max()
    }

    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { cx: 0.5 * (x0 + x1), cy: 0.5 * (y0 + y1), half_w: 0.5 * (x1 - x0), half_h: 0.5 * (y1 - y0) }
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_w * self.half_h
    }

    pub fn iou(&self, other: &Box) -> f64 {
        let ix = (self.x_max().min(other.x_max()) - self.x_min().max(other.x_min())).max(0.0);
        let iy = (self.y_max().min(other.y_max()) - self.y_min().max(other.y_min())).max(0.0);
        let inter = ix * iy;
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    /// Clips the box to the viewport's pixel range, keeping positive extents.
    pub fn clipped(&self, view: &Viewport) -> Self {
        let (lx, hx) = (view.x0, view.x0 + view.width as f64 - 1.0);
        let (ly, hy) = (view.y0, view.y0 + view.height as f64 - 1.0);
        let x0 = self.x_min().clamp(lx, hx);
        let x1 = self.x_max().clamp(lx, hx);
        let y0 = self.y_min().clamp(ly, hy);
        let y1 = self.y_max().clamp(ly, hy);
        let mut b = Self::from_corners(x0, y0, x1, y1);
        b.half_w = b.half_w.max(0.5);
        b.half_h = b.half_h.max(0.5);
        b.cx = b.cx.clamp(lx + b.half_w, hx - b.half_w);
        b.cy = b.cy.clamp(ly + b.half_h, hy - b.half_h);
        b
    }
}

/// Pixel frame the tracker works in. The origin is normally zero; shifting
/// it shifts every region rule with it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub x0: f64,
    pub y0: f64,
    pub width: usize,
    pub height: usize,
}

impl Viewport {
    pub fn new(width: usize, height: usize) -> Self {
        Self { x0: 0.0, y0: 0.0, width, height }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self { x0: self.x0 + dx, y0: self.y0 + dy, ..*self }
    }

    /// Horizontal position as a fraction of the width.
    fn x_fraction(&self, x: f64) -> f64 {
        (x - self.x0) / self.width as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackParams {
    pub ratio_gate: f64,
    pub containment_fraction: f64,
    /// Multiples of the radial standard deviation, applied in order.
    pub stddev_schedule: Vec<f64>,
    /// Box side at ratio zero, pixels.
    pub base_size: f64,
    /// Extra side length per unit of object ratio, pixels.
    pub size_gain: f64,
    pub ratio_cap: f64,
    /// Largest center displacement per elapsed frame, pixels.
    pub max_step: f64,
    pub step_window: usize,
    pub left_region_fraction: f64,
    pub min_credible_size: f64,
    pub mid_region: (f64, f64),
    pub surge_factor: f64,
    /// Allow a mid-frame first box when the object count surges.
    pub surge_exception: bool,
    /// Opposite-side camera: region rules mirror horizontally.
    pub mirror: bool,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self {
            ratio_gate: 0.1,
            containment_fraction: 0.5,
            stddev_schedule: vec![3.0, 2.0, 1.0],
            base_size: 40.0,
            size_gain: 200.0,
            ratio_cap: 1.0,
            max_step: 40.0,
            step_window: 5,
            left_region_fraction: 1.0 / 3.0,
            min_credible_size: 24.0,
            mid_region: (0.3, 0.7),
            surge_factor: 3.0,
            surge_exception: true,
            mirror: false,
        }
    }
}

impl TrackParams {
    pub fn validate(&self) -> Result<(), TrackError> {
        let bad = |m: &str| Err(TrackError::BadParams(m.to_string()));
        if !(self.ratio_gate > 0.0) {
            return bad("ratio_gate must be > 0");
        }
        if !(self.containment_fraction > 0.0 && self.containment_fraction <= 1.0) {
            return bad("containment_fraction must be in (0, 1]");
        }
        if self.stddev_schedule.iter().any(|k| !(*k > 0.0))
            || self.stddev_schedule.windows(2).any(|w| !(w[1] < w[0]))
        {
            return bad("stddev_schedule must be positive and strictly decreasing");
        }
        if !(self.base_size > 0.0) || self.size_gain < 0.0 || !(self.ratio_cap >= 0.0) {
            return bad("box size law needs base_size > 0, size_gain >= 0, ratio_cap >= 0");
        }
        if !(self.mid_region.0 <= self.mid_region.1) {
            return bad("mid_region must be ordered");
        }
        if self.step_window < 1 {
            return bad("step_window must be >= 1");
        }
        Ok(())
    }
}

/// The gate that nullified a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    RatioGate,
    ContainmentGate,
    MovementGate,
    MidfieldGate,
    SizePositionGate,
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::RatioGate => "ratio_gate",
            Gate::ContainmentGate => "containment_gate",
            Gate::MovementGate => "movement_gate",
            Gate::MidfieldGate => "midfield_gate",
            Gate::SizePositionGate => "size_position_gate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    pub fn is_accept(self) -> bool {
        self == Verdict::Accept
    }
}

/// Outcome of the movement rule: no recent box means it has nothing to say.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MovementVerdict {
    Accept,
    Reject,
    NoRecentBox,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackState {
    pub last_box: Option<Box>,
    pub last_box_frame: usize,
    pub last_object_count: usize,
    pub last_frame: Option<usize>,
    /// Recently accepted boxes, oldest first.
    pub history: VecDeque<(usize, Box)>,
}

impl TrackState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Per-frame tracker result.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackOutcome {
    pub emitted: Option<Box>,
    /// The candidate box before gating, when one was built.
    pub candidate: Option<Box>,
    pub rejected_by: Option<Gate>,
    pub ratio: f64,
    pub counts: ClassCounts,
}

fn mean_point<'a>(points: impl Iterator<Item = &'a FlowVectorSample>) -> Option<Point> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for s in points {
        sx += s.x;
        sy += s.y;
        n += 1;
    }
    (n > 0).then(|| Point::new(sx / n as f64, sy / n as f64))
}

/// Mean position of the object samples.
pub fn initial_center(object_samples: &[FlowVectorSample]) -> Result<Point, TrackError> {
    mean_point(object_samples.iter()).ok_or(TrackError::Empty)
}

/// Iterative outlier removal: for each multiple `k` drop samples farther
/// than `k` radial standard deviations from the center, then re-center.
/// Stops early rather than leave fewer than two samples.
pub fn stddev_refine(
    object_samples: &[FlowVectorSample],
    center: Point,
    schedule: &[f64],
) -> Result<(Point, Vec<FlowVectorSample>), TrackError> {
    if object_samples.is_empty() {
        return Err(TrackError::Empty);
    }
    let mut center = center;
    let mut inliers = object_samples.to_vec();
    for &k in schedule {
        if inliers.len() < 2 {
            break;
        }
        let n = inliers.len() as f64;
        let var_x = inliers.iter().map(|s| (s.x - center.x).powi(2)).sum::<f64>() / n;
        let var_y = inliers.iter().map(|s| (s.y - center.y).powi(2)).sum::<f64>() / n;
        let limit = k * (var_x + var_y).sqrt();
        let kept: Vec<_> = inliers
            .iter()
            .copied()
            .filter(|s| Point::new(s.x, s.y).distance(&center) <= limit)
            .collect();
        if kept.len() < 2 {
            break;
        }
        center = mean_point(kept.iter()).expect("non-empty");
        inliers = kept;
    }
    Ok((center, inliers))
}

/// Half extents of the square box for a given object ratio.
pub fn box_size(ratio: f64, p: &TrackParams) -> (f64, f64) {
    let r = if ratio.is_nan() { 0.0 } else { ratio.max(0.0).min(p.ratio_cap) };
    let side = p.base_size + p.size_gain * r;
    (side / 2.0, side / 2.0)
}

/// Accepts when at least `containment_fraction` of the object samples lie
/// inside the closed box.
pub fn containment_check(b: &Box, object_samples: &[FlowVectorSample], p: &TrackParams) -> Verdict {
    if object_samples.is_empty() {
        return Verdict::Reject;
    }
    let inside = object_samples.iter().filter(|s| b.contains(s.x, s.y)).count();
    Verdict::from_bool(inside as f64 >= p.containment_fraction * object_samples.len() as f64)
}

pub fn movement_gate(state: &TrackState, candidate: &Box, frame_idx: usize, p: &TrackParams) -> MovementVerdict {
    let Some(prev) = state.last_box else {
        return MovementVerdict::NoRecentBox;
    };
    if frame_idx < state.last_box_frame {
        return MovementVerdict::NoRecentBox;
    }
    let elapsed = frame_idx - state.last_box_frame;
    if elapsed > p.step_window {
        return MovementVerdict::NoRecentBox;
    }
    let allowed = p.max_step * elapsed.max(1) as f64;
    if prev.center().distance(&candidate.center()) <= allowed {
        MovementVerdict::Accept
    } else {
        MovementVerdict::Reject
    }
}

/// Small boxes on the far side of the frame are not credible.
pub fn size_position_gate(candidate: &Box, view: &Viewport, p: &TrackParams) -> Verdict {
    let frac = view.x_fraction(candidate.cx);
    let far_side = if p.mirror {
        frac > 1.0 - p.left_region_fraction
    } else {
        frac < p.left_region_fraction
    };
    Verdict::from_bool(!(candidate.side() < p.min_credible_size && far_side))
}

/// A first box must form at the sides unless the object count surges (an
/// object revealed from behind an occluder).
pub fn midfield_gate(
    state: &TrackState,
    candidate: &Box,
    object_count: usize,
    view: &Viewport,
    p: &TrackParams,
) -> Verdict {
    let frac = view.x_fraction(candidate.cx);
    let in_middle = frac >= p.mid_region.0 && frac <= p.mid_region.1;
    if !in_middle {
        return Verdict::Accept;
    }
    // a surge needs an observed earlier frame to compare against
    if !p.surge_exception || state.last_frame.is_none() {
        return Verdict::Reject;
    }
    let baseline = state.last_object_count.max(1) as f64;
    Verdict::from_bool(object_count as f64 >= p.surge_factor * baseline)
}

/// Runs one frame through the tracker. Rejection is a normal outcome and is
/// reported with the gate that caused it.
pub fn track_frame(
    state: &TrackState,
    samples: &[ClassifiedSample],
    frame_idx: usize,
    view: &Viewport,
    p: &TrackParams,
) -> (TrackState, TrackOutcome) {
    let mut next = state.clone();
    next.last_frame = Some(frame_idx);
    let counts = class_counts(samples);
    let ratio = ratio_from_counts(counts);
    let mut outcome =
        TrackOutcome { emitted: None, candidate: None, rejected_by: None, ratio, counts };

    if samples.is_empty() {
        outcome.rejected_by = Some(Gate::RatioGate);
        return (next, outcome);
    }
    next.last_object_count = counts.object;

    if !(ratio >= p.ratio_gate) {
        outcome.rejected_by = Some(Gate::RatioGate);
        return (next, outcome);
    }

    let objects: Vec<FlowVectorSample> =
        samples.iter().filter(|s| s.class == VectorClass::Object).map(|s| s.sample).collect();
    let center = initial_center(&objects).expect("ratio gate implies object samples");
    let (center, _) = stddev_refine(&objects, center, &p.stddev_schedule).expect("non-empty");
    let (half_w, half_h) = box_size(ratio, p);
    let candidate = Box { cx: center.x, cy: center.y, half_w, half_h }.clipped(view);
    outcome.candidate = Some(candidate);

    let rejected = if !containment_check(&candidate, &objects, p).is_accept() {
        Some(Gate::ContainmentGate)
    } else {
        match movement_gate(state, &candidate, frame_idx, p) {
            MovementVerdict::Reject => Some(Gate::MovementGate),
            MovementVerdict::Accept => None,
            MovementVerdict::NoRecentBox => {
                (!midfield_gate(state, &candidate, counts.object, view, p).is_accept())
                    .then_some(Gate::MidfieldGate)
            }
        }
        .or_else(|| (!size_position_gate(&candidate, view, p).is_accept()).then_some(Gate::SizePositionGate))
    };

    match rejected {
        Some(g) => outcome.rejected_by = Some(g),
        None => {
            outcome.emitted = Some(candidate);
            next.last_box = Some(candidate);
            next.last_box_frame = frame_idx;
            next.history.push_back((frame_idx, candidate));
            while next.history.len() > HISTORY_LEN {
                next.history.pop_front();
            }
        }
    }
    (next, outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64, y: f64) -> FlowVectorSample {
        FlowVectorSample::new(x, y, 1.0, 0.0)
    }

    fn obj(x: f64, y: f64) -> ClassifiedSample {
        ClassifiedSample { sample: at(x, y), class: VectorClass::Object }
    }

    fn bg(x: f64, y: f64) -> ClassifiedSample {
        ClassifiedSample { sample: FlowVectorSample::new(x, y, -1.0, 0.0), class: VectorClass::Background }
    }

    fn cluster_with_outliers() -> Vec<FlowVectorSample> {
        let mut s = vec![at(100.0, 50.0); 50];
        s.extend(vec![at(300.0, 200.0); 5]);
        s
    }

    #[test]
    fn center_is_mean() {
        assert_eq!(initial_center(&[at(10.0, 10.0), at(20.0, 20.0)]).unwrap(), Point::new(15.0, 15.0));
        assert_eq!(initial_center(&[at(5.0, 7.0)]).unwrap(), Point::new(5.0, 7.0));
        assert_eq!(initial_center(&[]), Err(TrackError::Empty));
        let c = initial_center(&cluster_with_outliers()).unwrap();
        // (50·100 + 5·300)/55, (50·50 + 5·200)/55
        assert!((c.x - 6500.0 / 55.0).abs() < 1e-12);
        assert!((c.y - 3500.0 / 55.0).abs() < 1e-12);
        assert!((c.x - 118.2).abs() < 0.05 && (c.y - 63.6).abs() < 0.05);
    }

    #[test]
    fn refine_drops_outliers() {
        let s = cluster_with_outliers();
        let c0 = initial_center(&s).unwrap();
        let (c, inliers) = stddev_refine(&s, c0, &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(inliers.len(), 50);
        assert!(c.distance(&Point::new(100.0, 50.0)) < 2.0);

        // the first pass alone removes them
        let (_, after_first) = stddev_refine(&s, c0, &[3.0]).unwrap();
        assert_eq!(after_first.len(), 50);
    }

    #[test]
    fn refine_degenerate_inputs() {
        let same = vec![at(4.0, 4.0); 6];
        let (c, inl) = stddev_refine(&same, Point::new(4.0, 4.0), &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(c, Point::new(4.0, 4.0));
        assert_eq!(inl.len(), 6);

        let one = [at(9.0, 1.0)];
        let (c, inl) = stddev_refine(&one, Point::new(9.0, 1.0), &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!((c, inl.len()), (Point::new(9.0, 1.0), 1));
        assert!(stddev_refine(&[], Point::new(0.0, 0.0), &[3.0]).is_err());
    }

    #[test]
    fn box_size_law() {
        let p = TrackParams::default();
        assert_eq!(box_size(0.0, &p), (20.0, 20.0));
        assert_eq!(box_size(0.1, &p).0 * 2.0, 60.0);
        assert!(box_size(0.3, &p).0 > box_size(0.2, &p).0);
        assert_eq!(box_size(f64::INFINITY, &p), box_size(p.ratio_cap, &p));
    }

    #[test]
    fn containment_boundaries() {
        let p = TrackParams::default();
        let b = Box { cx: 0.0, cy: 0.0, half_w: 10.0, half_h: 10.0 };
        let make = |inside: usize| -> Vec<FlowVectorSample> {
            (0..100).map(|i| if i < inside { at(0.0, 0.0) } else { at(50.0, 50.0) }).collect()
        };
        assert_eq!(containment_check(&b, &make(100), &p), Verdict::Accept);
        assert_eq!(containment_check(&b, &make(49), &p), Verdict::Reject);
        assert_eq!(containment_check(&b, &make(50), &p), Verdict::Accept);
        // closed box edges count as inside
        assert_eq!(containment_check(&b, &[at(10.0, -10.0)], &p), Verdict::Accept);
    }

    #[test]
    fn movement_cases() {
        let p = TrackParams::default();
        let mut st = TrackState::new();
        let cand = |x: f64| Box { cx: x, cy: 100.0, half_w: 20.0, half_h: 20.0 };
        assert_eq!(movement_gate(&st, &cand(204.0), 1, &p), MovementVerdict::NoRecentBox);
        st.last_box = Some(cand(200.0));
        st.last_box_frame = 0;
        assert_eq!(movement_gate(&st, &cand(204.0), 1, &p), MovementVerdict::Accept);
        st.last_box = Some(cand(300.0));
        assert_eq!(movement_gate(&st, &cand(20.0), 2, &p), MovementVerdict::Reject);
        assert_eq!(movement_gate(&st, &cand(20.0), 9, &p), MovementVerdict::NoRecentBox);
    }

    #[test]
    fn size_position_cases() {
        let p = TrackParams::default();
        let view = Viewport::new(320, 240);
        let small = |x: f64| Box { cx: x, cy: 100.0, half_w: 5.0, half_h: 5.0 };
        assert_eq!(size_position_gate(&small(32.0), &view, &p), Verdict::Reject);
        let large = Box { cx: 32.0, cy: 100.0, half_w: 30.0, half_h: 30.0 };
        assert_eq!(size_position_gate(&large, &view, &p), Verdict::Accept);
        assert_eq!(size_position_gate(&small(310.0), &view, &p), Verdict::Accept);
        let mirrored = TrackParams { mirror: true, ..p };
        assert_eq!(size_position_gate(&small(310.0), &view, &mirrored), Verdict::Reject);
        assert_eq!(size_position_gate(&small(32.0), &view, &mirrored), Verdict::Accept);
    }

    #[test]
    fn midfield_cases() {
        let p = TrackParams::default();
        let view = Viewport::new(320, 240);
        let b = |x: f64| Box { cx: x, cy: 100.0, half_w: 20.0, half_h: 20.0 };
        let mut st = TrackState::new();
        assert_eq!(midfield_gate(&st, &b(16.0), 5, &view, &p), Verdict::Accept);
        assert_eq!(midfield_gate(&st, &b(160.0), 40, &view, &p), Verdict::Reject);
        st.last_object_count = 5;
        st.last_frame = Some(0);
        assert_eq!(midfield_gate(&st, &b(160.0), 5, &view, &p), Verdict::Reject);
        assert_eq!(midfield_gate(&st, &b(160.0), 40, &view, &p), Verdict::Accept);
        let no_surge = TrackParams { surge_exception: false, ..p };
        assert_eq!(midfield_gate(&st, &b(160.0), 40, &view, &no_surge), Verdict::Reject);
    }

    fn cluster_frame(cx: f64, cy: f64) -> Vec<ClassifiedSample> {
        let mut s = Vec::new();
        for i in 0..20 {
            s.push(obj(cx + (i % 5) as f64 - 2.0, cy + (i / 5) as f64 - 1.5));
        }
        for i in 0..100 {
            s.push(bg((i % 20) as f64 * 16.0, 150.0 + (i / 20) as f64 * 16.0));
        }
        s
    }

    #[test]
    fn tracks_tight_cluster() {
        let p = TrackParams::default();
        // 100 px is near the left edge of a 640 px frame
        let view = Viewport::new(640, 480);
        let (st, out) = track_frame(&TrackState::new(), &cluster_frame(100.0, 50.0), 0, &view, &p);
        let b = out.emitted.expect("box");
        assert!(b.center().distance(&Point::new(100.0, 50.0)) < 2.0);
        assert_eq!(out.rejected_by, None);
        assert_eq!(st.last_box, Some(b));
        assert_eq!(st.last_object_count, 20);
        // ratio 0.2 -> side 80
        assert!((b.half_w - 40.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_gate_rejects_sparse_frames() {
        let p = TrackParams::default();
        let view = Viewport::new(320, 240);
        let mut s: Vec<_> = (0..5).map(|i| obj(50.0 + i as f64, 50.0)).collect();
        s.extend((0..100).map(|i| bg(i as f64, 200.0)));
        let (st, out) = track_frame(&TrackState::new(), &s, 3, &view, &p);
        assert_eq!(out.emitted, None);
        assert_eq!(out.rejected_by, Some(Gate::RatioGate));
        assert_eq!(out.rejected_by.unwrap().name(), "ratio_gate");
        assert_eq!(st.last_object_count, 5);
    }

    #[test]
    fn empty_frame_only_advances_frame_index() {
        let p = TrackParams::default();
        let view = Viewport::new(320, 240);
        let mut st = TrackState::new();
        st.last_object_count = 7;
        let (next, out) = track_frame(&st, &[], 4, &view, &p);
        assert_eq!(out.emitted, None);
        assert_eq!(next.last_frame, Some(4));
        assert_eq!(TrackState { last_frame: None, ..next }, st);
    }

    #[test]
    fn midfield_first_box_rejected() {
        let p = TrackParams::default();
        let view = Viewport::new(320, 240);
        let (_, out) = track_frame(&TrackState::new(), &cluster_frame(160.0, 50.0), 0, &view, &p);
        assert_eq!(out.emitted, None);
        assert_eq!(out.rejected_by, Some(Gate::MidfieldGate));
    }

    #[test]
    fn moving_box_is_followed() {
        let p = TrackParams::default();
        let view = Viewport::new(320, 240);
        let mut st = TrackState::new();
        for (f, x) in [(0, 60.0), (1, 70.0), (2, 80.0), (3, 160.0)] {
            let (next, out) = track_frame(&st, &cluster_frame(x, 50.0), f, &view, &p);
            if f < 3 {
                assert!(out.emitted.is_some(), "frame {f}");
            } else {
                // 80 px in one frame exceeds max_step
                assert_eq!(out.rejected_by, Some(Gate::MovementGate));
            }
            st = next;
        }
        assert_eq!(st.history.len(), 3);
    }

    #[test]
    fn params_validation() {
        assert!(TrackParams::default().validate().is_ok());
        let bad = TrackParams { stddev_schedule: vec![1.0, 2.0], ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TrackParams { containment_fraction: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
