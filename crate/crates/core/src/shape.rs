//! Wheel detection for the cases optical flow misses: Sobel edges with
//! non-maximum suppression and hysteresis, then circle Hough voting over a
//! range of radii.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::frame::Frame;

/// Binary edge image.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    edges: Vec<bool>,
}

impl EdgeMap {
    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, edges: vec![false; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut edges = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                edges.push(f(x, y));
            }
        }
        Self { width, height, edges }
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.edges[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.edges[y * self.width + x] = on;
    }

    pub fn count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }

    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &e)| e)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }
}

/// Minimum votes a circle of a given radius needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteThreshold {
    Fixed(u32),
    /// `⌈fraction · 2πr⌉`
    PerimeterFraction(f64),
}

impl VoteThreshold {
    pub fn for_radius(&self, r: usize) -> u32 {
        match *self {
            VoteThreshold::Fixed(v) => v.max(1),
            VoteThreshold::PerimeterFraction(f) => ((f * 2.0 * PI * r as f64).ceil() as u32).max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoughParams {
    pub r_min: usize,
    pub r_max: usize,
    pub vote_threshold: VoteThreshold,
    /// Suppression radius in center space, pixels.
    pub nms_radius: f64,
    /// Hysteresis thresholds on gradient magnitude (intensity per pixel).
    pub edge_low: f64,
    pub edge_high: f64,
}

impl Default for HoughParams {
    fn default() -> Self {
        Self {
            r_min: 6,
            r_max: 24,
            vote_threshold: VoteThreshold::PerimeterFraction(0.6),
            nms_radius: 8.0,
            edge_low: 0.06,
            edge_high: 0.12,
        }
    }
}

impl HoughParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.r_min == 0 || self.r_min > self.r_max {
            return Err(format!("need 0 < r_min <= r_max, got {}..{}", self.r_min, self.r_max));
        }
        if let VoteThreshold::Fixed(0) = self.vote_threshold {
            return Err("vote_threshold must be >= 1".into());
        }
        if self.edge_low > self.edge_high {
            return Err("edge_low must not exceed edge_high".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircleHit {
    pub cx: usize,
    pub cy: usize,
    pub r: usize,
    pub votes: u32,
}

/// `cx,cy,r,votes` rows with a header line.
pub fn hits_to_csv(hits: &[CircleHit]) -> String {
    let mut s = String::from("cx,cy,r,votes\n");
    for h in hits {
        let _ = writeln!(s, "{},{},{},{}", h.cx, h.cy, h.r, h.votes);
    }
    s
}

/// Where circle centers may be reported.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    width: usize,
    height: usize,
    allowed: Vec<bool>,
}

impl RegionMask {
    pub fn allow_all(width: usize, height: usize) -> Self {
        Self { width, height, allowed: vec![true; width * height] }
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn allows(&self, x: usize, y: usize) -> bool {
        self.allowed[y * self.width + x]
    }
}

/// Excludes the four corner squares of side `corner_fraction · min(w, h)`.
pub fn default_region_mask(width: usize, height: usize, corner_fraction: f64) -> RegionMask {
    let side = (corner_fraction.clamp(0.0, 0.5) * width.min(height) as f64).floor() as usize;
    let mut allowed = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let in_x = x < side || x >= width - side;
            let in_y = y < side || y >= height - side;
            allowed.push(!(in_x && in_y));
        }
    }
    RegionMask { width, height, allowed }
}

/// Sobel gradients scaled to intensity per pixel.
fn sobel(frame: &Frame) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = frame.dimensions();
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let p = |dx: isize, dy: isize| frame.get_clamped(x as isize + dx, y as isize + dy);
            let sx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let sy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            gx[y * w + x] = sx / 8.0;
            gy[y * w + x] = sy / 8.0;
        }
    }
    (gx, gy)
}

/// Gradient magnitude after non-maximum suppression; suppressed pixels are 0.
fn thin_magnitude(frame: &Frame) -> Vec<f64> {
    let (w, h) = frame.dimensions();
    let (gx, gy) = sobel(frame);
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).collect();
    let at = |x: isize, y: isize| -> f64 {
        if x < 0 || y < 0 || x >= w as isize || y >= h as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m == 0.0 {
                continue;
            }
            // quantize the gradient direction to one of four axes
            let angle = gy[i].atan2(gx[i]).rem_euclid(PI);
            let (dx, dy) = if !(PI / 8.0..7.0 * PI / 8.0).contains(&angle) {
                (1, 0)
            } else if angle < 3.0 * PI / 8.0 {
                (1, 1)
            } else if angle < 5.0 * PI / 8.0 {
                (0, 1)
            } else {
                (-1, 1)
            };
            let (xi, yi) = (x as isize, y as isize);
            let behind = at(xi - dx, yi - dy);
            let ahead = at(xi + dx, yi + dy);
            // plateau ties keep the pixel on the positive side only
            if m >= behind && m > ahead {
                out[i] = m;
            }
        }
    }
    out
}

/// Thin binary edges: Sobel magnitude, non-maximum suppression along the
/// gradient, then hysteresis with `(edge_low, edge_high)`.
pub fn detect_edges(frame: &Frame, p: &HoughParams) -> EdgeMap {
    let (w, h) = frame.dimensions();
    let thin = thin_magnitude(frame);
    let mut edges = vec![false; w * h];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, &m) in thin.iter().enumerate() {
        if m >= p.edge_high && m > 0.0 {
            edges[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !edges[j] && thin[j] >= p.edge_low && thin[j] > 0.0 {
                    edges[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    EdgeMap { width: w, height: h, edges }
}

/// Integer offsets whose distance lies within half a pixel of `r`.
pub fn ring_offsets(r: usize) -> Vec<(isize, isize)> {
    let r = r as isize;
    let (lo, hi) = ((2 * r - 1).pow(2), (2 * r + 1).pow(2));
    let mut out = Vec::new();
    for dy in -(r + 1)..=(r + 1) {
        for dx in -(r + 1)..=(r + 1) {
            let d4 = 4 * (dx * dx + dy * dy);
            if d4 >= lo && d4 <= hi {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// One vote plane per radius in `[r_min, r_max]`, indexed `[r - r_min][y·w + x]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    pub width: usize,
    pub height: usize,
    pub r_min: usize,
    pub planes: Vec<Vec<u32>>,
}

impl Accumulator {
    pub fn votes(&self, cx: usize, cy: usize, r: usize) -> u32 {
        self.planes[r - self.r_min][cy * self.width + cx]
    }
}

/// Every edge pixel votes for all centers at distance `r ± 0.5`.
pub fn accumulate(edges: &EdgeMap, r_min: usize, r_max: usize) -> Accumulator {
    let (w, h) = edges.dimensions();
    let points: Vec<(usize, usize)> = edges.points().collect();
    let planes = (r_min..=r_max)
        .into_par_iter()
        .map(|r| {
            let mut plane = vec![0u32; w * h];
            let ring = ring_offsets(r);
            for &(x, y) in &points {
                for &(dx, dy) in &ring {
                    let cx = x as isize + dx;
                    let cy = y as isize + dy;
                    if cx >= 0 && cy >= 0 && (cx as usize) < w && (cy as usize) < h {
                        plane[cy as usize * w + cx as usize] += 1;
                    }
                }
            }
            plane
        })
        .collect();
    Accumulator { width: w, height: h, r_min, planes }
}

/// Circle hits sorted by votes (descending), ties by `(cy, cx, r)`.
pub fn hough_circles(edges: &EdgeMap, p: &HoughParams, mask: &RegionMask) -> Vec<CircleHit> {
    let (w, h) = edges.dimensions();
    assert_eq!(mask.dimensions(), (w, h), "mask and edge map sizes differ");
    if edges.count() == 0 {
        return Vec::new();
    }
    let acc = accumulate(edges, p.r_min, p.r_max);
    let mut candidates = Vec::new();
    for (k, plane) in acc.planes.iter().enumerate() {
        let r = p.r_min + k;
        let threshold = p.vote_threshold.for_radius(r);
        for (i, &votes) in plane.iter().enumerate() {
            let (cx, cy) = (i % w, i / w);
            if votes >= threshold && mask.allows(cx, cy) {
                candidates.push(CircleHit { cx, cy, r, votes });
            }
        }
    }
    let order = |a: &CircleHit, b: &CircleHit| {
        b.votes.cmp(&a.votes).then((a.cy, a.cx, a.r).cmp(&(b.cy, b.cx, b.r)))
    };
    candidates.sort_by(order);
    let mut hits: Vec<CircleHit> = Vec::new();
    for c in candidates {
        let suppressed = hits.iter().any(|hit| {
            let d = (hit.cx as f64 - c.cx as f64).hypot(hit.cy as f64 - c.cy as f64);
            d <= p.nms_radius && hit.r.abs_diff(c.r) <= 1
        });
        if !suppressed {
            hits.push(c);
        }
    }
    hits
}

/// Two or more wheels mean a vehicle is present.
pub fn static_object_alert(hits: &[CircleHit]) -> bool {
    hits.len() >= 2
}

/// Marks the digital circle `|d − r| ≤ 0.5` around `(cx, cy)`.
pub fn draw_ring(edges: &mut EdgeMap, cx: isize, cy: isize, r: usize) {
    let (w, h) = edges.dimensions();
    for (dx, dy) in ring_offsets(r) {
        let (x, y) = (cx + dx, cy + dy);
        if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
            edges.set(x as usize, y as usize, true);
        }
    }
}
