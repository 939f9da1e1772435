//! Color annotation images written as binary PPM.

use crate::classify::{ClassifiedSample, VectorClass};
use crate::frame::Frame;
use crate::pipeline::DetectionRecord;
use crate::stereo::AlertLevel;

pub type Rgb = [u8; 3];

pub const OBJECT_COLOR: Rgb = [0, 255, 0];
pub const BACKGROUND_COLOR: Rgb = [255, 0, 0];
pub const BOX_COLOR: Rgb = [0, 96, 255];
pub const CIRCLE_COLOR: Rgb = [255, 0, 255];
pub const RED_BADGE: Rgb = [255, 32, 32];
pub const YELLOW_BADGE: Rgb = [255, 220, 0];

/// Arrow length per pixel of flow.
pub const ARROW_SCALE: f64 = 3.0;
pub const BADGE_SIZE: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height, pixels: vec![[0, 0, 0]; width * height] }
    }

    pub fn from_gray(frame: &Frame) -> Self {
        let (width, height) = frame.dimensions();
        let pixels = frame
            .data()
            .iter()
            .map(|&v| {
                let g = (v * 255.0).round() as u8;
                [g, g, g]
            })
            .collect();
        Self { width, height, pixels }
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn put(&mut self, x: isize, y: isize, c: Rgb) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.pixels[y as usize * self.width + x as usize] = c;
        }
    }

    pub fn line(&mut self, x0: isize, y0: isize, x1: isize, y1: isize, c: Rgb) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            self.put(x, y, c);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    pub fn rect_outline(&mut self, x0: isize, y0: isize, x1: isize, y1: isize, c: Rgb) {
        self.line(x0, y0, x1, y0, c);
        self.line(x1, y0, x1, y1, c);
        self.line(x1, y1, x0, y1, c);
        self.line(x0, y1, x0, y0, c);
    }

    pub fn circle(&mut self, cx: isize, cy: isize, r: usize, c: Rgb) {
        for (dx, dy) in crate::shape::ring_offsets(r) {
            self.put(cx + dx, cy + dy, c);
        }
    }

    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        for p in &self.pixels {
            out.extend_from_slice(p);
        }
        out
    }
}

/// Draws flow arrows (object and background only), the emitted box,
/// circle hits and, for red or yellow alerts, a badge in the top-right
/// corner. `pure` draws on black instead of the frame.
pub fn emit_overlay(frame: &Frame, record: &DetectionRecord, samples: &[ClassifiedSample], pure: bool) -> RgbImage {
    let mut img = if pure {
        let (w, h) = frame.dimensions();
        RgbImage::new(w, h)
    } else {
        RgbImage::from_gray(frame)
    };
    for s in samples {
        let color = match s.class {
            VectorClass::Object => OBJECT_COLOR,
            VectorClass::Background => BACKGROUND_COLOR,
            VectorClass::Stationary => continue,
        };
        let p = &s.sample;
        let (x0, y0) = (p.x.round() as isize, p.y.round() as isize);
        let x1 = (p.x + ARROW_SCALE * p.u).round() as isize;
        let y1 = (p.y + ARROW_SCALE * p.v).round() as isize;
        img.line(x0, y0, x1, y1, color);
    }
    if let Some(b) = record.emitted_box() {
        img.rect_outline(
            b.x_min().round() as isize,
            b.y_min().round() as isize,
            b.x_max().round() as isize,
            b.y_max().round() as isize,
            BOX_COLOR,
        );
    }
    for c in record.circles.iter().flatten() {
        img.circle(c.cx as isize, c.cy as isize, c.r, CIRCLE_COLOR);
    }
    let badge = match record.alert {
        AlertLevel::Red => Some(RED_BADGE),
        AlertLevel::Yellow => Some(YELLOW_BADGE),
        AlertLevel::Green => None,
    };
    if let Some(color) = badge {
        let (w, _) = img.dimensions();
        for y in 0..BADGE_SIZE.min(img.height) {
            for x in w.saturating_sub(BADGE_SIZE)..w {
                img.put(x as isize, y as isize, color);
            }
        }
    }
    img
}
