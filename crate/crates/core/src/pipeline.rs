//! Per-frame orchestration of the flow, shape, stereo and TTC paths.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{classify, classify_all, sample_vectors, ClassifiedSample, FlowVectorSample, VectorClass};
use crate::config::{PipelineConfig, ShapeMode};
use crate::flow::{solve_horn_schunck, FlowError, FlowField};
use crate::frame::{DepthFrame, FrameSequence};
use crate::overlay::{emit_overlay, RgbImage};
use crate::shape::{default_region_mask, detect_edges, hough_circles, CircleHit};
use crate::stereo::{classify_alert, smooth_depth, AlertLevel, BandCounts};
use crate::track::{track_frame, Box, Gate, TrackState, Viewport};
use crate::ttc::analyze_samples;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("empty frame sequence")]
    EmptySequence,
    #[error("depth sequence has {depth} frames (size {depth_size:?}) but the video has {frames} (size {frame_size:?})")]
    DepthMisaligned { frames: usize, depth: usize, frame_size: (usize, usize), depth_size: (usize, usize) },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Serializes non-finite values as the string `"inf"`.
mod inf_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str("inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowVerdict {
    #[serde(rename = "box")]
    pub emitted: Option<Box>,
    pub rejected_by: Option<Gate>,
    #[serde(with = "inf_f64")]
    pub ratio: f64,
    pub object_count: usize,
    pub background_count: usize,
    pub stationary_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereoVerdict {
    pub level: AlertLevel,
    pub band_counts: BandCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtcVerdict {
    /// Frames; `"inf"` when nothing in view expands.
    #[serde(with = "inf_f64")]
    pub min_ttc: f64,
    pub heading: f64,
    pub foe: [f64; 2],
}

/// One processed frame. Absent paths are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub frame_index: usize,
    pub flow: Option<FlowVerdict>,
    pub circles: Option<Vec<CircleHit>>,
    pub stereo: Option<StereoVerdict>,
    pub ttc: Option<TtcVerdict>,
    pub alert: AlertLevel,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elapsed_ms: Option<f64>,
}

impl DetectionRecord {
    pub fn emitted_box(&self) -> Option<Box> {
        self.flow.as_ref().and_then(|f| f.emitted)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

/// Stereo level when stereo ran; otherwise red on a box or two circles.
pub fn fuse(
    flow: Option<&FlowVerdict>,
    circles: Option<&[CircleHit]>,
    stereo: Option<&StereoVerdict>,
) -> AlertLevel {
    if let Some(s) = stereo {
        return s.level;
    }
    let has_box = flow.is_some_and(|f| f.emitted.is_some());
    let wheels = circles.is_some_and(|c| c.len() >= 2);
    if has_box || wheels {
        AlertLevel::Red
    } else {
        AlertLevel::Green
    }
}

pub fn fuse_record(r: &DetectionRecord) -> AlertLevel {
    fuse(r.flow.as_ref(), r.circles.as_deref(), r.stereo.as_ref())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct AlertTotals {
    pub green: usize,
    pub yellow: usize,
    pub red: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub frames_total: usize,
    pub frames_processed: usize,
    pub frames_skipped: usize,
    pub boxes_emitted: usize,
    pub alerts: AlertTotals,
    pub elapsed_s: f64,
    /// Input frames covered per second of processing.
    pub throughput_fps: f64,
}

impl RunReport {
    pub fn from_records(records: &[DetectionRecord], frames_total: usize, elapsed_s: f64) -> Self {
        let mut alerts = AlertTotals::default();
        for r in records {
            match r.alert {
                AlertLevel::Green => alerts.green += 1,
                AlertLevel::Yellow => alerts.yellow += 1,
                AlertLevel::Red => alerts.red += 1,
            }
        }
        Self {
            frames_total,
            frames_processed: records.len(),
            frames_skipped: frames_total - records.len(),
            boxes_emitted: records.iter().filter(|r| r.emitted_box().is_some()).count(),
            alerts,
            elapsed_s,
            throughput_fps: if elapsed_s > 0.0 { frames_total as f64 / elapsed_s } else { f64::INFINITY },
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<DetectionRecord>,
    /// `(frame_index, image)` for every processed frame when overlays are on.
    pub overlays: Vec<(usize, RgbImage)>,
    pub report: RunReport,
}

impl RunOutput {
    pub fn json_lines(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&r.to_json());
            s.push('\n');
        }
        s
    }
}

/// Flow for frame `i` uses the pair `(i, i+1)`, or `(i-1, i)` at the end.
pub fn flow_pair(i: usize, len: usize) -> (usize, usize) {
    if i + 1 < len {
        (i, i + 1)
    } else {
        (i - 1, i)
    }
}

fn dense_samples_in(flow: &FlowField, region: Option<&Box>) -> Vec<FlowVectorSample> {
    let (w, h) = flow.dimensions();
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if region.is_none_or(|b| b.contains(x as f64, y as f64)) {
                let (u, v) = flow.at(x, y);
                out.push(FlowVectorSample::new(x as f64, y as f64, u, v));
            }
        }
    }
    out
}

pub fn run_detection(
    seq: &FrameSequence,
    depth: Option<&[DepthFrame]>,
    cfg: &PipelineConfig,
) -> Result<Vec<DetectionRecord>, PipelineError> {
    run(seq, depth, cfg).map(|o| o.records)
}

/// Processes frames `0, k, 2k, …` for `k = frame_skip` in order.
pub fn run(seq: &FrameSequence, depth: Option<&[DepthFrame]>, cfg: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    cfg.validate().map_err(PipelineError::Config)?;
    if seq.is_empty() {
        return Err(PipelineError::EmptySequence);
    }
    let depth = depth.filter(|d| !d.is_empty());
    if let Some(d) = depth {
        let depth_size = d[0].dimensions();
        if d.len() != seq.len() || depth_size != seq.dimensions() {
            return Err(PipelineError::DepthMisaligned {
                frames: seq.len(),
                depth: d.len(),
                frame_size: seq.dimensions(),
                depth_size,
            });
        }
    }
    let started = Instant::now();
    let (w, h) = seq.dimensions();
    let view = Viewport::new(w, h);
    let mask = default_region_mask(w, h, cfg.corner_fraction);
    let (classify_params, track_params) = cfg.sided();
    let frames = seq.frames();
    let mut state = TrackState::new();
    let mut records = Vec::new();
    let mut overlays = Vec::new();

    for i in (0..frames.len()).step_by(cfg.frame_skip) {
        let t0 = Instant::now();
        let flow_and_shape = || -> Result<_, PipelineError> {
            let mut flow_out = None;
            if cfg.flow_enabled {
                let (a, b) = flow_pair(i, frames.len());
                let flow = solve_horn_schunck(&frames[a], &frames[b], &cfg.solver)?;
                let samples = sample_vectors(&flow, classify_params.grid_stride)
                    .map_err(|e| PipelineError::Config(e.to_string()))?;
                let classified = classify_all(&samples, &classify_params);
                flow_out = Some((flow, classified));
            }
            Ok(flow_out)
        };
        let stereo_path = || {
            depth.filter(|_| cfg.stereo_enabled).map(|d| {
                let map = match cfg.depth_smoothing {
                    Some(s) => smooth_depth(&d[i], s),
                    None => d[i].clone(),
                };
                let (level, band_counts) = classify_alert(&map, &cfg.bands, &cfg.stereo);
                StereoVerdict { level, band_counts }
            })
        };
        let (flow_out, stereo) = rayon::join(flow_and_shape, stereo_path);
        let flow_out = flow_out?;

        let mut flow_verdict = None;
        let mut ttc = None;
        let mut classified: Vec<ClassifiedSample> = Vec::new();
        if let Some((flow, samples)) = &flow_out {
            let (next, outcome) = track_frame(&state, samples, i, &view, &track_params);
            state = next;
            flow_verdict = Some(FlowVerdict {
                emitted: outcome.emitted,
                rejected_by: outcome.rejected_by,
                ratio: outcome.ratio,
                object_count: outcome.counts.object,
                background_count: outcome.counts.background,
                stationary_count: outcome.counts.stationary,
            });
            if cfg.ttc_enabled {
                // inside a box only the object's own vectors place the FOE
                let region = outcome.emitted;
                let mut dense = dense_samples_in(flow, region.as_ref());
                if region.is_some() {
                    dense.retain(|s| classify(s, &classify_params) == VectorClass::Object);
                }
                if let Ok((foe, profile, heading)) = analyze_samples(&dense, w, &cfg.ttc) {
                    ttc = Some(TtcVerdict { min_ttc: profile.min(), heading: heading.angle, foe: [foe.x, foe.y] });
                }
            }
            classified = samples.clone();
        }

        let run_shape = match cfg.shape_mode {
            ShapeMode::Off => false,
            ShapeMode::Always => true,
            ShapeMode::FallbackOnly => flow_verdict.as_ref().is_none_or(|f| f.emitted.is_none()),
        };
        let circles = run_shape.then(|| hough_circles(&detect_edges(&frames[i], &cfg.hough), &cfg.hough, &mask));

        let alert = fuse(flow_verdict.as_ref(), circles.as_deref(), stereo.as_ref());
        let record = DetectionRecord {
            frame_index: i,
            flow: flow_verdict,
            circles,
            stereo,
            ttc,
            alert,
            elapsed_ms: (!cfg.canonical_log).then(|| t0.elapsed().as_secs_f64() * 1e3),
        };
        if cfg.overlay {
            overlays.push((i, emit_overlay(&frames[i], &record, &classified, cfg.overlay_pure)));
        }
        records.push(record);
    }
    let report = RunReport::from_records(&records, frames.len(), started.elapsed().as_secs_f64());
    Ok(RunOutput { records, overlays, report })
}
