//! Grayscale frames, depth frames and numbered frame sequences stored as
//! binary PGM (P5).
//!
//! Frames hold intensities in `[0, 1]`; depth frames hold a distance proxy
//! in `[0, 1]` where `1.0` is farthest from the lens. 8-bit P5 is used for
//! frames and 16-bit P5 for depth, both normalized by the header `maxval`.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Seconds per frame when a sequence does not state its rate.
pub const DEFAULT_FRAME_PERIOD: f64 = 1.0 / 30.0;

const FRAME_PREFIX: &str = "frame_";
const DEPTH_PREFIX: &str = "depth_";

#[derive(Debug, Error, PartialEq)]
pub enum PgmError {
    #[error("bad magic number: expected P5")]
    BadMagic,
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("invalid dimensions {width}x{height}: both must be at least 2")]
    BadDimensions { width: usize, height: usize },
    #[error("invalid maxval {0}: must be in 1..=65535")]
    BadMaxval(u32),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("sample {value} at index {index} exceeds maxval {maxval}")]
    ValueOutOfRange { index: usize, value: u32, maxval: u32 },
}

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("{len} values given for a {width}x{height} grid")]
    SizeMismatch { width: usize, height: usize, len: usize },
    #[error("invalid dimensions {width}x{height}: both must be at least 2")]
    BadDimensions { width: usize, height: usize },
    #[error("value {value} at index {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("frame period must be positive and finite, got {0}")]
    BadPeriod(f64),
    #[error("frame {index} is {width}x{height}, expected {expected_width}x{expected_height}")]
    DimensionMismatch {
        index: usize,
        width: usize,
        height: usize,
        expected_width: usize,
        expected_height: usize,
    },
    #[error("a sequence needs at least 2 frames, found {0}")]
    TooFewFrames(usize),
    #[error("gap in frame numbering: expected index {expected}, found {found}")]
    NumberingGap { expected: u64, found: u64 },
    #[error("{path}: {source}")]
    Pgm { path: PathBuf, source: PgmError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn check_grid(width: usize, height: usize, values: &[f64]) -> Result<(), FrameError> {
    if width < 2 || height < 2 {
        return Err(FrameError::BadDimensions { width, height });
    }
    if values.len() != width * height {
        return Err(FrameError::SizeMismatch { width, height, len: values.len() });
    }
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(FrameError::OutOfRange { index, value });
    }
    Ok(())
}

/// A grayscale intensity image, row-major, intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Frame {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, FrameError> {
        check_grid(width, height, &data)?;
        Ok(Self { width, height, data })
    }

    /// Builds a frame by evaluating `f(x, y)` at every pixel; results are
    /// clamped to `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width >= 2 && height >= 2, "frame must be at least 2x2");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self { width, height, data }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with coordinates clamped to the border (replicated edges).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    /// Rounds every intensity to the nearest multiple of `1 / maxval`.
    pub fn quantized(&self, maxval: u32) -> Self {
        let m = maxval as f64;
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| (v * m).round() / m).collect(),
        }
    }
}

/// A distance-proxy image: `0.0` touches the lens, `1.0` is farthest.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthFrame {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl DepthFrame {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, FrameError> {
        check_grid(width, height, &data)?;
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width >= 2 && height >= 2, "depth frame must be at least 2x2");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self { width, height, data }
    }

    /// A depth frame where every pixel is background (farthest).
    pub fn far(width: usize, height: usize) -> Self {
        Self::from_fn(width, height, |_, _| 1.0)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }
}

impl From<Frame> for DepthFrame {
    fn from(f: Frame) -> Self {
        Self { width: f.width, height: f.height, data: f.data }
    }
}

impl From<DepthFrame> for Frame {
    fn from(d: DepthFrame) -> Self {
        Self { width: d.width, height: d.height, data: d.data }
    }
}

/// An ordered run of equally sized frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    frames: Vec<Frame>,
    frame_period: f64,
}

impl FrameSequence {
    pub fn new(frames: Vec<Frame>, frame_period: f64) -> Result<Self, FrameError> {
        if !(frame_period > 0.0 && frame_period.is_finite()) {
            return Err(FrameError::BadPeriod(frame_period));
        }
        if frames.len() < 2 {
            return Err(FrameError::TooFewFrames(frames.len()));
        }
        let (w, h) = frames[0].dimensions();
        for (index, f) in frames.iter().enumerate() {
            if f.dimensions() != (w, h) {
                return Err(FrameError::DimensionMismatch {
                    index,
                    width: f.width(),
                    height: f.height(),
                    expected_width: w,
                    expected_height: h,
                });
            }
        }
        Ok(Self { frames, frame_period })
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_period(&self) -> f64 {
        self.frame_period
    }

    pub fn dimensions(&self) -> (usize, usize) {
        self.frames[0].dimensions()
    }

    pub fn into_frames(self) -> Vec<Frame> {
        self.frames
    }
}

struct Header {
    width: usize,
    height: usize,
    maxval: u32,
    payload_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, PgmError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(PgmError::BadMagic);
    }
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for (i, field) in fields.iter_mut().enumerate() {
        // whitespace and comments before each field
        let mut saw_space = false;
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => {
                    saw_space = true;
                    pos += 1;
                }
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                    saw_space = true;
                }
                _ => break,
            }
        }
        if !saw_space {
            return Err(PgmError::BadHeader(format!("missing whitespace before field {}", i + 1)));
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(PgmError::BadHeader(format!("field {} is not a number", i + 1)));
        }
        let text = std::str::from_utf8(&bytes[start..pos]).expect("ascii digits");
        *field = text
            .parse()
            .map_err(|_| PgmError::BadHeader(format!("field {} overflows", i + 1)))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(PgmError::BadHeader("missing whitespace after maxval".into())),
    }
    let [w, h, maxval] = fields;
    if w < 2 || h < 2 || w > u32::MAX as u64 || h > u32::MAX as u64 {
        return Err(PgmError::BadDimensions {
            width: w.min(usize::MAX as u64) as usize,
            height: h.min(usize::MAX as u64) as usize,
        });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(PgmError::BadMaxval(maxval.min(u32::MAX as u64) as u32));
    }
    Ok(Header { width: w as usize, height: h as usize, maxval: maxval as u32, payload_start: pos })
}

fn decode(bytes: &[u8]) -> Result<(usize, usize, Vec<f64>), PgmError> {
    let header = parse_header(bytes)?;
    let count = header.width * header.height;
    let bytes_per_sample = if header.maxval < 256 { 1 } else { 2 };
    let payload = &bytes[header.payload_start..];
    let expected = count * bytes_per_sample;
    if payload.len() < expected {
        return Err(PgmError::Truncated { expected, found: payload.len() });
    }
    let maxval = header.maxval;
    let m = maxval as f64;
    let mut data = Vec::with_capacity(count);
    for index in 0..count {
        let value = if bytes_per_sample == 1 {
            payload[index] as u32
        } else {
            u16::from_be_bytes([payload[2 * index], payload[2 * index + 1]]) as u32
        };
        if value > maxval {
            return Err(PgmError::ValueOutOfRange { index, value, maxval });
        }
        data.push(value as f64 / m);
    }
    Ok((header.width, header.height, data))
}

fn encode(width: usize, height: usize, data: &[f64], maxval: u32) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    let m = maxval as f64;
    if maxval < 256 {
        out.extend(data.iter().map(|v| (v * m).round() as u8));
    } else {
        for v in data {
            out.extend_from_slice(&((v * m).round() as u16).to_be_bytes());
        }
    }
    out
}

/// Parses a binary PGM into a frame, normalizing by the header maxval.
pub fn load_pgm(bytes: &[u8]) -> Result<Frame, PgmError> {
    let (width, height, data) = decode(bytes)?;
    Ok(Frame { width, height, data })
}

/// Encodes a frame as 8-bit binary PGM.
pub fn save_pgm(frame: &Frame) -> Vec<u8> {
    encode(frame.width, frame.height, &frame.data, 255)
}

pub fn load_depth_pgm(bytes: &[u8]) -> Result<DepthFrame, PgmError> {
    let (width, height, data) = decode(bytes)?;
    Ok(DepthFrame { width, height, data })
}

/// Encodes a depth frame as 16-bit binary PGM, `round(proxy * 65535)`.
pub fn save_depth_pgm(depth: &DepthFrame) -> Vec<u8> {
    encode(depth.width, depth.height, &depth.data, 65535)
}

/// File name for frame `index` of a numbered sequence.
pub fn frame_file_name(index: usize) -> String {
    format!("{FRAME_PREFIX}{index:06}.pgm")
}

pub fn depth_file_name(index: usize) -> String {
    format!("{DEPTH_PREFIX}{index:06}.pgm")
}

fn numbered_files(dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, FrameError> {
    let io = |source| FrameError::Io { path: dir.to_path_buf(), source };
    let mut found = Vec::new();
    for entry in fs::read_dir(dir).map_err(io)? {
        let entry = entry.map_err(io)?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let Some(digits) = name.strip_prefix(prefix).and_then(|s| s.strip_suffix(".pgm")) else {
            continue;
        };
        if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            continue;
        }
        found.push((digits.parse::<u64>().expect("six digits"), entry.path()));
    }
    found.sort();
    if let Some(&(first, _)) = found.first() {
        for (offset, (index, _)) in found.iter().enumerate() {
            let expected = first + offset as u64;
            if *index != expected {
                return Err(FrameError::NumberingGap { expected, found: *index });
            }
        }
    }
    Ok(found.into_iter().map(|(_, p)| p).collect())
}

fn read_file(path: &Path) -> Result<Vec<u8>, FrameError> {
    fs::read(path).map_err(|source| FrameError::Io { path: path.to_path_buf(), source })
}

/// Loads `frame_NNNNNN.pgm` files from `dir` in index order.
pub fn load_sequence(dir: &Path, frame_period: f64) -> Result<FrameSequence, FrameError> {
    let paths = numbered_files(dir, FRAME_PREFIX)?;
    if paths.len() < 2 {
        return Err(FrameError::TooFewFrames(paths.len()));
    }
    let frames = paths
        .iter()
        .map(|p| {
            load_pgm(&read_file(p)?).map_err(|source| FrameError::Pgm { path: p.clone(), source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    FrameSequence::new(frames, frame_period)
}

/// Loads `depth_NNNNNN.pgm` files from `dir`. Returns an empty list when
/// the directory holds no depth frames.
pub fn load_depth_sequence(dir: &Path) -> Result<Vec<DepthFrame>, FrameError> {
    let paths = numbered_files(dir, DEPTH_PREFIX)?;
    let frames = paths
        .iter()
        .map(|p| {
            load_depth_pgm(&read_file(p)?)
                .map_err(|source| FrameError::Pgm { path: p.clone(), source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(first) = frames.first() {
        let (w, h) = first.dimensions();
        for (index, f) in frames.iter().enumerate() {
            if f.dimensions() != (w, h) {
                return Err(FrameError::DimensionMismatch {
                    index,
                    width: f.width(),
                    height: f.height(),
                    expected_width: w,
                    expected_height: h,
                });
            }
        }
    }
    Ok(frames)
}

/// Writes every frame as `frame_NNNNNN.pgm`, numbered from zero.
pub fn save_sequence(dir: &Path, frames: &[Frame]) -> Result<(), FrameError> {
    fs::create_dir_all(dir).map_err(|source| FrameError::Io { path: dir.to_path_buf(), source })?;
    for (i, f) in frames.iter().enumerate() {
        let path = dir.join(frame_file_name(i));
        fs::write(&path, save_pgm(f)).map_err(|source| FrameError::Io { path, source })?;
    }
    Ok(())
}

pub fn save_depth_sequence(dir: &Path, frames: &[DepthFrame]) -> Result<(), FrameError> {
    fs::create_dir_all(dir).map_err(|source| FrameError::Io { path: dir.to_path_buf(), source })?;
    for (i, f) in frames.iter().enumerate() {
        let path = dir.join(depth_file_name(i));
        fs::write(&path, save_depth_pgm(f)).map_err(|source| FrameError::Io { path, source })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_normalized_intensities() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0, 128, 255, 64]);
        let f = load_pgm(&bytes).unwrap();
        assert_eq!(f.dimensions(), (2, 2));
        assert_eq!(f.data(), &[0.0, 128.0 / 255.0, 1.0, 64.0 / 255.0]);
    }

    #[test]
    fn normalizes_by_header_maxval() {
        let mut bytes = b"P5 2 2 100\n".to_vec();
        bytes.extend([0, 50, 100, 25]);
        let f = load_pgm(&bytes).unwrap();
        assert_eq!(f.data(), &[0.0, 0.5, 1.0, 0.25]);
    }

    #[test]
    fn rejects_wrong_magic() {
        let mut bytes = b"P6\n2 2\n255\n".to_vec();
        bytes.extend([0; 12]);
        assert_eq!(load_pgm(&bytes), Err(PgmError::BadMagic));
        assert_eq!(load_pgm(b""), Err(PgmError::BadMagic));
    }

    #[test]
    fn rejects_degenerate_dimensions() {
        let mut bytes = b"P5\n1 4\n255\n".to_vec();
        bytes.extend([0; 4]);
        assert!(matches!(load_pgm(&bytes), Err(PgmError::BadDimensions { width: 1, height: 4 })));
    }

    #[test]
    fn rejects_truncated_payload() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0, 1, 2]);
        assert_eq!(load_pgm(&bytes), Err(PgmError::Truncated { expected: 4, found: 3 }));
    }

    #[test]
    fn rejects_values_above_maxval() {
        let mut bytes = b"P5\n2 2\n100\n".to_vec();
        bytes.extend([0, 101, 0, 0]);
        assert_eq!(
            load_pgm(&bytes),
            Err(PgmError::ValueOutOfRange { index: 1, value: 101, maxval: 100 })
        );
    }

    #[test]
    fn skips_header_comments() {
        let mut bytes = b"P5\n# made by hand\n2 2\n255\n".to_vec();
        bytes.extend([255; 4]);
        assert_eq!(load_pgm(&bytes).unwrap().data(), &[1.0; 4]);
    }

    #[test]
    fn saves_exact_header_and_payload() {
        let zero = Frame::filled(2, 2, 0.0);
        let mut expected = b"P5\n2 2\n255\n".to_vec();
        expected.extend([0; 4]);
        assert_eq!(save_pgm(&zero), expected);

        let one = Frame::filled(3, 2, 1.0);
        let bytes = save_pgm(&one);
        assert!(bytes.ends_with(&[255; 6]));
    }

    #[test]
    fn depth_uses_sixteen_bits() {
        let d = DepthFrame::from_fn(2, 2, |x, _| if x == 0 { 1.0 } else { 0.5 });
        let bytes = save_depth_pgm(&d);
        assert!(bytes.starts_with(b"P5\n2 2\n65535\n"));
        assert_eq!(bytes.len(), 13 + 8);
        let back = load_depth_pgm(&bytes).unwrap();
        for (a, b) in back.data().iter().zip(d.data()) {
            assert!((a - b).abs() <= 0.5 / 65535.0);
        }
    }

    #[test]
    fn frame_rejects_out_of_range_values() {
        assert!(matches!(
            Frame::new(2, 2, vec![0.0, 1.5, 0.0, 0.0]),
            Err(FrameError::OutOfRange { index: 1, .. })
        ));
        assert!(matches!(Frame::new(2, 2, vec![0.0; 3]), Err(FrameError::SizeMismatch { .. })));
    }

    #[test]
    fn sequence_enforces_uniform_dimensions() {
        let a = Frame::filled(4, 4, 0.0);
        let b = Frame::filled(4, 3, 0.0);
        assert!(matches!(
            FrameSequence::new(vec![a.clone(), b], DEFAULT_FRAME_PERIOD),
            Err(FrameError::DimensionMismatch { index: 1, .. })
        ));
        assert!(matches!(
            FrameSequence::new(vec![a], DEFAULT_FRAME_PERIOD),
            Err(FrameError::TooFewFrames(1))
        ));
    }

    #[test]
    fn sequence_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let frames: Vec<_> =
            (0..3).map(|i| Frame::from_fn(64, 64, |x, y| ((x + y + i) % 7) as f64 / 6.0)).collect();
        save_sequence(dir.path(), &frames).unwrap();
        let seq = load_sequence(dir.path(), DEFAULT_FRAME_PERIOD).unwrap();
        assert_eq!(seq.len(), 3);
        for (a, b) in seq.frames().iter().zip(&frames) {
            assert_eq!(a, &b.quantized(255));
        }
    }

    #[test]
    fn sequence_rejects_mismatched_sizes() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(frame_file_name(0)), save_pgm(&Frame::filled(64, 64, 0.2))).unwrap();
        fs::write(dir.path().join(frame_file_name(1)), save_pgm(&Frame::filled(32, 32, 0.2))).unwrap();
        assert!(matches!(
            load_sequence(dir.path(), DEFAULT_FRAME_PERIOD),
            Err(FrameError::DimensionMismatch { index: 1, .. })
        ));
    }

    #[test]
    fn sequence_rejects_single_file_and_gaps() {
        let dir = tempfile::tempdir().unwrap();
        let f = save_pgm(&Frame::filled(8, 8, 0.5));
        fs::write(dir.path().join(frame_file_name(1)), &f).unwrap();
        assert!(matches!(
            load_sequence(dir.path(), DEFAULT_FRAME_PERIOD),
            Err(FrameError::TooFewFrames(1))
        ));
        fs::write(dir.path().join(frame_file_name(3)), &f).unwrap();
        assert!(matches!(
            load_sequence(dir.path(), DEFAULT_FRAME_PERIOD),
            Err(FrameError::NumberingGap { expected: 2, found: 3 })
        ));
    }
}
