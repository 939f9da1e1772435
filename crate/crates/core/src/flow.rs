//! Dense Horn-Schunck optical flow.
//!
//! The solver minimizes the discrete form of
//! `E = Σ (Ix·u + Iy·v + It)² + α²(|∇u|² + |∇v|²)` with the classic
//! synchronous update
//!
//! ```text
//! u ← ū − Ix (Ix ū + Iy v̄ + It) / (α² + Ix² + Iy²)
//! v ← v̄ − Iy (Ix ū + Iy v̄ + It) / (α² + Ix² + Iy²)
//! ```
//!
//! where `ū`, `v̄` are weighted neighborhood means (1/6 axial, 1/12
//! diagonal). Every pixel is updated from the previous iterate, so the
//! result does not depend on traversal order or thread count. All stencils
//! replicate edge pixels.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::Frame;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("invalid solver parameters: {0}")]
    BadParams(String),
    #[error("non-finite value in flow update at iteration {0}")]
    NonFinite(usize),
    #[error("malformed flow dump: {0}")]
    BadDump(String),
}

/// Per-pixel displacement field in pixels per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self { width, height, u: vec![0.0; width * height], v: vec![0.0; width * height] }
    }

    pub fn new(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self, FlowError> {
        if u.len() != width * height || v.len() != width * height {
            return Err(FlowError::DimensionMismatch((width, height), (u.len(), v.len())));
        }
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(FlowError::NonFinite(0));
        }
        Ok(Self { width, height, u, v })
    }

    /// Builds a field from an analytic `(x, y) -> (u, v)` function.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> (f64, f64)) -> Self {
        let mut u = Vec::with_capacity(width * height);
        let mut v = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let (a, b) = f(x, y);
                u.push(a);
                v.push(b);
            }
        }
        Self { width, height, u, v }
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

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }

    pub fn is_zero(&self) -> bool {
        self.u.iter().chain(&self.v).all(|&x| x == 0.0)
    }

    /// Mean `(u, v)` over pixels at least `margin` away from every border.
    pub fn interior_mean(&self, margin: usize) -> (f64, f64) {
        let (mut su, mut sv, mut n) = (0.0, 0.0, 0usize);
        for y in margin..self.height.saturating_sub(margin) {
            for x in margin..self.width.saturating_sub(margin) {
                let (a, b) = self.at(x, y);
                su += a;
                sv += b;
                n += 1;
            }
        }
        if n == 0 {
            (0.0, 0.0)
        } else {
            (su / n as f64, sv / n as f64)
        }
    }

    /// Debug dump: `u32` width, `u32` height, then the `u` grid and the `v`
    /// grid as row-major little-endian `f32`.
    pub fn to_dump(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.u.len());
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        for x in self.u.iter().chain(&self.v) {
            out.extend_from_slice(&(*x as f32).to_le_bytes());
        }
        out
    }

    pub fn from_dump(bytes: &[u8]) -> Result<Self, FlowError> {
        if bytes.len() < 8 {
            return Err(FlowError::BadDump("missing header".into()));
        }
        let width = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let n = width * height;
        if bytes.len() != 8 + 8 * n {
            return Err(FlowError::BadDump(format!(
                "expected {} payload bytes, found {}",
                8 * n,
                bytes.len() - 8
            )));
        }
        let mut values = bytes[8..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64);
        let u: Vec<f64> = values.by_ref().take(n).collect();
        let v: Vec<f64> = values.collect();
        Self::new(width, height, u, v)
    }
}

/// Spatio-temporal intensity derivatives on the Horn-Schunck 2×2×2 cube.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivatives {
    pub width: usize,
    pub height: usize,
    pub ix: Vec<f64>,
    pub iy: Vec<f64>,
    pub it: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Smoothness weight.
    pub alpha: f64,
    pub max_iters: usize,
    /// Stop once the mean per-pixel update magnitude falls below this.
    pub epsilon: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { alpha: 1.0, max_iters: 100, epsilon: 1e-4 }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), FlowError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(FlowError::BadParams(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if self.max_iters < 1 {
            return Err(FlowError::BadParams("max_iters must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(FlowError::BadParams(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Solver output with convergence bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    pub flow: FlowField,
    pub iterations: usize,
    /// Mean per-pixel update magnitude of the last iteration.
    pub last_update: f64,
}

fn check_same(f1: &Frame, f2: &Frame) -> Result<(), FlowError> {
    if f1.dimensions() != f2.dimensions() {
        return Err(FlowError::DimensionMismatch(f1.dimensions(), f2.dimensions()));
    }
    Ok(())
}

pub fn estimate_derivatives(f1: &Frame, f2: &Frame) -> Result<Derivatives, FlowError> {
    check_same(f1, f2)?;
    let (w, h) = f1.dimensions();
    let n = w * h;
    let (mut ix, mut iy, mut it) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for y in 0..h {
        let y0 = y as isize;
        let y1 = y0 + 1;
        for x in 0..w {
            let x0 = x as isize;
            let x1 = x0 + 1;
            let a = |f: &Frame, dx: isize, dy: isize| f.get_clamped(dx, dy);
            let (p00, p10, p01, p11) = (a(f1, x0, y0), a(f1, x1, y0), a(f1, x0, y1), a(f1, x1, y1));
            let (q00, q10, q01, q11) = (a(f2, x0, y0), a(f2, x1, y0), a(f2, x0, y1), a(f2, x1, y1));
            ix.push(0.25 * ((p10 - p00) + (p11 - p01) + (q10 - q00) + (q11 - q01)));
            iy.push(0.25 * ((p01 - p00) + (p11 - p10) + (q01 - q00) + (q11 - q10)));
            it.push(0.25 * ((q00 - p00) + (q10 - p10) + (q01 - p01) + (q11 - p11)));
        }
    }
    Ok(Derivatives { width: w, height: h, ix, iy, it })
}

/// Weighted 3×3 neighborhood mean of row `y` with replicated edges.
#[inline]
fn three_rows(g: &[f64], w: usize, a: usize, b: usize, c: usize) -> (&[f64], &[f64], &[f64]) {
    (&g[a * w..(a + 1) * w], &g[b * w..(b + 1) * w], &g[c * w..(c + 1) * w])
}

pub fn solve_horn_schunck(f1: &Frame, f2: &Frame, params: &SolverParams) -> Result<FlowField, FlowError> {
    solve_horn_schunck_detailed(f1, f2, params).map(|s| s.flow)
}

pub fn solve_horn_schunck_detailed(
    f1: &Frame,
    f2: &Frame,
    params: &SolverParams,
) -> Result<FlowSolution, FlowError> {
    params.validate()?;
    let d = estimate_derivatives(f1, f2)?;
    solve_from_derivatives(&d, params)
}

/// Runs the synchronous iteration on precomputed derivatives.
pub fn solve_from_derivatives(d: &Derivatives, params: &SolverParams) -> Result<FlowSolution, FlowError> {
    params.validate()?;
    let (w, h) = (d.width, d.height);
    let n = w * h;
    let alpha2 = params.alpha * params.alpha;
    let denom: Vec<f64> = (0..n).map(|i| alpha2 + d.ix[i] * d.ix[i] + d.iy[i] * d.iy[i]).collect();

    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut u_next = vec![0.0; n];
    let mut v_next = vec![0.0; n];
    let mut row_updates = vec![0.0; h];
    let mut iterations = 0;
    let mut last_update = 0.0;

    // it == 0 everywhere makes the zero field a fixed point; skip the work.
    if d.it.iter().all(|&t| t == 0.0) {
        return Ok(FlowSolution { flow: FlowField::zeros(w, h), iterations: 0, last_update: 0.0 });
    }

    for iter in 1..=params.max_iters {
        let (u_prev, v_prev) = (&u, &v);
        u_next
            .par_chunks_mut(w)
            .zip(v_next.par_chunks_mut(w))
            .zip(row_updates.par_iter_mut())
            .enumerate()
            .for_each(|(y, ((urow, vrow), upd))| {
                let (yu, yd) = (y.saturating_sub(1), (y + 1).min(h - 1));
                let (uu, um, ud) = three_rows(u_prev, w, yu, y, yd);
                let (vu, vm, vd) = three_rows(v_prev, w, yu, y, yd);
                let base = y * w;
                let (ix, iy, it, den) =
                    (&d.ix[base..base + w], &d.iy[base..base + w], &d.it[base..base + w], &denom[base..base + w]);
                let mut acc = 0.0;
                for x in 0..w {
                    let (xl, xr) = (x.saturating_sub(1), (x + 1).min(w - 1));
                    let ub = (um[xl] + um[xr] + uu[x] + ud[x]) / 6.0 + (uu[xl] + uu[xr] + ud[xl] + ud[xr]) / 12.0;
                    let vb = (vm[xl] + vm[xr] + vu[x] + vd[x]) / 6.0 + (vu[xl] + vu[xr] + vd[xl] + vd[xr]) / 12.0;
                    let t = (ix[x] * ub + iy[x] * vb + it[x]) / den[x];
                    let nu = ub - ix[x] * t;
                    let nv = vb - iy[x] * t;
                    let du = nu - um[x];
                    let dv = nv - vm[x];
                    acc += (du * du + dv * dv).sqrt();
                    urow[x] = nu;
                    vrow[x] = nv;
                }
                *upd = acc;
            });
        std::mem::swap(&mut u, &mut u_next);
        std::mem::swap(&mut v, &mut v_next);
        // sequential sum keeps the stopping decision bit-reproducible
        let total: f64 = row_updates.iter().sum();
        if !total.is_finite() {
            return Err(FlowError::NonFinite(iter));
        }
        iterations = iter;
        last_update = total / n as f64;
        if last_update < params.epsilon {
            break;
        }
    }
    Ok(FlowSolution { flow: FlowField { width: w, height: h, u, v }, iterations, last_update })
}

/// Discrete energy of `flow` under derivatives `d`; gradients of `u`, `v`
/// by forward differences with replicated edges.
pub fn flow_energy(flow: &FlowField, d: &Derivatives, alpha: f64) -> Result<f64, FlowError> {
    if flow.dimensions() != (d.width, d.height) {
        return Err(FlowError::DimensionMismatch(flow.dimensions(), (d.width, d.height)));
    }
    let (w, h) = flow.dimensions();
    let alpha2 = alpha * alpha;
    let mut energy = 0.0;
    for y in 0..h {
        let yd = (y + 1).min(h - 1);
        for x in 0..w {
            let xr = (x + 1).min(w - 1);
            let i = y * w + x;
            let data = d.ix[i] * flow.u[i] + d.iy[i] * flow.v[i] + d.it[i];
            let ux = flow.u[y * w + xr] - flow.u[i];
            let uy = flow.u[yd * w + x] - flow.u[i];
            let vx = flow.v[y * w + xr] - flow.v[i];
            let vy = flow.v[yd * w + x] - flow.v[i];
            energy += data * data + alpha2 * (ux * ux + uy * uy + vx * vx + vy * vy);
        }
    }
    Ok(energy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> Frame {
        Frame::from_fn(w, h, |x, _| x as f64 / w as f64)
    }

    #[test]
    fn constant_pair_has_zero_derivatives() {
        let f = Frame::filled(8, 6, 0.4);
        let d = estimate_derivatives(&f, &f).unwrap();
        assert!(d.ix.iter().chain(&d.iy).chain(&d.it).all(|&v| v == 0.0));
    }

    #[test]
    fn ramp_gradient_in_interior() {
        let f = ramp(16, 8);
        let d = estimate_derivatives(&f, &f).unwrap();
        for y in 0..8 {
            for x in 0..15 {
                let i = y * 16 + x;
                assert!((d.ix[i] - 1.0 / 16.0).abs() < 1e-12);
                assert_eq!(d.iy[i], 0.0);
                assert_eq!(d.it[i], 0.0);
            }
        }
    }

    #[test]
    fn constant_offset_only_changes_it() {
        let f1 = Frame::from_fn(12, 10, |x, y| 0.3 + 0.02 * x as f64 + 0.01 * y as f64);
        let f2 = Frame::from_fn(12, 10, |x, y| 0.4 + 0.02 * x as f64 + 0.01 * y as f64);
        let d = estimate_derivatives(&f1, &f2).unwrap();
        let d1 = estimate_derivatives(&f1, &f1).unwrap();
        for i in 0..d.it.len() {
            assert!((d.it[i] - 0.1).abs() < 1e-12);
            assert!((d.ix[i] - d1.ix[i]).abs() < 1e-12);
            assert!((d.iy[i] - d1.iy[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn derivatives_reject_mismatched_frames() {
        let a = Frame::filled(4, 4, 0.0);
        let b = Frame::filled(5, 4, 0.0);
        assert!(matches!(estimate_derivatives(&a, &b), Err(FlowError::DimensionMismatch(..))));
        assert!(solve_horn_schunck(&a, &b, &SolverParams::default()).is_err());
    }

    #[test]
    fn identical_frames_give_zero_flow() {
        let f = Frame::from_fn(20, 20, |x, y| ((x * 7 + y * 3) % 11) as f64 / 10.0);
        let flow = solve_horn_schunck(&f, &f, &SolverParams::default()).unwrap();
        assert!(flow.is_zero());
    }

    #[test]
    fn uniform_level_change_gives_zero_flow() {
        let a = Frame::filled(10, 10, 0.2);
        let b = Frame::filled(10, 10, 0.7);
        let flow = solve_horn_schunck(&a, &b, &SolverParams::default()).unwrap();
        assert!(flow.is_zero());
    }

    #[test]
    fn rejects_bad_params() {
        let f = Frame::filled(4, 4, 0.0);
        for p in [
            SolverParams { alpha: 0.0, ..Default::default() },
            SolverParams { max_iters: 0, ..Default::default() },
            SolverParams { epsilon: -1.0, ..Default::default() },
        ] {
            assert!(matches!(solve_horn_schunck(&f, &f, &p), Err(FlowError::BadParams(_))));
        }
    }

    #[test]
    fn energy_of_zero_flow_is_sum_of_it_squared() {
        let f1 = Frame::from_fn(9, 7, |x, y| ((x * 5 + y * 2) % 9) as f64 / 8.0);
        let f2 = Frame::from_fn(9, 7, |x, y| ((x * 5 + y * 2 + 3) % 9) as f64 / 8.0);
        let d = estimate_derivatives(&f1, &f2).unwrap();
        let zero = FlowField::zeros(9, 7);
        let expected: f64 = d.it.iter().map(|t| t * t).sum();
        assert!((flow_energy(&zero, &d, 1.0).unwrap() - expected).abs() < 1e-12);

        let f = Frame::filled(9, 7, 0.5);
        let d0 = estimate_derivatives(&f, &f).unwrap();
        assert_eq!(flow_energy(&zero, &d0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn energy_counts_smoothness_term() {
        // u = x on a 3x2 grid: forward differences 1,1,0 per row -> 4 terms of 1
        let flow = FlowField::from_fn(3, 2, |x, _| (x as f64, 0.0));
        let d = Derivatives {
            width: 3,
            height: 2,
            ix: vec![0.0; 6],
            iy: vec![0.0; 6],
            it: vec![0.0; 6],
        };
        assert_eq!(flow_energy(&flow, &d, 2.0).unwrap(), 4.0 * 4.0);
    }

    #[test]
    fn dump_round_trip() {
        let flow = FlowField::from_fn(5, 3, |x, y| (x as f64 * 0.5, -(y as f64)));
        let bytes = flow.to_dump();
        assert_eq!(&bytes[0..4], &5u32.to_le_bytes());
        assert_eq!(&bytes[4..8], &3u32.to_le_bytes());
        assert_eq!(bytes.len(), 8 + 2 * 15 * 4);
        assert_eq!(FlowField::from_dump(&bytes).unwrap(), flow);
        assert!(FlowField::from_dump(&bytes[..20]).is_err());
    }
}
