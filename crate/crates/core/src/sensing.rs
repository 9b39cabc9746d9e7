//! Per-window linear measurement operators and seeded sampling-mask
//! generators.
//!
//! Two operator kinds are supported: pixel subsampling (inpainting) and
//! masked orthonormal per-frame 2-D Fourier encoding (k-t acquisition). Both
//! are mask selections of a unitary (or identity) map, so `‖A‖₂² = 1`
//! exactly whenever at least one sample is taken.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{CoreError, Result};
use crate::scalar::{cx_zero, Cx, Real};
use crate::tensor::ComplexTensor;

/// Measurement model of a sensing operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingKind {
    /// Keeps a subset of pixels of each frame.
    PixelMask,
    /// Orthonormal 2-D DFT of each frame followed by mask selection.
    FourierMask,
}

/// Sampling-pattern family for mask generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaskPattern {
    /// Keeps `⌊keep_fraction · N⌋` uniformly random entries per frame.
    UniformRandom { keep_fraction: f64 },
    /// Keeps full k-space rows, sampled with probability decaying as a
    /// Gaussian in the distance from the center row (σ = N_y/6); the center
    /// row is always kept and `round(N_y/acceleration)` rows are taken.
    VariableDensityCartesian { acceleration: f64 },
    /// Rasterizes `⌈max(N_x, N_y)/acceleration⌉` radial lines through the
    /// center with a seeded per-frame rotation offset.
    PseudoRadial { acceleration: f64 },
}

/// Seeded mask-generation request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskSpec {
    pub pattern: MaskPattern,
    pub seed: u64,
    /// Draw a fresh pattern for every frame; otherwise frame 0's pattern is
    /// shared by all frames.
    pub per_frame: bool,
}

/// Linear measurement operator for a stack of frames.
#[derive(Debug, Clone)]
pub struct SensingOperator<R: Real> {
    kind: SensingKind,
    /// `(N_x, N_y)`.
    frame_dims: (usize, usize),
    /// Row-major `N_y × N_x` boolean mask per frame.
    masks: Vec<Vec<bool>>,
    /// Measurement-vector offset of each frame's segment (length
    /// `num_frames + 1`).
    offsets: Vec<usize>,
    dft: Option<DftPlan<R>>,
}

impl<R: Real> SensingOperator<R> {
    /// Builds an operator from per-frame masks.
    pub fn new(kind: SensingKind, frame_dims: (usize, usize), masks: Vec<Vec<bool>>) -> Result<Self> {
        let (nx, ny) = frame_dims;
        if nx == 0 || ny == 0 || masks.is_empty() {
            return Err(CoreError::InvalidArgument(
                "sensing operator needs positive frame dims and at least one frame".to_string(),
            ));
        }
        for (t, m) in masks.iter().enumerate() {
            if m.len() != nx * ny {
                return Err(CoreError::InvalidArgument(format!(
                    "mask {} has {} entries, expected {}",
                    t,
                    m.len(),
                    nx * ny
                )));
            }
        }
        let mut offsets = Vec::with_capacity(masks.len() + 1);
        offsets.push(0);
        let mut acc = 0;
        for m in &masks {
            acc += m.iter().filter(|&&b| b).count();
            offsets.push(acc);
        }
        let dft = match kind {
            SensingKind::FourierMask => Some(DftPlan::new(ny, nx)),
            SensingKind::PixelMask => None,
        };
        Ok(SensingOperator { kind, frame_dims, masks, offsets, dft })
    }

    pub fn kind(&self) -> SensingKind {
        self.kind
    }

    /// `(N_x, N_y)`.
    pub fn frame_dims(&self) -> (usize, usize) {
        self.frame_dims
    }

    pub fn num_frames(&self) -> usize {
        self.masks.len()
    }

    /// Row-major mask of frame `t`.
    pub fn mask(&self, t: usize) -> &[bool] {
        &self.masks[t]
    }

    /// Total measurement vector length.
    pub fn measurement_len(&self) -> usize {
        *self.offsets.last().expect("offsets are non-empty")
    }

    /// Measurement-vector range covering frames `[start, end)`.
    pub fn measurement_range(&self, start: usize, end: usize) -> std::ops::Range<usize> {
        self.offsets[start]..self.offsets[end]
    }

    /// Operator restricted to frames `[start, end)`.
    pub fn slice_frames(&self, start: usize, end: usize) -> SensingOperator<R> {
        debug_assert!(start < end && end <= self.masks.len(), "frame slice out of range");
        let masks = self.masks[start..end].to_vec();
        SensingOperator::new(self.kind, self.frame_dims, masks)
            .expect("a slice of a valid operator is valid")
    }

    /// Exact squared spectral norm: 1 when any sample is taken, else 0.
    pub fn op_norm_sq(&self) -> R {
        if self.measurement_len() > 0 {
            R::one()
        } else {
            R::zero()
        }
    }

    /// Applies `A`: per-frame transform (Fourier kind only) followed by mask
    /// selection, concatenated frame-major.
    pub fn apply(&self, x: &ComplexTensor<R>) -> Result<Vec<Cx<R>>> {
        self.check_dims(x)?;
        let mut y = Vec::with_capacity(self.measurement_len());
        for (t, mask) in self.masks.iter().enumerate() {
            let frame = x.frame(t);
            let transformed;
            let values: &[Cx<R>] = match &self.dft {
                Some(plan) => {
                    transformed = plan.forward(frame);
                    &transformed
                }
                None => frame,
            };
            for (v, &keep) in values.iter().zip(mask) {
                if keep {
                    y.push(*v);
                }
            }
        }
        Ok(y)
    }

    /// Applies the adjoint `Aᴴ`: scatter into the sampled positions, then
    /// (Fourier kind only) per-frame inverse transform.
    pub fn adjoint(&self, y: &[Cx<R>]) -> Result<ComplexTensor<R>> {
        if y.len() != self.measurement_len() {
            return Err(CoreError::InvalidArgument(format!(
                "measurement vector has length {}, expected {}",
                y.len(),
                self.measurement_len()
            )));
        }
        let (nx, ny) = self.frame_dims;
        let mut out = ComplexTensor::zeros(vec![self.masks.len(), ny, nx]);
        let mut cursor = 0;
        for (t, mask) in self.masks.iter().enumerate() {
            let mut filled = vec![cx_zero(); nx * ny];
            for (slot, &keep) in filled.iter_mut().zip(mask) {
                if keep {
                    *slot = y[cursor];
                    cursor += 1;
                }
            }
            let frame = match &self.dft {
                Some(plan) => plan.inverse(&filled),
                None => filled,
            };
            out.frame_mut(t).copy_from_slice(&frame);
        }
        Ok(out)
    }

    /// Residual `A x − y` followed by the adjoint: `Aᴴ(Ax − y)`.
    pub fn normal_residual(&self, x: &ComplexTensor<R>, y: &[Cx<R>]) -> Result<ComplexTensor<R>> {
        let mut ax = self.apply(x)?;
        if ax.len() != y.len() {
            return Err(CoreError::InvalidArgument(format!(
                "measurement vector has length {}, expected {}",
                y.len(),
                ax.len()
            )));
        }
        for (a, b) in ax.iter_mut().zip(y) {
            *a -= *b;
        }
        self.adjoint(&ax)
    }

    fn check_dims(&self, x: &ComplexTensor<R>) -> Result<()> {
        let (nx, ny) = self.frame_dims;
        let want = [self.masks.len(), ny, nx];
        if x.dims() != want {
            return Err(CoreError::InvalidArgument(format!(
                "input dims {:?} do not match operator dims {:?}",
                x.dims(),
                want
            )));
        }
        Ok(())
    }
}

/// Precomputed twiddle factors for the orthonormal per-frame 2-D DFT,
/// evaluated by direct matrix products (frames are small).
#[derive(Debug, Clone)]
struct DftPlan<R: Real> {
    ny: usize,
    nx: usize,
    /// Row-major `ny × ny` forward factors `e^{−2πi k y / N_y}/√N_y`.
    wy: Vec<Cx<R>>,
    /// Row-major `nx × nx` forward factors.
    wx: Vec<Cx<R>>,
}

impl<R: Real> DftPlan<R> {
    fn new(ny: usize, nx: usize) -> Self {
        DftPlan { ny, nx, wy: twiddles(ny), wx: twiddles(nx) }
    }

    /// `Y[k_y, k_x] = Σ_y Σ_x w_y[k_y, y] · w_x[k_x, x] · X[y, x]`.
    fn forward(&self, frame: &[Cx<R>]) -> Vec<Cx<R>> {
        let (ny, nx) = (self.ny, self.nx);
        let mut tmp = vec![cx_zero(); ny * nx];
        for k in 0..ny {
            for y in 0..ny {
                let w = self.wy[k * ny + y];
                let src = &frame[y * nx..(y + 1) * nx];
                let dst = &mut tmp[k * nx..(k + 1) * nx];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
        let mut out = vec![cx_zero(); ny * nx];
        for k in 0..ny {
            let row = &tmp[k * nx..(k + 1) * nx];
            let dst = &mut out[k * nx..(k + 1) * nx];
            for (kx, d) in dst.iter_mut().enumerate() {
                let mut acc = cx_zero();
                for (x, s) in row.iter().enumerate() {
                    acc += self.wx[kx * nx + x] * s;
                }
                *d = acc;
            }
        }
        out
    }

    /// Inverse (adjoint) transform: conjugated twiddles.
    fn inverse(&self, kspace: &[Cx<R>]) -> Vec<Cx<R>> {
        let (ny, nx) = (self.ny, self.nx);
        let mut tmp = vec![cx_zero(); ny * nx];
        for y in 0..ny {
            for k in 0..ny {
                let w = self.wy[k * ny + y].conj();
                let src = &kspace[k * nx..(k + 1) * nx];
                let dst = &mut tmp[y * nx..(y + 1) * nx];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
        let mut out = vec![cx_zero(); ny * nx];
        for y in 0..ny {
            let row = &tmp[y * nx..(y + 1) * nx];
            let dst = &mut out[y * nx..(y + 1) * nx];
            for (x, d) in dst.iter_mut().enumerate() {
                let mut acc = cx_zero();
                for (k, s) in row.iter().enumerate() {
                    acc += self.wx[k * nx + x].conj() * s;
                }
                *d = acc;
            }
        }
        out
    }
}

/// Row-major `N × N` orthonormal DFT factors `e^{−2πi k j/N}/√N`.
fn twiddles<R: Real>(n: usize) -> Vec<Cx<R>> {
    let scale = R::one() / R::of(n as f64).sqrt();
    let mut w = Vec::with_capacity(n * n);
    for k in 0..n {
        for j in 0..n {
            let angle = -2.0 * std::f64::consts::PI * ((k * j) % n) as f64 / n as f64;
            w.push(Cx::new(
                R::of(angle.cos()) * scale,
                R::of(angle.sin()) * scale,
            ));
        }
    }
    w
}

/// Generates per-frame sampling masks (row-major `N_y × N_x` booleans).
///
/// All randomness comes from one seeded stream; with `per_frame = false`
/// only frame 0 consumes the stream and its pattern is cloned.
pub fn gen_mask(spec: &MaskSpec, frame_dims: (usize, usize), num_frames: usize) -> Result<Vec<Vec<bool>>> {
    let (nx, ny) = frame_dims;
    if nx == 0 || ny == 0 || num_frames == 0 {
        return Err(CoreError::InvalidArgument(
            "mask generation needs positive dimensions and frame count".to_string(),
        ));
    }
    validate_pattern(&spec.pattern)?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let drawn = if spec.per_frame { num_frames } else { 1 };
    let mut masks = Vec::with_capacity(num_frames);
    for _ in 0..drawn {
        masks.push(draw_mask(&spec.pattern, nx, ny, &mut rng));
    }
    while masks.len() < num_frames {
        let first = masks[0].clone();
        masks.push(first);
    }
    Ok(masks)
}

/// Per-frame rotation offsets (radians) the pseudo-radial generator uses,
/// replayed from the same seeded stream as [`gen_mask`].
pub fn pseudo_radial_offsets(spec: &MaskSpec, num_frames: usize) -> Result<Vec<f64>> {
    match spec.pattern {
        MaskPattern::PseudoRadial { .. } => {}
        _ => {
            return Err(CoreError::InvalidArgument(
                "rotation offsets exist only for the pseudo-radial pattern".to_string(),
            ))
        }
    }
    validate_pattern(&spec.pattern)?;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let drawn = if spec.per_frame { num_frames } else { 1 };
    let mut offsets: Vec<f64> = (0..drawn)
        .map(|_| rng.gen::<f64>() * std::f64::consts::PI)
        .collect();
    while offsets.len() < num_frames {
        offsets.push(offsets[0]);
    }
    Ok(offsets)
}

fn validate_pattern(pattern: &MaskPattern) -> Result<()> {
    match *pattern {
        MaskPattern::UniformRandom { keep_fraction } => {
            if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "keep fraction {keep_fraction} must lie in (0, 1]"
                )));
            }
        }
        MaskPattern::VariableDensityCartesian { acceleration }
        | MaskPattern::PseudoRadial { acceleration } => {
            if !(acceleration >= 1.0) {
                return Err(CoreError::InvalidArgument(format!(
                    "acceleration {acceleration} must be at least 1"
                )));
            }
        }
    }
    Ok(())
}

fn draw_mask(pattern: &MaskPattern, nx: usize, ny: usize, rng: &mut ChaCha12Rng) -> Vec<bool> {
    match *pattern {
        MaskPattern::UniformRandom { keep_fraction } => {
            let n = nx * ny;
            let keep = ((keep_fraction * n as f64).floor() as usize).min(n);
            let mut idx: Vec<u32> = (0..n as u32).collect();
            for i in 0..keep {
                let j = rng.gen_range(i..n);
                idx.swap(i, j);
            }
            let mut mask = vec![false; n];
            for &k in &idx[..keep] {
                mask[k as usize] = true;
            }
            mask
        }
        MaskPattern::VariableDensityCartesian { acceleration } => {
            let rows = variable_density_rows(ny, acceleration, rng);
            let cy = ny / 2;
            let mut mask = vec![false; nx * ny];
            for r in rows {
                // The pattern is drawn in centered k-space coordinates; map
                // the row to unshifted DFT indexing (DC in row 0).
                let ru = unshift(r, cy, ny);
                for x in 0..nx {
                    mask[ru * nx + x] = true;
                }
            }
            mask
        }
        MaskPattern::PseudoRadial { acceleration } => {
            let offset = rng.gen::<f64>() * std::f64::consts::PI;
            let lines = ((nx.max(ny) as f64) / acceleration).ceil() as usize;
            rasterize_radial(nx, ny, lines.max(1), offset)
        }
    }
}

/// Selects `clamp(round(N_y/acceleration), 1, N_y)` distinct rows in
/// centered coordinates: the center row first, the rest by weighted
/// sampling without replacement under the Gaussian density law.
fn variable_density_rows(ny: usize, acceleration: f64, rng: &mut ChaCha12Rng) -> Vec<usize> {
    let target = ((ny as f64 / acceleration).round() as usize).clamp(1, ny);
    let cy = ny / 2;
    let sigma = ny as f64 / 6.0;
    let mut weights: Vec<f64> = (0..ny)
        .map(|r| {
            let d = r as f64 - cy as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let mut rows = vec![cy];
    weights[cy] = 0.0;
    while rows.len() < target {
        let total: f64 = weights.iter().sum();
        debug_assert!(total > 0.0, "weights exhausted before reaching target rows");
        let mut u = rng.gen::<f64>() * total;
        let mut chosen = ny - 1;
        for (r, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            if u < w {
                chosen = r;
                break;
            }
            u -= w;
        }
        rows.push(chosen);
        weights[chosen] = 0.0;
    }
    rows
}

/// Rasterizes `lines` straight lines through the centered pixel
/// `(N_x/2, N_y/2)` at angles `offset + π·j/lines`, stepping along the
/// dominant axis and rounding the other coordinate, then maps the centered
/// pattern to unshifted DFT indexing.
fn rasterize_radial(nx: usize, ny: usize, lines: usize, offset: f64) -> Vec<bool> {
    let cx = nx / 2;
    let cy = ny / 2;
    let mut centered = vec![false; nx * ny];
    for j in 0..lines {
        let theta = offset + std::f64::consts::PI * j as f64 / lines as f64;
        let (dx, dy) = (theta.cos(), theta.sin());
        if dx.abs() >= dy.abs() {
            let slope = dy / dx;
            for x in 0..nx {
                let y = (cy as f64 + (x as f64 - cx as f64) * slope).round();
                if y >= 0.0 && (y as usize) < ny {
                    centered[(y as usize) * nx + x] = true;
                }
            }
        } else {
            let slope = dx / dy;
            for y in 0..ny {
                let x = (cx as f64 + (y as f64 - cy as f64) * slope).round();
                if x >= 0.0 && (x as usize) < nx {
                    centered[y * nx + x as usize] = true;
                }
            }
        }
    }
    let mut mask = vec![false; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            if centered[y * nx + x] {
                mask[unshift(y, cy, ny) * nx + unshift(x, cx, nx)] = true;
            }
        }
    }
    mask
}

/// Maps a centered coordinate to unshifted DFT indexing: frequency
/// `r − center` taken modulo `n`.
fn unshift(r: usize, center: usize, n: usize) -> usize {
    (r + n - center) % n
}
