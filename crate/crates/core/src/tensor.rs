//! Dense complex tensors, spatiotemporal patch extraction/aggregation, and
//! the sliding temporal window plan.
//!
//! Frame stacks are stored row-major with dimensions `[frames, height,
//! width]`, so one frame is contiguous and the x coordinate varies fastest.
//! A patch of shape `(n_x, n_y, n_t)` is vectorized with x fastest, then y,
//! then t, so the length-`n_x·n_y·n_t` patch vector reshapes column-wise into
//! an `(n_x·n_y) × n_t` space-time matrix.

use crate::error::{CoreError, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cx_zero, Cx, Real};

/// Dense complex tensor in row-major order (last dimension fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor<R: Real> {
    dims: Vec<usize>,
    data: Vec<Cx<R>>,
}

impl<R: Real> ComplexTensor<R> {
    /// Tensor from explicit dimensions and row-major data.
    pub fn new(dims: Vec<usize>, data: Vec<Cx<R>>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if dims.is_empty() || data.len() != len {
            return Err(CoreError::InvalidArgument(format!(
                "tensor data length {} does not match dims {:?}",
                data.len(),
                dims
            )));
        }
        Ok(ComplexTensor { dims, data })
    }

    /// All-zero tensor.
    pub fn zeros(dims: Vec<usize>) -> Self {
        let len: usize = dims.iter().product();
        assert!(!dims.is_empty(), "tensor needs at least one dimension");
        ComplexTensor { dims, data: vec![cx_zero(); len] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Cx<R>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Cx<R>] {
        &mut self.data
    }

    /// Flat offset of `[t, y, x]` in a `[frames, height, width]` tensor.
    pub fn offset3(&self, t: usize, y: usize, x: usize) -> usize {
        debug_assert_eq!(self.dims.len(), 3, "offset3 requires a 3-d tensor");
        (t * self.dims[1] + y) * self.dims[2] + x
    }

    /// Entry `[t, y, x]` of a `[frames, height, width]` tensor.
    pub fn at3(&self, t: usize, y: usize, x: usize) -> Cx<R> {
        self.data[self.offset3(t, y, x)]
    }

    /// Contiguous slice holding frame `t` of a `[frames, height, width]`
    /// tensor.
    pub fn frame(&self, t: usize) -> &[Cx<R>] {
        debug_assert_eq!(self.dims.len(), 3, "frame requires a 3-d tensor");
        let fs = self.dims[1] * self.dims[2];
        &self.data[t * fs..(t + 1) * fs]
    }

    /// Mutable frame `t`.
    pub fn frame_mut(&mut self, t: usize) -> &mut [Cx<R>] {
        debug_assert_eq!(self.dims.len(), 3, "frame requires a 3-d tensor");
        let fs = self.dims[1] * self.dims[2];
        &mut self.data[t * fs..(t + 1) * fs]
    }

    /// New tensor holding frames `[start, end)` of a 3-d frame stack.
    pub fn frame_range(&self, start: usize, end: usize) -> ComplexTensor<R> {
        debug_assert_eq!(self.dims.len(), 3, "frame_range requires a 3-d tensor");
        debug_assert!(start <= end && end <= self.dims[0], "frame range out of bounds");
        let fs = self.dims[1] * self.dims[2];
        ComplexTensor {
            dims: vec![end - start, self.dims[1], self.dims[2]],
            data: self.data[start * fs..end * fs].to_vec(),
        }
    }
}

/// Patch geometry: patch shape and extraction strides.
///
/// Patches are `(n_x, n_y, n_t)` boxes extracted on a clamped stride grid:
/// along each axis the start positions are `0, s, 2s, …` while they fit, and
/// the final position is clamped so the last patch ends exactly at the axis
/// boundary. Every pixel is therefore covered by at least one patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchConfig {
    /// Patch shape `(n_x, n_y, n_t)`.
    pub patch: (usize, usize, usize),
    /// Stride along both spatial axes.
    pub spatial_stride: usize,
    /// Stride along the temporal axis.
    pub temporal_stride: usize,
}

impl PatchConfig {
    /// Patch vector length `n = n_x·n_y·n_t`.
    pub fn patch_len(&self) -> usize {
        self.patch.0 * self.patch.1 * self.patch.2
    }

    /// Space-time reshape of an atom: `(n_x·n_y, n_t)`.
    pub fn reshape_dims(&self) -> (usize, usize) {
        (self.patch.0 * self.patch.1, self.patch.2)
    }

    /// Validates the geometry against a `[frames, height, width]` shape.
    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        let (nx, ny, nt) = self.patch;
        if nx == 0 || ny == 0 || nt == 0 {
            return Err(CoreError::InvalidArgument(
                "patch dimensions must be positive".to_string(),
            ));
        }
        if self.spatial_stride == 0 || self.temporal_stride == 0 {
            return Err(CoreError::InvalidArgument(
                "patch strides must be positive".to_string(),
            ));
        }
        if self.spatial_stride > nx.min(ny) || self.temporal_stride > nt {
            return Err(CoreError::InvalidArgument(format!(
                "strides ({}, {}) may not exceed the patch extents ({nx}, {ny}, {nt}); \
                 larger strides would leave interior voxels uncovered",
                self.spatial_stride, self.temporal_stride
            )));
        }
        if dims.len() != 3 {
            return Err(CoreError::InvalidArgument(format!(
                "expected a [frames, height, width] tensor, got {} dims",
                dims.len()
            )));
        }
        if nt > dims[0] || ny > dims[1] || nx > dims[2] {
            return Err(CoreError::InvalidArgument(format!(
                "patch ({nx}, {ny}, {nt}) exceeds tensor dims {dims:?}"
            )));
        }
        Ok(())
    }

    /// Patch start positions along the three axes for the given shape:
    /// `(xs, ys, ts)`.
    pub fn grid(&self, dims: &[usize]) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        (
            axis_positions(dims[2], self.patch.0, self.spatial_stride),
            axis_positions(dims[1], self.patch.1, self.spatial_stride),
            axis_positions(dims[0], self.patch.2, self.temporal_stride),
        )
    }

    /// Number of patches extracted from the given shape.
    pub fn num_patches(&self, dims: &[usize]) -> usize {
        let (xs, ys, ts) = self.grid(dims);
        xs.len() * ys.len() * ts.len()
    }
}

/// Start positions `0, s, 2s, …` while `k·s + p ≤ extent`, with a final
/// clamped position `extent − p` appended when the regular grid does not
/// already end there.
pub fn axis_positions(extent: usize, patch: usize, stride: usize) -> Vec<usize> {
    debug_assert!(patch >= 1 && stride >= 1 && patch <= extent, "invalid axis geometry");
    let mut out = Vec::new();
    let mut k = 0;
    while k * stride + patch <= extent {
        out.push(k * stride);
        k += 1;
    }
    let last = extent - patch;
    if *out.last().expect("at least one position") != last {
        out.push(last);
    }
    out
}

/// Extracts all patches of a `[frames, height, width]` tensor as the columns
/// of an `n × M` matrix. Patches are enumerated with the x position fastest,
/// then y, then t; within a patch, entries are vectorized x fastest, then y,
/// then t.
pub fn extract_patches<R: Real>(frames: &ComplexTensor<R>, cfg: &PatchConfig) -> Result<CMatrix<R>> {
    cfg.validate(frames.dims())?;
    let (nx, ny, nt) = cfg.patch;
    let (xs, ys, ts) = cfg.grid(frames.dims());
    let n = cfg.patch_len();
    let m = xs.len() * ys.len() * ts.len();
    let mut out = CMatrix::zeros(n, m);
    let mut col = 0;
    for &t0 in &ts {
        for &y0 in &ys {
            for &x0 in &xs {
                let dst = out.col_mut(col);
                let mut a = 0;
                for it in 0..nt {
                    for iy in 0..ny {
                        let base = frames.offset3(t0 + it, y0 + iy, x0);
                        dst[a..a + nx].copy_from_slice(&frames.data()[base..base + nx]);
                        a += nx;
                    }
                }
                col += 1;
            }
        }
    }
    Ok(out)
}

/// Scatter-adds patch columns back onto the frame grid.
///
/// Returns the sum tensor together with the per-pixel coverage count (how
/// many patches touch each pixel), aligned with the tensor's row-major
/// layout. Dividing the sum by the coverage gives the patch average.
pub fn aggregate_patches<R: Real>(
    patches: &CMatrix<R>,
    dims: &[usize],
    cfg: &PatchConfig,
) -> Result<(ComplexTensor<R>, Vec<R>)> {
    cfg.validate(dims)?;
    let (nx, ny, nt) = cfg.patch;
    let (xs, ys, ts) = cfg.grid(dims);
    let m = xs.len() * ys.len() * ts.len();
    if patches.nrows() != cfg.patch_len() || patches.ncols() != m {
        return Err(CoreError::InvalidArgument(format!(
            "patch matrix is {}x{}, expected {}x{} for dims {:?}",
            patches.nrows(),
            patches.ncols(),
            cfg.patch_len(),
            m,
            dims
        )));
    }
    let mut sum = ComplexTensor::zeros(dims.to_vec());
    let mut coverage = vec![R::zero(); sum.len()];
    let mut col = 0;
    for &t0 in &ts {
        for &y0 in &ys {
            for &x0 in &xs {
                let src = patches.col(col);
                let mut a = 0;
                for it in 0..nt {
                    for iy in 0..ny {
                        let base = sum.offset3(t0 + it, y0 + iy, x0);
                        let dst = &mut sum.data_mut()[base..base + nx];
                        for (d, s) in dst.iter_mut().zip(&src[a..a + nx]) {
                            *d += *s;
                        }
                        for c in &mut coverage[base..base + nx] {
                            *c += R::one();
                        }
                        a += nx;
                    }
                }
                col += 1;
            }
        }
    }
    Ok((sum, coverage))
}

/// Sliding temporal windows over a frame stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPlan {
    pub num_frames: usize,
    pub window_len: usize,
    pub window_stride: usize,
    /// Half-open frame ranges `[start, end)`, each of length `window_len`.
    pub windows: Vec<(usize, usize)>,
}

/// Builds the sliding window plan: starts `0, s, 2s, …` while a full window
/// fits, with a final clamped window `[N − M̃, N)` appended when frames would
/// otherwise be left uncovered.
pub fn sliding_windows(num_frames: usize, window_len: usize, stride: usize) -> Result<WindowPlan> {
    if window_len == 0 || stride == 0 {
        return Err(CoreError::InvalidArgument(
            "window length and stride must be positive".to_string(),
        ));
    }
    if window_len > num_frames {
        return Err(CoreError::InvalidArgument(format!(
            "window length {window_len} exceeds stream length {num_frames}"
        )));
    }
    let mut windows = Vec::new();
    let mut k = 0;
    while k * stride + window_len <= num_frames {
        windows.push((k * stride, k * stride + window_len));
        k += 1;
    }
    let last_end = windows.last().expect("at least one window").1;
    if last_end < num_frames {
        windows.push((num_frames - window_len, num_frames));
    }
    Ok(WindowPlan { num_frames, window_len, window_stride: stride, windows })
}
