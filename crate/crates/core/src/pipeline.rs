//! Streaming reconstruction pipeline.
//!
//! The measurement stream is cut into overlapping temporal windows
//! (minibatches). Each window is warm-started from the running state, then
//! `K` outer iterations alternate a dictionary-learning step over the
//! window's patches with an image-update step against the window's
//! measurements. Afterwards the recursive accumulators are committed once
//! with the final codes, and the window's frame estimates are merged into
//! the stream estimate by an exponentially `ρ`-weighted average. All
//! per-window work is bounded by the window size, so the live state is
//! independent of the stream length (apart from the output frames
//! themselves).

use std::time::Instant;

use crate::dict::{build_dct_dictionary, DictConstraint, Dictionary};
use crate::dictlearn::{
    dl_pass_p1, sparse_code_unitary, update_accumulators, update_dict_unitary, Accumulators,
};
use crate::error::{CoreError, Result};
use crate::image_update::{
    image_update_direct, image_update_proxgrad, objective_xstep, ImageUpdateMode,
    ImageUpdateParams,
};
use crate::scalar::{Cx, Real};
use crate::sensing::{SensingKind, SensingOperator};
use crate::sparse::SparseCodeMatrix;
use crate::tensor::{extract_patches, sliding_windows, ComplexTensor, PatchConfig};

/// Algorithm variant: which dictionary constraint is enforced and whether
/// the dictionary adapts at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Full-rank adaptive dictionary.
    Fd,
    /// Low-rank adaptive dictionary with the given reshaped-atom rank.
    Ld(usize),
    /// Unitary adaptive dictionary.
    Ud,
    /// Fixed DCT dictionary; only the codes and frames are updated.
    OnlineDct,
    /// Batch (single-window) mode with low-rank atoms of the given rank.
    Batch(usize),
}

impl Variant {
    /// Dictionary constraint enforced by this variant.
    pub fn constraint(self) -> DictConstraint {
        match self {
            Variant::Fd | Variant::OnlineDct => DictConstraint::FullRank,
            Variant::Ld(r) | Variant::Batch(r) => DictConstraint::LowRank(r),
            Variant::Ud => DictConstraint::Unitary,
        }
    }

    /// Whether the variant runs the atom-by-atom (non-unitary) path.
    pub fn is_atomwise(self) -> bool {
        !matches!(self, Variant::Ud)
    }

    /// Whether dictionary atoms are updated at all.
    pub fn updates_atoms(self) -> bool {
        !matches!(self, Variant::OnlineDct)
    }
}

/// Full parameter set of a streaming reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnairConfig<R: Real> {
    pub variant: Variant,
    /// Patch-fidelity weight `λ_S ≥ 0`.
    pub lambda_s: R,
    /// Sparsity threshold `λ_Z ≥ 0`.
    pub lambda_z: R,
    /// Forgetting factor `ρ ∈ (0, 1]`.
    pub rho: R,
    /// Code magnitude cap `L > λ_Z` (atom-wise sparse coding only).
    pub linf_bound: R,
    /// Frames per window `M̃`.
    pub window_len: usize,
    /// Window stride (≤ window length so every frame is covered).
    pub window_stride: usize,
    pub patch: PatchConfig,
    /// Outer alternations `K` per window.
    pub outer_iters: usize,
    /// Dictionary-learning passes `K̂` per outer iteration.
    pub dl_iters: usize,
    /// Image-update iterations `K̃` per outer iteration. Only the
    /// proximal-gradient (Fourier) path iterates; `0` freezes the image
    /// estimate entirely.
    pub image_iters: usize,
    /// Outer alternations for the very first window.
    pub first_window_iters: usize,
    /// Sparse-code-only passes run before the outer loop on every window
    /// after the first (atom-wise variants only).
    pub presolve_code_iters: usize,
    /// Full passes over the stream; later passes continue the same state.
    pub passes: usize,
    /// Recorded for provenance (mask/data generation); the reconstruction
    /// itself draws no randomness.
    pub seed: u64,
}

impl<R: Real> OnairConfig<R> {
    /// Checks the parameter invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_s >= R::zero()) || !(self.lambda_z >= R::zero()) {
            return Err(CoreError::InvalidArgument(format!(
                "weights must be nonnegative: λ_S = {}, λ_Z = {}",
                self.lambda_s, self.lambda_z
            )));
        }
        if !(self.rho > R::zero() && self.rho <= R::one()) {
            return Err(CoreError::InvalidArgument(format!(
                "forgetting factor must lie in (0, 1], got {}",
                self.rho
            )));
        }
        if !(self.linf_bound > self.lambda_z) {
            return Err(CoreError::InvalidArgument(format!(
                "code magnitude cap {} must exceed the threshold {}",
                self.linf_bound, self.lambda_z
            )));
        }
        if self.outer_iters == 0 || self.dl_iters == 0 || self.first_window_iters == 0 {
            return Err(CoreError::InvalidArgument(
                "iteration counts K, K̂ and the first-window count must be ≥ 1".to_string(),
            ));
        }
        if self.passes == 0 {
            return Err(CoreError::InvalidArgument("at least one pass is required".to_string()));
        }
        if self.window_stride == 0 || self.window_stride > self.window_len {
            return Err(CoreError::InvalidArgument(format!(
                "window stride {} must lie in [1, window length {}] so every frame is covered",
                self.window_stride, self.window_len
            )));
        }
        let (px, py, pt) = self.patch.patch;
        if px == 0 || py == 0 || pt == 0 {
            return Err(CoreError::InvalidArgument(
                "patch dimensions must be positive".to_string(),
            ));
        }
        if self.patch.spatial_stride == 0 || self.patch.temporal_stride == 0 {
            return Err(CoreError::InvalidArgument(
                "patch strides must be positive".to_string(),
            ));
        }
        if self.patch.spatial_stride > px.min(py) || self.patch.temporal_stride > pt {
            return Err(CoreError::InvalidArgument(
                "patch strides may not exceed the patch extents (voxels would go uncovered)"
                    .to_string(),
            ));
        }
        if pt > self.window_len {
            return Err(CoreError::InvalidArgument(format!(
                "temporal patch extent {pt} exceeds the window length {}",
                self.window_len
            )));
        }
        if let Variant::Ld(r) | Variant::Batch(r) = self.variant {
            let (n1, n2) = self.patch.reshape_dims();
            if r == 0 || r > n1.min(n2) {
                return Err(CoreError::InvalidArgument(format!(
                    "atom rank {r} must lie in [1, {}] for {n1}×{n2} reshaped atoms",
                    n1.min(n2)
                )));
            }
        }
        Ok(())
    }
}

/// Running streaming state: everything carried from one window to the next.
#[derive(Debug, Clone)]
pub struct ReconState<R: Real> {
    pub dictionary: Dictionary<R>,
    pub accumulators: Accumulators<R>,
    /// Codes of the previous window (`Ĉᵗ⁻¹`), used as the next warm start.
    pub prev_codes: Option<SparseCodeMatrix<R>>,
    /// Windows processed so far (across passes).
    pub windows_done: usize,
    /// ρ-weighted numerator of the merged estimate, one entry per frame of
    /// the full stream (this is the output buffer, not per-window state).
    merged_num: ComplexTensor<R>,
    /// ρ-weighted denominator per frame; positive once the frame has been
    /// reconstructed in at least one window.
    merged_weight: Vec<R>,
}

impl<R: Real> ReconState<R> {
    /// Fresh state for a stream of `num_frames` frames of `(N_x, N_y)`
    /// pixels, starting from the given dictionary and zero history.
    pub fn new(num_frames: usize, frame_dims: (usize, usize), dictionary: Dictionary<R>) -> Self {
        let acc = Accumulators::zeros(dictionary.atom_len(), dictionary.num_atoms());
        ReconState {
            dictionary,
            accumulators: acc,
            prev_codes: None,
            windows_done: 0,
            merged_num: ComplexTensor::zeros(vec![num_frames, frame_dims.1, frame_dims.0]),
            merged_weight: vec![R::zero(); num_frames],
        }
    }

    pub fn num_frames(&self) -> usize {
        self.merged_weight.len()
    }

    /// Whether frame `f` has been reconstructed in at least one window.
    pub fn frame_seen(&self, f: usize) -> bool {
        self.merged_weight[f] > R::zero()
    }

    /// Current ρ-weighted merge weight of frame `f`.
    pub fn merge_weight(&self, f: usize) -> R {
        self.merged_weight[f]
    }

    /// Writes the merged estimate of frame `f` into `out`.
    pub fn merged_frame_into(&self, f: usize, out: &mut [Cx<R>]) -> Result<()> {
        if !self.frame_seen(f) {
            return Err(CoreError::InvalidArgument(format!(
                "frame {f} has not been reconstructed yet"
            )));
        }
        let w = Cx::new(self.merged_weight[f], R::zero());
        for (o, v) in out.iter_mut().zip(self.merged_num.frame(f)) {
            *o = *v / w;
        }
        Ok(())
    }

    /// Merged estimate of the whole stream.
    pub fn merged_frames(&self) -> Result<ComplexTensor<R>> {
        let mut out = ComplexTensor::zeros(self.merged_num.dims().to_vec());
        for f in 0..self.num_frames() {
            let dims = (self.merged_num.dims()[1], self.merged_num.dims()[2]);
            let fs = dims.0 * dims.1;
            let slice = &mut out.data_mut()[f * fs..(f + 1) * fs];
            self.merged_frame_into(f, slice)?;
        }
        Ok(out)
    }
}

/// Folds a window's frame estimates into the stream estimate:
/// `numerator ← ρ·numerator + estimate`, `weight ← ρ·weight + 1` for every
/// frame of the window, so the merged frame is the exponentially ρ-weighted
/// average of all window estimates that contained it.
pub fn rho_weighted_merge<R: Real>(
    state: &mut ReconState<R>,
    window: (usize, usize),
    estimate: &ComplexTensor<R>,
    rho: R,
) {
    let (start, end) = window;
    assert!(end <= state.num_frames() && start < end, "window out of range");
    assert_eq!(estimate.dims()[0], end - start, "estimate must cover the window");
    for (local, global) in (start..end).enumerate() {
        let first_visit = state.merged_weight[global] == R::zero();
        let est = estimate.frame(local);
        let fs = est.len();
        let num = &mut state.merged_num.data_mut()[global * fs..(global + 1) * fs];
        if first_visit {
            num.copy_from_slice(est);
        } else {
            for (n, e) in num.iter_mut().zip(est) {
                *n = *n * Cx::new(rho, R::zero()) + *e;
            }
        }
        state.merged_weight[global] = rho * state.merged_weight[global] + R::one();
    }
}

/// Initializer family for frames entering the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitKind {
    /// Per-frame bilinear fill of unsampled pixels (pixel-domain sampling).
    SpatialInterp,
    /// Zeroth-order hold in k-space from the nearest older frame estimate
    /// (Fourier sampling).
    TemporalHold,
}

impl InitKind {
    /// The initializer matching a sensing kind.
    pub fn for_sensing(kind: SensingKind) -> InitKind {
        match kind {
            SensingKind::PixelMask => InitKind::SpatialInterp,
            SensingKind::FourierMask => InitKind::TemporalHold,
        }
    }
}

/// Initializes frames `first_new..` of the window tensor `x0` from the
/// window measurements; frames before `first_new` must already hold their
/// current estimates (they seed the temporal hold).
///
/// `SpatialInterp` scatters each frame's samples and fills unsampled pixels
/// by iterative bilinear interpolation (each pass averages the already
/// known 4-neighbors, committed simultaneously). `TemporalHold` copies
/// unsampled k-space entries from the forward transform of the nearest
/// older frame estimate and inverse-transforms. Returns `true` when some
/// frame had no samples and no older frame, and fell back to zeros.
pub fn init_new_frames<R: Real>(
    y: &[Cx<R>],
    op: &SensingOperator<R>,
    kind: InitKind,
    x0: &mut ComplexTensor<R>,
    first_new: usize,
) -> Result<bool> {
    if kind != InitKind::for_sensing(op.kind()) {
        return Err(CoreError::InvalidArgument(format!(
            "initializer {kind:?} does not match the {:?} sensing kind",
            op.kind()
        )));
    }
    let (nx, ny) = op.frame_dims();
    if x0.dims() != [op.num_frames(), ny, nx] {
        return Err(CoreError::InvalidArgument(format!(
            "window tensor has dims {:?}, expected [{}, {ny}, {nx}]",
            x0.dims(),
            op.num_frames()
        )));
    }
    if y.len() != op.measurement_len() {
        return Err(CoreError::InvalidArgument(format!(
            "measurement vector has length {}, expected {}",
            y.len(),
            op.measurement_len()
        )));
    }
    if first_new >= op.num_frames() {
        return Ok(false);
    }
    let mut fallback = false;
    match kind {
        InitKind::SpatialInterp => {
            for f in first_new..op.num_frames() {
                let seg = &y[op.measurement_range(f, f + 1)];
                let mask = op.mask(f);
                let frame = x0.frame_mut(f);
                frame.iter_mut().for_each(|z| *z = Cx::new(R::zero(), R::zero()));
                if seg.is_empty() {
                    fallback = true;
                    continue;
                }
                scatter(frame, mask, seg);
                let mut filled = mask.to_vec();
                bilinear_fill(frame, &mut filled, nx, ny);
            }
        }
        InitKind::TemporalHold => {
            let full = full_fourier(nx, ny);
            let mut prior_k = if first_new > 0 {
                Some(full.apply(&frame_tensor(x0.frame(first_new - 1), nx, ny))?)
            } else {
                None
            };
            for f in first_new..op.num_frames() {
                let seg = &y[op.measurement_range(f, f + 1)];
                let mask = op.mask(f);
                if seg.is_empty() && prior_k.is_none() {
                    fallback = true;
                }
                let mut k = prior_k
                    .take()
                    .unwrap_or_else(|| vec![Cx::new(R::zero(), R::zero()); nx * ny]);
                scatter(&mut k, mask, seg);
                let frame = full.adjoint(&k)?;
                x0.frame_mut(f).copy_from_slice(frame.frame(0));
                prior_k = Some(k);
            }
        }
    }
    Ok(fallback)
}

/// Warm-start bundle for one minibatch.
#[derive(Debug, Clone)]
pub struct WarmStart<R: Real> {
    /// Initial window frames: merged estimates where available, initializer
    /// output for frames entering the stream.
    pub frames: ComplexTensor<R>,
    /// Initial codes: the previous window's codes, or zeros on the first
    /// window.
    pub codes: SparseCodeMatrix<R>,
    /// A frame without samples fell back to zeros.
    pub zero_sample_fallback: bool,
}

/// Assembles the warm start of window `(start, end)`: previously seen
/// frames take their current merged estimates, new frames take the
/// initializer output, and the codes are carried over from the previous
/// window. The initial dictionary is `state.dictionary` itself.
pub fn warm_start<R: Real>(
    state: &ReconState<R>,
    window: (usize, usize),
    y_w: &[Cx<R>],
    op_w: &SensingOperator<R>,
    patch: &PatchConfig,
) -> Result<WarmStart<R>> {
    let (start, end) = window;
    if start >= end || end > state.num_frames() || end - start != op_w.num_frames() {
        return Err(CoreError::InvalidArgument(format!(
            "window [{start}, {end}) is inconsistent with the stream ({} frames) \
             or the operator ({} frames)",
            state.num_frames(),
            op_w.num_frames()
        )));
    }
    let (nx, ny) = op_w.frame_dims();
    let mut frames = ComplexTensor::zeros(vec![end - start, ny, nx]);
    let first_new = (start..end)
        .position(|g| !state.frame_seen(g))
        .unwrap_or(end - start);
    for local in 0..first_new {
        state.merged_frame_into(start + local, frames.frame_mut(local))?;
    }
    let kind = InitKind::for_sensing(op_w.kind());
    let fallback = init_new_frames(y_w, op_w, kind, &mut frames, first_new)?;
    let num_patches = patch.num_patches(frames.dims());
    let codes = match &state.prev_codes {
        Some(c) => {
            c.check_dims(state.dictionary.num_atoms(), num_patches)?;
            c.clone()
        }
        None => SparseCodeMatrix::zeros(num_patches, state.dictionary.num_atoms()),
    };
    Ok(WarmStart { frames, codes, zero_sample_fallback: fallback })
}

/// Per-window diagnostics record.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDiagnostics<R: Real> {
    pub window_index: usize,
    /// Global frame range `[start, end)` of the window.
    pub frames: (usize, usize),
    /// Instantaneous objective after the warm start.
    pub objective_pre: R,
    /// Instantaneous objective after the final step.
    pub objective_post: R,
    /// Fraction of nonzero code entries at the end of the window.
    pub code_sparsity: R,
    pub wall_ms: f64,
    /// A frame without samples fell back to a zero initialization.
    pub init_fallback: bool,
}

/// Result of processing one minibatch.
#[derive(Debug, Clone)]
pub struct MinibatchOutput<R: Real> {
    /// Final frame estimates `x̂ᵗ` of the window.
    pub frames: ComplexTensor<R>,
    pub diagnostics: WindowDiagnostics<R>,
    /// Instantaneous objective after the warm start and after every
    /// dictionary-learning and image-update step, in order (empty unless
    /// tracing was requested).
    pub objective_trace: Vec<R>,
}

/// Processes one window: warm start, optional presolve code passes,
/// `K` outer alternations of dictionary learning and image update, then a
/// single accumulator commit with the final codes. The dictionary and the
/// carried codes live in `state`; the frame estimates are returned (merging
/// them is the caller's separate step).
///
/// Iteration-count invariants are *not* re-checked here, so degenerate
/// counts (e.g. `K̂ = 0`) can be used to freeze individual steps.
pub fn process_minibatch<R: Real>(
    state: &mut ReconState<R>,
    window: (usize, usize),
    y_w: &[Cx<R>],
    op_w: &SensingOperator<R>,
    cfg: &OnairConfig<R>,
    trace_objectives: bool,
) -> Result<MinibatchOutput<R>> {
    let t0 = Instant::now();
    let ws = warm_start(state, window, y_w, op_w, &cfg.patch)?;
    let mut x = ws.frames;
    let mut codes = ws.codes;
    let mut patches = extract_patches(&x, &cfg.patch)?;
    let first_window = state.windows_done == 0;
    let iters = if first_window { cfg.first_window_iters } else { cfg.outer_iters };
    let mut trace = Vec::new();

    let dict = &mut state.dictionary;
    let acc = &state.accumulators;
    let objective_pre =
        objective_instant(op_w, y_w, &x, dict, &codes, &cfg.patch, cfg.lambda_s, cfg.lambda_z)?;
    if trace_objectives {
        trace.push(objective_pre);
    }
    if !first_window && cfg.presolve_code_iters > 0 && cfg.variant.is_atomwise() {
        dl_pass_p1(
            dict,
            &mut codes,
            &patches,
            acc,
            cfg.lambda_z,
            cfg.linf_bound,
            cfg.rho,
            cfg.presolve_code_iters,
            false,
        )?;
        if trace_objectives {
            trace.push(objective_instant(
                op_w, y_w, &x, dict, &codes, &cfg.patch, cfg.lambda_s, cfg.lambda_z,
            )?);
        }
    }
    for _ in 0..iters {
        if cfg.variant.is_atomwise() {
            dl_pass_p1(
                dict,
                &mut codes,
                &patches,
                acc,
                cfg.lambda_z,
                cfg.linf_bound,
                cfg.rho,
                cfg.dl_iters,
                cfg.variant.updates_atoms(),
            )?;
        } else {
            for _ in 0..cfg.dl_iters {
                codes = sparse_code_unitary(dict, &patches, cfg.lambda_z)?;
                update_dict_unitary(dict, &patches, &codes, acc, cfg.rho)?;
            }
        }
        if trace_objectives {
            trace.push(objective_instant(
                op_w, y_w, &x, dict, &codes, &cfg.patch, cfg.lambda_s, cfg.lambda_z,
            )?);
        }
        if cfg.image_iters > 0 {
            x = match op_w.kind() {
                SensingKind::PixelMask => {
                    image_update_direct(op_w, y_w, dict, &codes, &cfg.patch, cfg.lambda_s)?
                }
                SensingKind::FourierMask => {
                    let params = ImageUpdateParams {
                        lambda_s: cfg.lambda_s,
                        iters: cfg.image_iters,
                        tau: None,
                        mode: ImageUpdateMode::ProxGrad,
                    };
                    image_update_proxgrad(op_w, y_w, dict, &codes, &cfg.patch, &params, &x)?
                }
            };
            patches = extract_patches(&x, &cfg.patch)?;
            if trace_objectives {
                trace.push(objective_instant(
                    op_w, y_w, &x, dict, &codes, &cfg.patch, cfg.lambda_s, cfg.lambda_z,
                )?);
            }
        }
    }
    let objective_post = objective_instant(
        op_w,
        y_w,
        &x,
        &state.dictionary,
        &codes,
        &cfg.patch,
        cfg.lambda_s,
        cfg.lambda_z,
    )?;
    update_accumulators(&mut state.accumulators, &patches, &codes, cfg.rho);
    let diagnostics = WindowDiagnostics {
        window_index: state.windows_done,
        frames: window,
        objective_pre,
        objective_post,
        code_sparsity: codes.sparsity_fraction(),
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        init_fallback: ws.zero_sample_fallback,
    };
    state.prev_codes = Some(codes);
    state.windows_done += 1;
    Ok(MinibatchOutput { frames: x, diagnostics, objective_trace: trace })
}

/// Run-level options of [`reconstruct_stream`].
#[derive(Debug, Clone)]
pub struct ReconOptions<R: Real> {
    /// Starting dictionary; defaults to the DCT dictionary of the patch
    /// shape under the variant's constraint.
    pub initial_dictionary: Option<Dictionary<R>>,
    /// Record the instantaneous objective after every step of every window.
    pub trace_objectives: bool,
}

impl<R: Real> Default for ReconOptions<R> {
    fn default() -> Self {
        ReconOptions { initial_dictionary: None, trace_objectives: false }
    }
}

/// Objective trace of one window (only when tracing is enabled).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowTrace<R: Real> {
    pub window_index: usize,
    pub objectives: Vec<R>,
}

/// Output of a streaming reconstruction.
#[derive(Debug, Clone)]
pub struct ReconOutput<R: Real> {
    /// Merged estimate of every frame of the stream.
    pub frames: ComplexTensor<R>,
    /// Final learned dictionary.
    pub dictionary: Dictionary<R>,
    pub diagnostics: Vec<WindowDiagnostics<R>>,
    pub traces: Vec<WindowTrace<R>>,
}

/// Reconstructs a full measurement stream: windows the frames, processes
/// each window in order (repeating the schedule `passes` times while
/// continuing the same state), and merges the window estimates. Errors are
/// annotated with the failing window index.
pub fn reconstruct_stream<R: Real>(
    op: &SensingOperator<R>,
    y: &[Cx<R>],
    cfg: &OnairConfig<R>,
    options: &ReconOptions<R>,
) -> Result<ReconOutput<R>> {
    cfg.validate()?;
    if y.len() != op.measurement_len() {
        return Err(CoreError::InvalidArgument(format!(
            "measurement vector has length {}, expected {}",
            y.len(),
            op.measurement_len()
        )));
    }
    let plan = sliding_windows(op.num_frames(), cfg.window_len, cfg.window_stride)?;
    let dict0 = initial_dictionary(cfg, options)?;
    let mut state = ReconState::new(op.num_frames(), op.frame_dims(), dict0);
    let mut diagnostics = Vec::new();
    let mut traces = Vec::new();
    for _pass in 0..cfg.passes {
        for &(start, end) in &plan.windows {
            let op_w = op.slice_frames(start, end);
            let y_w = &y[op.measurement_range(start, end)];
            let out = process_minibatch(&mut state, (start, end), y_w, &op_w, cfg, options.trace_objectives)
                .map_err(|e| window_context(state.windows_done, e))?;
            rho_weighted_merge(&mut state, (start, end), &out.frames, cfg.rho);
            if options.trace_objectives {
                traces.push(WindowTrace {
                    window_index: out.diagnostics.window_index,
                    objectives: out.objective_trace,
                });
            }
            diagnostics.push(out.diagnostics);
        }
    }
    let frames = state.merged_frames()?;
    Ok(ReconOutput { frames, dictionary: state.dictionary, diagnostics, traces })
}

/// Batch reconstruction: the whole stream as a single window, processed
/// once with the first-window iteration count and the same subroutines as
/// the online path.
pub fn batch_reconstruct<R: Real>(
    op: &SensingOperator<R>,
    y: &[Cx<R>],
    cfg: &OnairConfig<R>,
) -> Result<ComplexTensor<R>> {
    cfg.validate()?;
    if y.len() != op.measurement_len() {
        return Err(CoreError::InvalidArgument(format!(
            "measurement vector has length {}, expected {}",
            y.len(),
            op.measurement_len()
        )));
    }
    let n = op.num_frames();
    let dict0 = build_dct_dictionary(cfg.patch.patch, cfg.variant.constraint())?;
    let mut state = ReconState::new(n, op.frame_dims(), dict0);
    let out = process_minibatch(&mut state, (0, n), y, op, cfg, false)?;
    Ok(out.frames)
}

/// Instantaneous objective of one window:
/// `‖y − Ax‖₂² + λ_S (Σₗ‖Pₗx − Dzₗ‖₂² + λ_Z²‖Z‖₀)`,
/// where `‖Z‖₀` counts the stored nonzero code entries.
pub fn objective_instant<R: Real>(
    op: &SensingOperator<R>,
    y: &[Cx<R>],
    x: &ComplexTensor<R>,
    dict: &Dictionary<R>,
    codes: &SparseCodeMatrix<R>,
    patch: &PatchConfig,
    lambda_s: R,
    lambda_z: R,
) -> Result<R> {
    let fit = objective_xstep(op, y, x, dict, codes, patch, lambda_s)?;
    let nnz = R::from_usize(codes.nnz()).expect("code count fits in the scalar type");
    Ok(fit + lambda_s * lambda_z * lambda_z * nnz)
}

fn initial_dictionary<R: Real>(
    cfg: &OnairConfig<R>,
    options: &ReconOptions<R>,
) -> Result<Dictionary<R>> {
    match &options.initial_dictionary {
        None => build_dct_dictionary(cfg.patch.patch, cfg.variant.constraint()),
        Some(d) => {
            if d.constraint() != cfg.variant.constraint() {
                return Err(CoreError::InvalidArgument(format!(
                    "initial dictionary constraint {:?} does not match the variant's {:?}",
                    d.constraint(),
                    cfg.variant.constraint()
                )));
            }
            if d.atom_len() != cfg.patch.patch_len() || d.reshape_dims() != cfg.patch.reshape_dims()
            {
                return Err(CoreError::InvalidArgument(
                    "initial dictionary shape does not match the patch shape".to_string(),
                ));
            }
            let tol = R::of(1e-8);
            if d.max_atom_norm_deviation() > tol {
                return Err(CoreError::InvalidArgument(
                    "initial dictionary atoms must be unit-norm".to_string(),
                ));
            }
            Ok(d.clone())
        }
    }
}

fn window_context(index: usize, e: CoreError) -> CoreError {
    match e {
        CoreError::InvalidArgument(m) => CoreError::InvalidArgument(format!("window {index}: {m}")),
        CoreError::NumericalDegeneracy(m) => {
            CoreError::NumericalDegeneracy(format!("window {index}: {m}"))
        }
    }
}

/// Scatters measured values onto mask-true positions (row-major order).
fn scatter<R: Real>(dest: &mut [Cx<R>], mask: &[bool], values: &[Cx<R>]) {
    let mut next = 0;
    for (d, &m) in dest.iter_mut().zip(mask) {
        if m {
            *d = values[next];
            next += 1;
        }
    }
    debug_assert_eq!(next, values.len(), "measurement segment length mismatch");
}

/// Iterative bilinear fill: each pass sets every unfilled pixel with at
/// least one filled 4-neighbor to the mean of its filled neighbors, with
/// all assignments of a pass committed simultaneously. Exact for bilinear
/// images wherever all four neighbors are known. No-op when nothing is
/// filled.
fn bilinear_fill<R: Real>(frame: &mut [Cx<R>], filled: &mut [bool], nx: usize, ny: usize) {
    if !filled.iter().any(|&b| b) {
        return;
    }
    let mut pending: Vec<usize> = (0..frame.len()).filter(|&p| !filled[p]).collect();
    while !pending.is_empty() {
        let mut updates: Vec<(usize, Cx<R>)> = Vec::new();
        for &p in &pending {
            let (px, py) = (p % nx, p / nx);
            let mut sum = Cx::new(R::zero(), R::zero());
            let mut count = 0usize;
            let mut add = |q: usize| {
                if filled[q] {
                    sum += frame[q];
                    count += 1;
                }
            };
            if px > 0 {
                add(p - 1);
            }
            if px + 1 < nx {
                add(p + 1);
            }
            if py > 0 {
                add(p - nx);
            }
            if py + 1 < ny {
                add(p + nx);
            }
            if count > 0 {
                let c = R::from_usize(count).expect("neighbor count fits");
                updates.push((p, sum / Cx::new(c, R::zero())));
            }
        }
        debug_assert!(!updates.is_empty(), "the unfilled region must shrink every pass");
        for &(p, v) in &updates {
            frame[p] = v;
            filled[p] = true;
        }
        pending.retain(|&p| !filled[p]);
    }
}

/// Fully sampled single-frame Fourier operator (forward/inverse transform
/// access for the temporal-hold initializer).
fn full_fourier<R: Real>(nx: usize, ny: usize) -> SensingOperator<R> {
    SensingOperator::new(SensingKind::FourierMask, (nx, ny), vec![vec![true; nx * ny]])
        .expect("a fully sampled single-frame operator is always valid")
}

/// Single-frame `[1, N_y, N_x]` tensor copied from a frame slice.
fn frame_tensor<R: Real>(frame: &[Cx<R>], nx: usize, ny: usize) -> ComplexTensor<R> {
    let mut t = ComplexTensor::zeros(vec![1, ny, nx]);
    t.data_mut().copy_from_slice(frame);
    t
}
