//! Image-update step: minimize
//! `‖Ax − y‖₂² + λ_S Σₗ‖Pₗx − Dzₗ‖₂²`
//! over the window frames at fixed dictionary and codes.
//!
//! When `AᴴA` is diagonal (pixel masks) the normal equation is solved
//! exactly by an elementwise division. Otherwise (Fourier sensing) a
//! proximal-gradient iteration is used whose prox is itself an exact
//! diagonal solve; with the default step `τ = 1/‖A‖₂²` every iteration
//! decreases the objective and the fixed point solves the same normal
//! equation.

use crate::dict::Dictionary;
use crate::error::{CoreError, Result};
use crate::scalar::{Cx, Real};
use crate::sensing::{SensingKind, SensingOperator};
use crate::sparse::SparseCodeMatrix;
use crate::tensor::{aggregate_patches, extract_patches, ComplexTensor, PatchConfig};

/// Parameters of the image-update step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageUpdateParams<R: Real> {
    /// Patch-fidelity weight `λ_S ≥ 0`.
    pub lambda_s: R,
    /// Proximal-gradient iteration count `K̃`.
    pub iters: usize,
    /// Step size; `None` selects the monotone default `1/‖A‖₂²`.
    pub tau: Option<R>,
    pub mode: ImageUpdateMode,
}

/// Solver choice for the image-update step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageUpdateMode {
    /// Exact diagonal normal-equation solve (pixel masks only).
    Direct,
    /// Proximal-gradient iterations (any sensing kind).
    ProxGrad,
}

/// Dispatches to the direct or proximal-gradient solver.
pub fn image_update<R: Real>(
    op: &SensingOperator<R>,
    y: &[Cx<R>],
    dict: &Dictionary<R>,
    codes: &SparseCodeMatrix<R>,
    cfg: &PatchConfig,
    params: &ImageUpdateParams<R>,
    x_init: &ComplexTensor<R>,
) -> Result<ComplexTensor<R>> {
    match params.mode {
        ImageUpdateMode::Direct => image_update_direct(op, y, dict, codes, cfg, params.lambda_s),
        ImageUpdateMode::ProxGrad => image_update_proxgrad(op, y, dict, codes, cfg, params, x_init),
    }
}

/// Exact solution of the normal equation
/// `(AᴴA + λ_S ΣₗPₗᵀPₗ) x = Aᴴy + λ_S ΣₗPₗᵀDzₗ`
/// when `AᴴA` is the diagonal pixel-sampling indicator: elementwise,
/// `x = (Aᴴy + λ_S·agg) / (mask + λ_S·coverage)`.
pub fn image_update_direct<R: Real>(
    op: &SensingOperator<R>,
    y: &[Cx<R>],
    dict: &Dictionary<R>,
    codes: &SparseCodeMatrix<R>,
    cfg: &PatchConfig,
    lambda_s: R,
) -> Result<ComplexTensor<R>> {
    if op.kind() != SensingKind::PixelMask {
        return Err(CoreError::InvalidArgument(
            "the direct image update requires a diagonal AᴴA (pixel mask)".to_string(),
        ));
    }
    let mut x = op.adjoint(y)?;
    let (agg, cov) = synthesis_aggregate(dict, codes, x.dims(), cfg)?;
    let (nx, ny) = op.frame_dims();
    let frame_len = nx * ny;
    for t in 0..op.num_frames() {
        let mask = op.mask(t);
        for p in 0..frame_len {
            let idx = t * frame_len + p;
            let sampled = if mask[p] { R::one() } else { R::zero() };
            let denom = sampled + lambda_s * cov[idx];
            if denom == R::zero() {
                return Err(CoreError::NumericalDegeneracy(format!(
                    "pixel {p} of frame {t} is unsampled and carries no patch term (λ_S = 0)"
                )));
            }
            let num = x.data()[idx] + agg.data()[idx] * Cx::new(lambda_s, R::zero());
            x.data_mut()[idx] = num / Cx::new(denom, R::zero());
        }
    }
    Ok(x)
}

/// Proximal-gradient minimization of the window objective starting from
/// `x_init`.
///
/// Each iteration takes the gradient step `v = x − τ·Aᴴ(Ax − y)` and applies
/// the patch-fidelity prox with weight `τλ_S/2`, which together form an
/// exact proximal-gradient step on the objective (the data term's gradient
/// is `2Aᴴ(Ax−y)`, so the effective step on it is `τ/2 ≤ 1/(2‖A‖₂²)`, the
/// monotone regime); the fixed point solves the normal equation above.
pub fn image_update_proxgrad<R: Real>(
    op: &SensingOperator<R>,
    y: &[Cx<R>],
    dict: &Dictionary<R>,
    codes: &SparseCodeMatrix<R>,
    cfg: &PatchConfig,
    params: &ImageUpdateParams<R>,
    x_init: &ComplexTensor<R>,
) -> Result<ComplexTensor<R>> {
    let norm_sq = op.op_norm_sq();
    let tau = match params.tau {
        Some(t) => {
            if norm_sq > R::zero() && t > R::one() / norm_sq {
                return Err(CoreError::InvalidArgument(format!(
                    "step size {t} exceeds the monotone bound 1/‖A‖₂² = {}",
                    R::one() / norm_sq
                )));
            }
            if !(t > R::zero()) {
                return Err(CoreError::InvalidArgument(format!(
                    "step size {t} must be positive"
                )));
            }
            t
        }
        None => {
            if norm_sq > R::zero() {
                R::one() / norm_sq
            } else {
                R::one()
            }
        }
    };
    let half = R::of(0.5);
    let weight = tau * params.lambda_s * half;
    let mut x = x_init.clone();
    for _ in 0..params.iters {
        let grad = op.normal_residual(&x, y)?;
        let mut v = x;
        for (vp, gp) in v.data_mut().iter_mut().zip(grad.data()) {
            *vp -= *gp * Cx::new(tau, R::zero());
        }
        x = prox_patch_lsq(&v, dict, codes, cfg, weight)?;
    }
    Ok(x)
}

/// Exact patch-fidelity prox: the minimizer of
/// `0.5‖v − z‖₂² + w Σₗ‖Pₗz − Dzₗ‖₂²`,
/// given elementwise by `z = (v + 2w·agg) / (1 + 2w·coverage)`.
pub fn prox_patch_lsq<R: Real>(
    v: &ComplexTensor<R>,
    dict: &Dictionary<R>,
    codes: &SparseCodeMatrix<R>,
    cfg: &PatchConfig,
    weight: R,
) -> Result<ComplexTensor<R>> {
    let (agg, cov) = synthesis_aggregate(dict, codes, v.dims(), cfg)?;
    let two_w = weight + weight;
    let mut out = v.clone();
    for ((zp, ap), cp) in out.data_mut().iter_mut().zip(agg.data()).zip(&cov) {
        let num = *zp + *ap * Cx::new(two_w, R::zero());
        *zp = num / Cx::new(R::one() + two_w * *cp, R::zero());
    }
    Ok(out)
}

/// Window objective of the image-update step:
/// `‖Ax − y‖₂² + λ_S Σₗ‖Pₗx − Dzₗ‖₂²`.
pub fn objective_xstep<R: Real>(
    op: &SensingOperator<R>,
    y: &[Cx<R>],
    x: &ComplexTensor<R>,
    dict: &Dictionary<R>,
    codes: &SparseCodeMatrix<R>,
    cfg: &PatchConfig,
    lambda_s: R,
) -> Result<R> {
    let ax = op.apply(x)?;
    if ax.len() != y.len() {
        return Err(CoreError::InvalidArgument(format!(
            "measurement vector has length {}, expected {}",
            y.len(),
            ax.len()
        )));
    }
    let data: R = ax
        .iter()
        .zip(y)
        .map(|(a, b)| (*a - *b).norm_sqr())
        .sum();
    let mut resid = extract_patches(x, cfg)?;
    codes.check_dims(dict.num_atoms(), resid.ncols())?;
    resid.add_scaled(-R::one(), &codes.synthesize(dict.atoms()));
    Ok(data + lambda_s * resid.frob_norm_sq())
}

/// Aggregated synthesis `Σₗ PₗᵀDzₗ` and per-pixel coverage for the window.
fn synthesis_aggregate<R: Real>(
    dict: &Dictionary<R>,
    codes: &SparseCodeMatrix<R>,
    dims: &[usize],
    cfg: &PatchConfig,
) -> Result<(ComplexTensor<R>, Vec<R>)> {
    let expected = cfg.num_patches(dims);
    codes.check_dims(dict.num_atoms(), expected)?;
    let dz = codes.synthesize(dict.atoms());
    aggregate_patches(&dz, dims, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dict::{build_dct_dictionary, DictConstraint};
    use crate::sensing::{gen_mask, MaskPattern, MaskSpec};

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    fn pixel_op(nx: usize, ny: usize, frames: usize, full: bool) -> SensingOperator<f64> {
        let masks = vec![vec![full; nx * ny]; frames];
        SensingOperator::new(SensingKind::PixelMask, (nx, ny), masks).unwrap()
    }

    fn cfg22() -> PatchConfig {
        PatchConfig { patch: (2, 2, 1), spatial_stride: 1, temporal_stride: 1 }
    }

    #[test]
    fn full_mask_without_patch_term_returns_the_measurements() {
        let op = pixel_op(2, 2, 1, true);
        let dict = build_dct_dictionary::<f64>((2, 2, 1), DictConstraint::FullRank).unwrap();
        let codes = SparseCodeMatrix::zeros(1, 4);
        let y: Vec<Cx<f64>> = (0..4).map(|i| c(i as f64, -(i as f64))).collect();
        let x = image_update_direct(&op, &y, &dict, &codes, &cfg22(), 0.0).unwrap();
        assert_eq!(x.data(), y.as_slice(), "x = Aᴴy exactly at full sampling, λ_S = 0");
    }

    #[test]
    fn empty_mask_returns_the_pure_dictionary_reconstruction() {
        let op = pixel_op(2, 2, 1, false);
        let dict = build_dct_dictionary::<f64>((2, 2, 1), DictConstraint::FullRank).unwrap();
        let mut codes = SparseCodeMatrix::zeros(1, 4);
        codes.set_col(0, vec![(0, c(2.0, 0.0))]);
        let x = image_update_direct(&op, &[], &dict, &codes, &cfg22(), 0.7).unwrap();
        // Single patch covering the frame: coverage ≡ 1, so x = D z exactly.
        let dz = codes.synthesize(dict.atoms());
        for (got, want) in x.data().iter().zip(dz.col(0)) {
            assert!((got - want).norm() < 1e-14, "x = aggregate(DZ)/coverage");
        }
    }

    #[test]
    fn unsampled_pixel_without_patch_weight_is_degenerate() {
        let op = pixel_op(2, 2, 1, false);
        let dict = build_dct_dictionary::<f64>((2, 2, 1), DictConstraint::FullRank).unwrap();
        let codes = SparseCodeMatrix::zeros(1, 4);
        let err = image_update_direct(&op, &[], &dict, &codes, &cfg22(), 0.0).unwrap_err();
        assert!(matches!(err, CoreError::NumericalDegeneracy(_)), "zero diagonal is an error");
    }

    #[test]
    fn prox_reduces_to_identity_and_to_uniform_shrinkage() {
        let dict = build_dct_dictionary::<f64>((2, 2, 1), DictConstraint::FullRank).unwrap();
        let codes = SparseCodeMatrix::zeros(1, 4);
        let mut v = ComplexTensor::zeros(vec![1, 2, 2]);
        for (i, z) in v.data_mut().iter_mut().enumerate() {
            *z = c(1.0 + i as f64, -0.5);
        }
        let id = prox_patch_lsq(&v, &dict, &codes, &cfg22(), 0.0).unwrap();
        assert_eq!(id.data(), v.data(), "zero weight is the identity");

        let w = 0.3;
        let shrunk = prox_patch_lsq(&v, &dict, &codes, &cfg22(), w).unwrap();
        for (s, orig) in shrunk.data().iter().zip(v.data()) {
            let want = orig / c(1.0 + 2.0 * w, 0.0);
            assert!((s - want).norm() < 1e-14, "coverage ≡ 1, DZ = 0 → v/(1+2w)");
        }
    }

    #[test]
    fn prox_output_satisfies_first_order_optimality() {
        let cfg = PatchConfig { patch: (2, 2, 1), spatial_stride: 2, temporal_stride: 1 };
        let dims = vec![1usize, 5, 5];
        let dict = build_dct_dictionary::<f64>((2, 2, 1), DictConstraint::FullRank).unwrap();
        let mut codes = SparseCodeMatrix::zeros(9, 4);
        codes.set_col(1, vec![(0, c(1.0, -1.0)), (4, c(0.0, 2.0))]);
        codes.set_col(3, vec![(2, c(-0.7, 0.0))]);
        let mut v = ComplexTensor::zeros(dims.clone());
        for (i, z) in v.data_mut().iter_mut().enumerate() {
            *z = c((i as f64 * 0.31).sin(), (i as f64 * 0.17).cos());
        }
        let w = 0.45;
        let z = prox_patch_lsq(&v, &dict, &codes, &cfg, w).unwrap();
        // Gradient of 0.5‖v−z‖² + w·Σ‖Pz − DZ‖²: (z − v) + 2w(cov∘z − agg).
        let (agg, cov) = synthesis_aggregate(&dict, &codes, &dims, &cfg).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..z.len() {
            let g = (z.data()[i] - v.data()[i])
                + (z.data()[i] * c(cov[i], 0.0) - agg.data()[i]) * c(2.0 * w, 0.0);
            worst = worst.max(g.norm());
        }
        assert!(worst < 1e-12, "first-order optimality of the prox, got {worst}");
    }

    #[test]
    fn proxgrad_full_fourier_reaches_the_adjoint_in_one_step() {
        let (nx, ny) = (4, 4);
        let masks = vec![vec![true; nx * ny]; 1];
        let op = SensingOperator::<f64>::new(SensingKind::FourierMask, (nx, ny), masks).unwrap();
        let dict = build_dct_dictionary::<f64>((2, 2, 1), DictConstraint::FullRank).unwrap();
        let codes = SparseCodeMatrix::zeros(9, 4);
        let cfg = PatchConfig { patch: (2, 2, 1), spatial_stride: 1, temporal_stride: 1 };
        let y: Vec<Cx<f64>> = (0..nx * ny).map(|i| c((i as f64).cos(), (i as f64).sin())).collect();
        let x0 = ComplexTensor::zeros(vec![1, ny, nx]);
        let params = ImageUpdateParams { lambda_s: 0.0, iters: 1, tau: Some(1.0), mode: ImageUpdateMode::ProxGrad };
        let x = image_update_proxgrad(&op, &y, &dict, &codes, &cfg, &params, &x0).unwrap();
        let want = op.adjoint(&y).unwrap();
        for (a, b) in x.data().iter().zip(want.data()) {
            assert!((a - b).norm() < 1e-12, "unit-curvature quadratic converges in one step");
        }

        let frozen = ImageUpdateParams { iters: 0, ..params };
        let same = image_update_proxgrad(&op, &y, &dict, &codes, &cfg, &frozen, &x0).unwrap();
        assert_eq!(same.data(), x0.data(), "K̃ = 0 returns the initializer");

        let bad = ImageUpdateParams { tau: Some(1.5), ..params };
        assert!(
            image_update_proxgrad(&op, &y, &dict, &codes, &cfg, &bad, &x0).is_err(),
            "step sizes beyond 1/‖A‖₂² are rejected"
        );
    }

    #[test]
    fn proxgrad_descends_and_approaches_the_direct_solution() {
        let spec = MaskSpec {
            pattern: MaskPattern::UniformRandom { keep_fraction: 0.5 },
            seed: 21,
            per_frame: true,
        };
        let masks = gen_mask(&spec, (4, 4), 2).unwrap();
        let op = SensingOperator::<f64>::new(SensingKind::PixelMask, (4, 4), masks).unwrap();
        let dict = build_dct_dictionary::<f64>((2, 2, 2), DictConstraint::FullRank).unwrap();
        let cfg = PatchConfig { patch: (2, 2, 2), spatial_stride: 1, temporal_stride: 1 };
        let dims = vec![2usize, 4, 4];
        let m = cfg.num_patches(&dims);
        let mut codes = SparseCodeMatrix::zeros(m, 8);
        codes.set_col(0, vec![(0, c(1.0, 0.5)), (3, c(-0.3, 0.0))]);
        codes.set_col(5, vec![(1, c(0.4, -0.2))]);
        let mut truth = ComplexTensor::zeros(dims.clone());
        for (i, z) in truth.data_mut().iter_mut().enumerate() {
            *z = c((i as f64 * 0.13).sin(), (i as f64 * 0.41).cos());
        }
        let y = op.apply(&truth).unwrap();
        let lambda_s = 0.8;
        let x0 = op.adjoint(&y).unwrap();

        let mut prev = objective_xstep(&op, &y, &x0, &dict, &codes, &cfg, lambda_s).unwrap();
        let mut x = x0;
        let params = ImageUpdateParams { lambda_s, iters: 1, tau: None, mode: ImageUpdateMode::ProxGrad };
        for _ in 0..60 {
            x = image_update_proxgrad(&op, &y, &dict, &codes, &cfg, &params, &x).unwrap();
            let now = objective_xstep(&op, &y, &x, &dict, &codes, &cfg, lambda_s).unwrap();
            assert!(now <= prev + 1e-9 * prev.max(1.0), "objective must not increase");
            prev = now;
        }
        let direct = image_update_direct(&op, &y, &dict, &codes, &cfg, lambda_s).unwrap();
        let best = objective_xstep(&op, &y, &direct, &dict, &codes, &cfg, lambda_s).unwrap();
        assert!(
            (prev - best) <= 1e-6 * best.max(1.0),
            "proximal iterations approach the exact normal-equation objective: {prev} vs {best}"
        );
    }
}
