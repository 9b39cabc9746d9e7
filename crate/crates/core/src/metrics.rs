//! Reconstruction quality metrics.
//!
//! PSNR is `20·log10(peak/rmse)` with the peak taken as the largest
//! reference magnitude (over the whole stack, or per frame), and NRMSE is
//! `‖x̂ − x_ref‖₂ / ‖x_ref‖₂ × 100%`. Magnitudes are used throughout, so the
//! metrics apply unchanged to complex-valued data.

use crate::error::{CoreError, Result};
use crate::scalar::{Cx, Real};
use crate::tensor::ComplexTensor;

/// Quality summary of a reconstruction against a reference.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport<R: Real> {
    pub psnr_3d: R,
    pub psnr_per_frame: Vec<R>,
    pub nrmse_percent: R,
    pub num_frames: usize,
}

impl<R: Real> MetricReport<R> {
    /// Evaluates all metrics for a 3-d `[frames, height, width]` pair.
    pub fn compute(x_hat: &ComplexTensor<R>, x_ref: &ComplexTensor<R>) -> Result<Self> {
        Ok(MetricReport {
            psnr_3d: psnr_3d(x_hat, x_ref)?,
            psnr_per_frame: psnr_per_frame(x_hat, x_ref)?,
            nrmse_percent: nrmse_percent(x_hat, x_ref)?,
            num_frames: x_ref.dims()[0],
        })
    }
}

/// PSNR over the whole stack, with the peak taken over the whole reference.
/// An exact match yields the `+∞` sentinel.
pub fn psnr_3d<R: Real>(x_hat: &ComplexTensor<R>, x_ref: &ComplexTensor<R>) -> Result<R> {
    check_pair(x_hat, x_ref)?;
    Ok(psnr_slices(x_hat.data(), x_ref.data()))
}

/// Per-frame PSNR of a `[frames, height, width]` stack; the peak is taken
/// per reference frame.
pub fn psnr_per_frame<R: Real>(
    x_hat: &ComplexTensor<R>,
    x_ref: &ComplexTensor<R>,
) -> Result<Vec<R>> {
    check_pair(x_hat, x_ref)?;
    if x_ref.dims().len() != 3 {
        return Err(CoreError::InvalidArgument(format!(
            "per-frame PSNR requires a 3-d stack, got {} dimensions",
            x_ref.dims().len()
        )));
    }
    Ok((0..x_ref.dims()[0])
        .map(|t| psnr_slices(x_hat.frame(t), x_ref.frame(t)))
        .collect())
}

/// Normalized root-mean-square error `‖x̂ − x_ref‖₂/‖x_ref‖₂` in percent.
pub fn nrmse_percent<R: Real>(x_hat: &ComplexTensor<R>, x_ref: &ComplexTensor<R>) -> Result<R> {
    check_pair(x_hat, x_ref)?;
    let err_sq: R = diff_norm_sq(x_hat.data(), x_ref.data());
    let ref_sq: R = x_ref.data().iter().map(|z| z.norm_sqr()).sum();
    Ok(R::of(100.0) * (err_sq / ref_sq).sqrt())
}

fn check_pair<R: Real>(x_hat: &ComplexTensor<R>, x_ref: &ComplexTensor<R>) -> Result<()> {
    if x_hat.dims() != x_ref.dims() {
        return Err(CoreError::InvalidArgument(format!(
            "dimension mismatch: reconstruction {:?} vs reference {:?}",
            x_hat.dims(),
            x_ref.dims()
        )));
    }
    if x_ref.data().iter().all(|z| *z == Cx::new(R::zero(), R::zero())) {
        return Err(CoreError::InvalidArgument(
            "the reference is identically zero".to_string(),
        ));
    }
    Ok(())
}

fn diff_norm_sq<R: Real>(a: &[Cx<R>], b: &[Cx<R>]) -> R {
    a.iter().zip(b).map(|(x, y)| (*x - *y).norm_sqr()).sum()
}

fn psnr_slices<R: Real>(hat: &[Cx<R>], reference: &[Cx<R>]) -> R {
    let err_sq = diff_norm_sq(hat, reference);
    if err_sq == R::zero() {
        return R::infinity();
    }
    let peak = reference
        .iter()
        .map(|z| z.norm())
        .fold(R::zero(), R::max);
    let rmse = (err_sq / R::from_usize(hat.len()).expect("slice length fits")).sqrt();
    R::of(20.0) * (peak / rmse).log10()
}
