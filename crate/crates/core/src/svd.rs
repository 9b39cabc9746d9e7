//! Singular value decomposition of small dense complex matrices via
//! one-sided Jacobi rotations.
//!
//! A working copy `W` of the input is rotated on the right until all column
//! pairs are numerically orthogonal; then `σ_j = ‖w_j‖₂`, `u_j = w_j/σ_j`,
//! and `V` accumulates the applied rotations. For a column pair with
//! `a = ‖wᵢ‖²`, `d = ‖wⱼ‖²`, and `wᵢᴴwⱼ = g·e^{iφ}`, the pair is first
//! rephased by `e^{iφ}` so its Gram block becomes real, then rotated by the
//! classic angle `t = sgn(ζ)/(|ζ|+√(1+ζ²))` with `ζ = (d−a)/(2g)`.
//! One-sided Jacobi is slow but simple, deterministic, and accurate to high
//! relative precision on the patch-sized matrices this crate factorizes.

use crate::error::{CoreError, Result};
use crate::linalg::{norm, norm_sq, vdot, CMatrix};
use crate::scalar::{cx_zero, Cx, Real};

/// Thin singular value decomposition `A = U Σ Vᴴ`.
///
/// For a `p×q` input, `u` is `p×k`, `sigma` has length `k`, and `v` is `q×k`
/// with `k = min(p, q)`. Columns of `u` and `v` are orthonormal, singular
/// values are non-negative and sorted in descending order, and each column
/// pair is rephased so the largest-magnitude entry of `u_j` (lowest index on
/// ties) is real and positive, making the output deterministic.
#[derive(Debug, Clone)]
pub struct Svd<R: Real> {
    pub u: CMatrix<R>,
    pub sigma: Vec<R>,
    pub v: CMatrix<R>,
}

const MAX_SWEEPS: usize = 64;

/// Thin SVD of a dense complex matrix.
pub fn svd<R: Real>(a: &CMatrix<R>) -> Result<Svd<R>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(CoreError::InvalidArgument(
            "svd requires a non-empty matrix".to_string(),
        ));
    }
    if a.nrows() >= a.ncols() {
        svd_tall(a)
    } else {
        // A = (Aᴴ)ᴴ: factor the tall adjoint and swap the factors.
        let t = svd_tall(&a.adjoint())?;
        Ok(Svd { u: t.v, sigma: t.sigma, v: t.u })
    }
}

/// Rank-`r` truncation of the thin SVD: the leading `r` singular triplets.
pub fn truncated_svd<R: Real>(a: &CMatrix<R>, r: usize) -> Result<Svd<R>> {
    let k = a.nrows().min(a.ncols());
    if r == 0 || r > k {
        return Err(CoreError::InvalidArgument(format!(
            "truncation rank {} must lie in 1..={} for a {}x{} matrix",
            r,
            k,
            a.nrows(),
            a.ncols()
        )));
    }
    let full = svd(a)?;
    let u = CMatrix::from_fn(full.u.nrows(), r, |i, j| full.u[(i, j)]);
    let v = CMatrix::from_fn(full.v.nrows(), r, |i, j| full.v[(i, j)]);
    let sigma = full.sigma[..r].to_vec();
    Ok(Svd { u, sigma, v })
}

/// Closest matrix with orthonormal columns: the unitary polar factor `U Vᴴ`.
///
/// For rank-deficient input the null directions of `U` are completed
/// deterministically, so the result always has exactly orthonormal columns.
pub fn unitary_polar_factor<R: Real>(a: &CMatrix<R>) -> Result<CMatrix<R>> {
    if a.nrows() < a.ncols() {
        return Err(CoreError::InvalidArgument(format!(
            "polar factor with orthonormal columns requires rows >= cols, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let f = svd(a)?;
    Ok(f.u.mul_adjoint(&f.v))
}

fn svd_tall<R: Real>(a: &CMatrix<R>) -> Result<Svd<R>> {
    let p = a.nrows();
    let q = a.ncols();
    debug_assert!(p >= q);
    let mut w = a.clone();
    let mut v = CMatrix::identity(q);
    let eps = R::epsilon() * R::of(4.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..q.saturating_sub(1) {
            for j in (i + 1)..q {
                let aa = norm_sq(w.col(i));
                let dd = norm_sq(w.col(j));
                let b = vdot(w.col(i), w.col(j));
                let g = b.norm();
                if g <= eps * (aa * dd).sqrt() {
                    continue;
                }
                // Rephase column i so the off-diagonal Gram entry is real
                // positive, then rotate by the standard Jacobi angle.
                let phase = b / g;
                let zeta = (dd - aa) / (g + g);
                let t = {
                    let sign = if zeta < R::zero() { -R::one() } else { R::one() };
                    sign / (zeta.abs() + (R::one() + zeta * zeta).sqrt())
                };
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = c * t;
                if s == R::zero() {
                    continue;
                }
                rotated = true;
                rotate_pair(&mut w, i, j, phase, c, s);
                rotate_pair(&mut v, i, j, phase, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(CoreError::NumericalDegeneracy(format!(
            "one-sided jacobi svd did not converge within {MAX_SWEEPS} sweeps"
        )));
    }

    // Column norms are the singular values; sort them descending, keeping
    // the original order among ties so the output is deterministic.
    let mut order: Vec<usize> = (0..q).collect();
    let sig: Vec<R> = (0..q).map(|j| norm(w.col(j))).collect();
    order.sort_by(|&x, &y| sig[y].partial_cmp(&sig[x]).expect("singular values are finite"));

    let mut u = CMatrix::zeros(p, q);
    let mut vs = CMatrix::zeros(q, q);
    let mut sigma = Vec::with_capacity(q);
    for (dst, &src) in order.iter().enumerate() {
        let s = sig[src];
        sigma.push(s);
        if s > R::zero() {
            let inv = R::one() / s;
            for (r, val) in w.col(src).iter().enumerate() {
                u[(r, dst)] = Cx::new(val.re * inv, val.im * inv);
            }
        }
        for (r, val) in v.col(src).iter().enumerate() {
            vs[(r, dst)] = *val;
        }
    }

    complete_null_columns(&mut u, &sigma);
    canonicalize_phases(&mut u, &mut vs, &sigma);
    Ok(Svd { u, sigma, v: vs })
}

/// Applies the rephased rotation to columns `(i, j)`:
/// `wᵢ' = c·(φ·wᵢ) − s·wⱼ`, `wⱼ' = s·(φ·wᵢ) + c·wⱼ`.
fn rotate_pair<R: Real>(m: &mut CMatrix<R>, i: usize, j: usize, phase: Cx<R>, c: R, s: R) {
    let (ci, cj) = m.two_cols_mut(i, j);
    for (xi, xj) in ci.iter_mut().zip(cj.iter_mut()) {
        let wi = phase * *xi;
        let wj = *xj;
        *xi = wi * c - wj * s;
        *xj = wi * s + wj * c;
    }
}

/// Fills columns whose singular value is exactly zero with deterministic
/// orthonormal completions: the canonical basis vector with the largest
/// residual after projection onto the accepted columns (lowest index on
/// ties), normalized.
fn complete_null_columns<R: Real>(u: &mut CMatrix<R>, sigma: &[R]) {
    let p = u.nrows();
    for j in 0..sigma.len() {
        if sigma[j] > R::zero() {
            continue;
        }
        let mut best_res_sq = R::neg_infinity();
        let mut best_vec: Vec<Cx<R>> = Vec::new();
        for k in 0..p {
            let mut e: Vec<Cx<R>> = vec![cx_zero(); p];
            e[k] = Cx::new(R::one(), R::zero());
            // Project out all previously fixed columns; columns before j are
            // final, whether they came from data or from completion.
            for jj in 0..j {
                let proj = vdot(u.col(jj), &e);
                crate::linalg::axpy(-proj, u.col(jj), &mut e);
            }
            let r = norm_sq(&e);
            if r > best_res_sq {
                best_res_sq = r;
                best_vec = e;
            }
        }
        let inv = R::one() / best_res_sq.sqrt();
        for (r, val) in best_vec.iter().enumerate() {
            u[(r, j)] = Cx::new(val.re * inv, val.im * inv);
        }
    }
}

/// Rephases each singular pair so that the largest-magnitude entry of `u_j`
/// (lowest index on ties) is real and positive; `A = UΣVᴴ` is unchanged.
fn canonicalize_phases<R: Real>(u: &mut CMatrix<R>, v: &mut CMatrix<R>, sigma: &[R]) {
    for j in 0..sigma.len() {
        let col = u.col(j);
        let mut imax = 0;
        let mut vmax = R::neg_infinity();
        for (i, z) in col.iter().enumerate() {
            let m = z.norm_sqr();
            if m > vmax {
                vmax = m;
                imax = i;
            }
        }
        let pivot = col[imax];
        let mag = pivot.norm();
        if mag == R::zero() {
            continue;
        }
        let ph = Cx::new(pivot.re / mag, pivot.im / mag).conj();
        for z in u.col_mut(j) {
            *z *= ph;
        }
        if sigma[j] > R::zero() {
            for z in v.col_mut(j) {
                *z *= ph;
            }
        }
    }
}
