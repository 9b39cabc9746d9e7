//! Dictionary-learning steps over patch minibatches, with constant-memory
//! recursive history.
//!
//! Two families are implemented. The block-coordinate family alternates a
//! closed-form sparse-code update
//! `ĉᵢ = min(|H_λ((Eᵢ)ᴴdᵢ)|, L) ⊙ e^{j∠(Eᵢ)ᴴdᵢ}` with a rank-constrained
//! atom update obtained from a truncated SVD of the reshaped history
//! correlation `u = qᵢ − D gᵢ + dᵢ[gᵢ]ᵢ`. The unitary family hard-thresholds
//! the analysis coefficients `DᴴPᵗ` and refits the dictionary as the
//! orthogonal Procrustes solution. All history enters through the
//! accumulators `Q ← ρQ + PᵗCᵗ`, `G ← ρG + (Cᵗ)ᴴCᵗ`, updated once per
//! minibatch with the final codes.

use crate::dict::{DictConstraint, Dictionary};
use crate::error::{CoreError, Result};
use crate::linalg::{axpy, norm_sq, CMatrix};
use crate::scalar::{cx_zero, Cx, Real};
use crate::sparse::SparseCodeMatrix;
use crate::svd::{truncated_svd, unitary_polar_factor};

/// Forgetting-weighted sufficient statistics of all past minibatches.
///
/// `q` and `g` are the recursions `Qᵗ = ρQᵗ⁻¹ + PᵗCᵗ` and
/// `Gᵗ = ρGᵗ⁻¹ + (Cᵗ)ᴴCᵗ`; `patch_energy` and `code_l0` carry the matching
/// `ρ`-weighted sums of `‖Pᵗ‖_F²` and of stored code nonzeros, which appear
/// as constants of the weighted surrogate objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulators<R: Real> {
    pub q: CMatrix<R>,
    pub g: CMatrix<R>,
    pub patch_energy: R,
    pub code_l0: R,
}

impl<R: Real> Accumulators<R> {
    /// Zero history for an `n × m` dictionary.
    pub fn zeros(atom_len: usize, num_atoms: usize) -> Self {
        Accumulators {
            q: CMatrix::zeros(atom_len, num_atoms),
            g: CMatrix::zeros(num_atoms, num_atoms),
            patch_energy: R::zero(),
            code_l0: R::zero(),
        }
    }
}

/// Commits one minibatch into the accumulators:
/// `Q ← ρQ + PᵗCᵗ`, `G ← ρG + (Cᵗ)ᴴCᵗ`, plus the scalar recursions.
pub fn update_accumulators<R: Real>(
    acc: &mut Accumulators<R>,
    patches: &CMatrix<R>,
    codes: &SparseCodeMatrix<R>,
    rho: R,
) {
    acc.q.scale_real(rho);
    let pc = codes.left_mul_dense(patches);
    acc.q.add_scaled(R::one(), &pc);
    acc.g.scale_real(rho);
    acc.g.add_scaled(R::one(), &codes.gram());
    acc.patch_energy = rho * acc.patch_energy + patches.frob_norm_sq();
    acc.code_l0 = rho * acc.code_l0 + R::of(codes.nnz() as f64);
}

/// Elementwise hard thresholding: entries with magnitude below `λ` become
/// zero; entries at or above `λ` pass through unchanged.
pub fn hard_threshold<R: Real>(v: &[Cx<R>], lambda: R) -> Vec<Cx<R>> {
    v.iter()
        .map(|&z| if z.norm() < lambda { cx_zero() } else { z })
        .collect()
}

/// Closed-form update of sparse-code column `cᵢ` against the current
/// residual, computed without materializing `Eᵢ`:
/// `b = (Pᵗ)ᴴdᵢ − Cᵗ(Dᴴdᵢ) + cᵢ`, then hard-threshold at `λ_Z`, clip
/// magnitudes at `L`, and keep the phases of `b`.
pub fn sparse_code_atom<R: Real>(
    i: usize,
    dict: &Dictionary<R>,
    codes: &mut SparseCodeMatrix<R>,
    patches: &CMatrix<R>,
    lambda_z: R,
    linf_bound: R,
) -> Result<()> {
    if !(linf_bound > lambda_z) {
        return Err(CoreError::InvalidArgument(format!(
            "magnitude bound {linf_bound} must exceed threshold {lambda_z} for the closed form"
        )));
    }
    codes.check_dims(dict.num_atoms(), patches.ncols())?;
    let di = dict.atom(i);
    let w = dict.atoms().matvec_adj(di);
    let mut b = patches.matvec_adj(di);
    let cw = codes.mul_vec(&w);
    for (bl, s) in b.iter_mut().zip(&cw) {
        *bl -= *s;
    }
    for &(l, v) in codes.col(i) {
        b[l as usize] += v;
    }
    let mut entries = Vec::new();
    for (l, &bl) in b.iter().enumerate() {
        let mag = bl.norm();
        if mag < lambda_z || mag == R::zero() {
            continue;
        }
        let value = if mag > linf_bound {
            bl * (linf_bound / mag)
        } else {
            bl
        };
        entries.push((l as u32, value));
    }
    codes.set_col(i, entries);
    Ok(())
}

/// Rank-constrained update of atom `dᵢ` from the forgetting-weighted
/// history:
/// `qᵢ = ρ·Q[:,i] + Pᵗcᵢ`, `gᵢ = ρ·G[:,i] + (Cᵗ)ᴴcᵢ`,
/// `u = qᵢ − D gᵢ + dᵢ[gᵢ]ᵢ`, then the unit-norm rank-`r` projection of the
/// space-time reshape of `u`. When the atom was never used (`gᵢ = 0`), the
/// first canonical basis vector is substituted.
pub fn update_atom<R: Real>(
    i: usize,
    dict: &mut Dictionary<R>,
    codes: &SparseCodeMatrix<R>,
    patches: &CMatrix<R>,
    acc: &Accumulators<R>,
    rho: R,
) -> Result<()> {
    codes.check_dims(dict.num_atoms(), patches.ncols())?;
    let n = dict.atom_len();
    let m = dict.num_atoms();

    let mut g = acc.g.col(i).to_vec();
    for v in &mut g {
        *v = Cx::new(v.re * rho, v.im * rho);
    }
    for (gk, cur) in g.iter_mut().zip(codes.adjoint_mul_col(i)) {
        *gk += cur;
    }
    if g.iter().all(|z| z.re == R::zero() && z.im == R::zero()) {
        let atom = dict.atoms_mut().col_mut(i);
        atom.fill(cx_zero());
        atom[0] = Cx::new(R::one(), R::zero());
        return Ok(());
    }

    let mut u = acc.q.col(i).to_vec();
    for v in &mut u {
        *v = Cx::new(v.re * rho, v.im * rho);
    }
    let pc = codes.left_mul_dense_col(patches, i);
    for (uk, cur) in u.iter_mut().zip(&pc) {
        *uk += *cur;
    }
    // u ← u − D g + dᵢ gᵢ: remove every atom's contribution except the one
    // being replaced.
    for k in 0..m {
        if k == i {
            continue;
        }
        axpy(-g[k], dict.atom(k), &mut u);
    }
    debug_assert_eq!(u.len(), n);

    let (n1, n2) = dict.reshape_dims();
    let r = dict.effective_rank();
    let new_atom = if r >= n1.min(n2) {
        // Full-rank truncation of the reshape is the identity, so the
        // minimizer is exactly u/‖u‖₂; skip the SVD.
        let nrm = norm_sq(&u).sqrt();
        if nrm == R::zero() {
            let mut e = vec![cx_zero(); n];
            e[0] = Cx::new(R::one(), R::zero());
            e
        } else {
            let inv = R::one() / nrm;
            u.iter().map(|z| Cx::new(z.re * inv, z.im * inv)).collect()
        }
    } else {
        let reshaped = CMatrix::from_col_major(n1, n2, u)?;
        let f = truncated_svd(&reshaped, r)?;
        let scale: R = f.sigma.iter().map(|&s| s * s).sum::<R>().sqrt();
        if scale == R::zero() {
            let mut e = vec![cx_zero(); n];
            e[0] = Cx::new(R::one(), R::zero());
            e
        } else {
            // vec(U_r Σ_r V_rᴴ)/‖Σ_r‖_F, assembled column by column.
            let mut out = vec![cx_zero(); n];
            for j in 0..r {
                let sj = f.sigma[j] / scale;
                if sj == R::zero() {
                    continue;
                }
                for c2 in 0..n2 {
                    let vj = f.v[(c2, j)].conj() * Cx::new(sj, R::zero());
                    axpy(vj, f.u.col(j), &mut out[c2 * n1..(c2 + 1) * n1]);
                }
            }
            out
        }
    };
    dict.atoms_mut().col_mut(i).copy_from_slice(&new_atom);
    Ok(())
}

/// One or more block-coordinate passes of the non-unitary dictionary-learning
/// step: for each atom in order, the sparse-code column update followed
/// (unless disabled) by the atom update. `k_hat = 0` leaves everything
/// unchanged.
#[allow(clippy::too_many_arguments)]
pub fn dl_pass_p1<R: Real>(
    dict: &mut Dictionary<R>,
    codes: &mut SparseCodeMatrix<R>,
    patches: &CMatrix<R>,
    acc: &Accumulators<R>,
    lambda_z: R,
    linf_bound: R,
    rho: R,
    k_hat: usize,
    update_atoms: bool,
) -> Result<()> {
    for _ in 0..k_hat {
        for i in 0..dict.num_atoms() {
            sparse_code_atom(i, dict, codes, patches, lambda_z, linf_bound)?;
            if update_atoms {
                update_atom(i, dict, codes, patches, acc, rho)?;
            }
        }
    }
    Ok(())
}

/// Exact sparse-coding step for a unitary dictionary:
/// `Ẑ = H_λ(DᴴPᵗ)`, stored as `C = Ẑᴴ`.
pub fn sparse_code_unitary<R: Real>(
    dict: &Dictionary<R>,
    patches: &CMatrix<R>,
    lambda_z: R,
) -> Result<SparseCodeMatrix<R>> {
    let tol = R::of(1e-8);
    if dict.unitarity_deviation() > tol {
        return Err(CoreError::InvalidArgument(
            "sparse_code_unitary requires an orthonormal dictionary".to_string(),
        ));
    }
    let mut codes = SparseCodeMatrix::zeros(patches.ncols(), dict.num_atoms());
    for i in 0..dict.num_atoms() {
        // Column i of C is (Zᴴ)[:,i] = (Pᵗ)ᴴ dᵢ thresholded.
        let b = patches.matvec_adj(dict.atom(i));
        let mut entries = Vec::new();
        for (l, &bl) in b.iter().enumerate() {
            let mag = bl.norm();
            if mag < lambda_z || mag == R::zero() {
                continue;
            }
            entries.push((l as u32, bl));
        }
        codes.set_col(i, entries);
    }
    Ok(codes)
}

/// Orthogonal Procrustes refit of a unitary dictionary from the weighted
/// history: `D = UVᴴ` with `UΣVᴴ` the SVD of `ρ·Q + PᵗCᵗ`. A zero product
/// keeps the previous dictionary (every unitary matrix is then optimal).
pub fn update_dict_unitary<R: Real>(
    dict: &mut Dictionary<R>,
    patches: &CMatrix<R>,
    codes: &SparseCodeMatrix<R>,
    acc: &Accumulators<R>,
    rho: R,
) -> Result<()> {
    if dict.constraint() != DictConstraint::Unitary {
        return Err(CoreError::InvalidArgument(
            "update_dict_unitary requires the unitary constraint".to_string(),
        ));
    }
    codes.check_dims(dict.num_atoms(), patches.ncols())?;
    let mut prod = acc.q.clone();
    prod.scale_real(rho);
    prod.add_scaled(R::one(), &codes.left_mul_dense(patches));
    if prod.is_exactly_zero() {
        return Ok(());
    }
    *dict.atoms_mut() = unitary_polar_factor(&prod)?;
    Ok(())
}

/// Forgetting-weighted dictionary-learning objective at the current window:
/// the instantaneous fit and sparsity penalty plus the `ρ`-discounted
/// history terms reconstructed from the accumulators,
/// `Σ_j ρ^{t−j}(‖Pʲ − D(Cʲ)ᴴ‖_F² + λ_Z²‖Cʲ‖₀)`
/// with past codes held fixed. Both dictionary-learning families decrease
/// this quantity at every block update.
pub fn objective_dict_history<R: Real>(
    dict: &Dictionary<R>,
    codes: &SparseCodeMatrix<R>,
    patches: &CMatrix<R>,
    acc: &Accumulators<R>,
    lambda_z: R,
    rho: R,
) -> R {
    let mut resid = patches.clone();
    resid.add_scaled(-R::one(), &codes.synthesize(dict.atoms()));
    let instant = resid.frob_norm_sq() + lambda_z * lambda_z * R::of(codes.nnz() as f64);

    let d = dict.atoms();
    let cross = d.frob_inner(&acc.q).re;
    let gram = d.adjoint_mul(d);
    let mut quad = R::zero();
    let m = dict.num_atoms();
    for i in 0..m {
        for k in 0..m {
            quad += (gram[(i, k)] * acc.g[(k, i)]).re;
        }
    }
    let history = acc.patch_energy - (cross + cross) + quad + lambda_z * lambda_z * acc.code_l0;
    instant + rho * history
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dict::build_dct_dictionary;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    fn unit_dict(n: usize) -> Dictionary<f64> {
        Dictionary::new(CMatrix::identity(n), DictConstraint::FullRank, (n, 1)).unwrap()
    }

    #[test]
    fn hard_threshold_follows_the_strictly_less_rule() {
        let out = hard_threshold(&[c(0.3, 0.0), c(0.7, 0.0)], 0.5);
        assert_eq!(out, vec![c(0.0, 0.0), c(0.7, 0.0)]);
        let tie = hard_threshold(&[c(0.5, 0.0)], 0.5);
        assert_eq!(tie, vec![c(0.5, 0.0)], "boundary magnitude is kept");
        let s = 3.0 / 2f64.sqrt();
        let cx_case = hard_threshold(&[c(s, s), c(0.0, 0.99)], 1.0);
        assert_eq!(cx_case[0], c(s, s), "magnitude 3 passes");
        assert_eq!(cx_case[1], c(0.0, 0.0), "magnitude 0.99 is zeroed");
    }

    #[test]
    fn sparse_code_of_a_pure_scaled_atom() {
        // One patch equal to 2·d₀ against an orthonormal dictionary.
        let dict = unit_dict(3);
        let mut patches = CMatrix::zeros(3, 1);
        patches[(0, 0)] = c(2.0, 0.0);
        let mut codes = SparseCodeMatrix::zeros(1, 3);
        sparse_code_atom(0, &dict, &mut codes, &patches, 1.0, 10.0).unwrap();
        assert_eq!(codes.col(0), &[(0u32, c(2.0, 0.0))], "projection of 2d₀ onto d₀ is 2");

        let mut codes = SparseCodeMatrix::zeros(1, 3);
        sparse_code_atom(0, &dict, &mut codes, &patches, 3.0, 10.0).unwrap();
        assert!(codes.col(0).is_empty(), "2 < λ_Z = 3 is thresholded away");

        let mut codes = SparseCodeMatrix::zeros(1, 3);
        sparse_code_atom(0, &dict, &mut codes, &patches, 1.0, 1.5).unwrap();
        assert_eq!(codes.col(0), &[(0u32, c(1.5, 0.0))], "magnitude clipped at L");

        assert!(
            sparse_code_atom(0, &dict, &mut SparseCodeMatrix::zeros(1, 3), &patches, 2.0, 2.0)
                .is_err(),
            "L must strictly exceed λ_Z"
        );
    }

    #[test]
    fn atom_update_fits_a_single_unit_patch() {
        let mut dict = unit_dict(3);
        let p = [c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)];
        let patches = CMatrix::from_col_major(3, 1, p.to_vec()).unwrap();
        let mut codes = SparseCodeMatrix::zeros(1, 3);
        codes.set_col(1, vec![(0, c(1.0, 0.0))]);
        let acc = Accumulators::zeros(3, 3);
        update_atom(1, &mut dict, &codes, &patches, &acc, 0.9).unwrap();
        for (a, want) in dict.atom(1).iter().zip(&p) {
            assert!((a - want).norm() < 1e-14, "rank-1 best fit is the unit patch itself");
        }
    }

    #[test]
    fn unused_atom_falls_back_to_the_first_basis_vector() {
        let mut dict = build_dct_dictionary::<f64>((2, 2, 1), DictConstraint::FullRank).unwrap();
        let patches = CMatrix::zeros(4, 2);
        let codes = SparseCodeMatrix::zeros(2, 4);
        let acc = Accumulators::zeros(4, 4);
        update_atom(2, &mut dict, &codes, &patches, &acc, 1.0).unwrap();
        let atom = dict.atom(2);
        assert_eq!(atom[0], c(1.0, 0.0));
        for v in &atom[1..] {
            assert_eq!(*v, c(0.0, 0.0));
        }
    }

    #[test]
    fn unitary_sparse_coding_thresholds_analysis_coefficients() {
        let dict = Dictionary::new(CMatrix::identity(2), DictConstraint::Unitary, (2, 1)).unwrap();
        let patches = CMatrix::from_col_major(2, 1, vec![c(0.4, 0.0), c(1.2, 0.0)]).unwrap();
        let codes = sparse_code_unitary(&dict, &patches, 1.0).unwrap();
        assert!(codes.col(0).is_empty(), "0.4 < 1 is dropped");
        assert_eq!(codes.col(1), &[(0u32, c(1.2, 0.0))]);

        let all = sparse_code_unitary(&dict, &patches, 0.0).unwrap();
        assert_eq!(all.nnz(), 2, "λ_Z = 0 keeps every nonzero coefficient");
    }

    #[test]
    fn procrustes_recovers_a_scaled_unitary_product() {
        // Patches and codes arranged so PᵗCᵗ = 3·F for the 2-point DCT F.
        let f = crate::dict::dct_matrix::<f64>(2);
        let mut patches = f.clone();
        patches.scale_real(3.0);
        let mut codes = SparseCodeMatrix::zeros(2, 2);
        codes.set_col(0, vec![(0, c(1.0, 0.0))]);
        codes.set_col(1, vec![(1, c(1.0, 0.0))]);
        let acc = Accumulators::zeros(2, 2);
        let mut dict =
            Dictionary::new(CMatrix::identity(2), DictConstraint::Unitary, (2, 1)).unwrap();
        update_dict_unitary(&mut dict, &patches, &codes, &acc, 0.5).unwrap();
        let mut diff = dict.atoms().clone();
        diff.add_scaled(-1.0, &f);
        assert!(diff.frob_norm() < 1e-12, "polar factor of 3F is F");

        // Zero product keeps the previous dictionary.
        let zero_p = CMatrix::zeros(2, 2);
        let no_codes = SparseCodeMatrix::zeros(2, 2);
        let before = dict.atoms().clone();
        update_dict_unitary(&mut dict, &zero_p, &no_codes, &acc, 0.5).unwrap();
        assert_eq!(dict.atoms(), &before);
    }

    #[test]
    fn accumulators_sum_minibatches_at_rho_one() {
        let p1 = CMatrix::from_fn(3, 2, |r, cc| c(r as f64 + cc as f64, 0.5));
        let p2 = CMatrix::from_fn(3, 2, |r, cc| c(r as f64 - cc as f64, -1.0));
        let mut c1 = SparseCodeMatrix::zeros(2, 3);
        c1.set_col(0, vec![(1, c(2.0, 1.0))]);
        let mut c2 = SparseCodeMatrix::zeros(2, 3);
        c2.set_col(2, vec![(0, c(0.0, -1.0)), (1, c(1.0, 0.0))]);

        let mut acc = Accumulators::zeros(3, 3);
        update_accumulators(&mut acc, &p1, &c1, 1.0);
        update_accumulators(&mut acc, &p2, &c2, 1.0);

        let mut want_q = c1.left_mul_dense(&p1);
        want_q.add_scaled(1.0, &c2.left_mul_dense(&p2));
        let mut diff = acc.q.clone();
        diff.add_scaled(-1.0, &want_q);
        assert!(diff.frob_norm() < 1e-14, "ρ=1 accumulates the plain sum");
        assert_eq!(acc.code_l0, 3.0);

        // Zero codes: acc' = ρ·acc exactly.
        let empty = SparseCodeMatrix::zeros(2, 3);
        let zero_p = CMatrix::zeros(3, 2);
        let before_q = acc.q.clone();
        update_accumulators(&mut acc, &zero_p, &empty, 0.5);
        let mut want = before_q;
        want.scale_real(0.5);
        assert_eq!(acc.q, want, "committing zero codes only applies the forgetting factor");
    }

    #[test]
    fn dl_pass_descends_the_history_objective() {
        let dict0 = build_dct_dictionary::<f64>((2, 2, 2), DictConstraint::LowRank(1)).unwrap();
        let n = dict0.atom_len();
        let m = dict0.num_atoms();
        let patches = CMatrix::from_fn(n, 10, |r, cc| {
            c(((r * 3 + cc) as f64 * 0.7).sin(), ((r + cc * 5) as f64 * 0.3).cos())
        });
        let mut acc = Accumulators::zeros(n, m);
        // Seed the history with one synthetic minibatch so the weighted
        // terms are active.
        let hist_p = CMatrix::from_fn(n, 6, |r, cc| c((r as f64 - cc as f64) * 0.2, 0.1));
        let mut hist_c = SparseCodeMatrix::zeros(6, m);
        hist_c.set_col(0, vec![(0, c(1.0, 0.0)), (3, c(-0.5, 0.5))]);
        hist_c.set_col(5, vec![(2, c(0.8, 0.0))]);
        update_accumulators(&mut acc, &hist_p, &hist_c, 0.9);

        let mut dict = dict0.clone();
        let mut codes = SparseCodeMatrix::zeros(10, m);
        let mut prev = objective_dict_history(&dict, &codes, &patches, &acc, 0.4, 0.9);
        for _ in 0..3 {
            dl_pass_p1(&mut dict, &mut codes, &patches, &acc, 0.4, 1e20, 0.9, 1, true).unwrap();
            let now = objective_dict_history(&dict, &codes, &patches, &acc, 0.4, 0.9);
            assert!(
                now <= prev + 1e-9 * prev.abs().max(1.0),
                "weighted objective must not increase: {prev} -> {now}"
            );
            prev = now;
        }
        assert!(dict.max_atom_norm_deviation() < 1e-10, "atoms stay unit norm");
        assert!(dict.max_truncation_residual().unwrap() < 1e-9, "atoms stay rank-1");

        // K̂ = 0 leaves everything unchanged.
        let dict_before = dict.clone();
        let codes_before = codes.clone();
        dl_pass_p1(&mut dict, &mut codes, &patches, &acc, 0.4, 1e20, 0.9, 0, true).unwrap();
        assert_eq!(dict.atoms(), dict_before.atoms());
        assert_eq!(codes, codes_before);
    }
}
