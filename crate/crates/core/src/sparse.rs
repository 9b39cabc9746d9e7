//! Sparse code storage.
//!
//! Codes are kept in the transposed-conjugate layout `C = Zᴴ`: an `M × m`
//! matrix whose column `cᵢ` holds, across all `M` patches, the conjugated
//! coefficients of atom `i`. Each column is a sorted sparse vector, so the
//! per-atom operations of the learning loop touch only stored nonzeros.

use crate::error::{CoreError, Result};
use crate::linalg::{axpy, CMatrix};
use crate::scalar::{cx_zero, Cx, Real};

/// Sparse `M × m` code matrix `C = Zᴴ` with per-atom sparse columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCodeMatrix<R: Real> {
    num_patches: usize,
    /// `cols[i]` lists `(patch index, value)` pairs of column `cᵢ`, sorted by
    /// patch index.
    cols: Vec<Vec<(u32, Cx<R>)>>,
}

impl<R: Real> SparseCodeMatrix<R> {
    /// All-zero code matrix for `m` atoms over `num_patches` patches.
    pub fn zeros(num_patches: usize, num_atoms: usize) -> Self {
        SparseCodeMatrix { num_patches, cols: vec![Vec::new(); num_atoms] }
    }

    pub fn num_patches(&self) -> usize {
        self.num_patches
    }

    pub fn num_atoms(&self) -> usize {
        self.cols.len()
    }

    /// Sparse column `cᵢ` (codes of atom `i` across patches).
    pub fn col(&self, i: usize) -> &[(u32, Cx<R>)] {
        &self.cols[i]
    }

    /// Replaces column `i`; entries must be sorted by patch index.
    pub fn set_col(&mut self, i: usize, entries: Vec<(u32, Cx<R>)>) {
        debug_assert!(
            entries.windows(2).all(|w| w[0].0 < w[1].0),
            "column entries must be strictly sorted by patch index"
        );
        debug_assert!(
            entries.last().map_or(true, |e| (e.0 as usize) < self.num_patches),
            "patch index out of range"
        );
        self.cols[i] = entries;
    }

    /// Total number of stored nonzeros `‖Z‖₀`.
    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// Fraction of nonzeros relative to the dense size `M·m`.
    pub fn sparsity_fraction(&self) -> R {
        let dense = self.num_patches * self.cols.len();
        if dense == 0 {
            R::zero()
        } else {
            R::of(self.nnz() as f64) / R::of(dense as f64)
        }
    }

    /// Dense matrix-vector product `C w` for `w ∈ ℂᵐ`.
    pub fn mul_vec(&self, w: &[Cx<R>]) -> Vec<Cx<R>> {
        assert_eq!(w.len(), self.cols.len(), "mul_vec dimension mismatch");
        let mut out = vec![cx_zero(); self.num_patches];
        for (col, wk) in self.cols.iter().zip(w) {
            if wk.re == R::zero() && wk.im == R::zero() {
                continue;
            }
            for &(l, v) in col {
                out[l as usize] += v * wk;
            }
        }
        out
    }

    /// Adjoint product against one column: `(Cᴴ cᵢ)` as a dense `m`-vector
    /// whose entry `k` is `cₖᴴ cᵢ`.
    pub fn adjoint_mul_col(&self, i: usize) -> Vec<Cx<R>> {
        let ci = &self.cols[i];
        (0..self.cols.len())
            .map(|k| sparse_dot(&self.cols[k], ci))
            .collect()
    }

    /// Dense Gram matrix `CᴴC` (`m × m`).
    pub fn gram(&self) -> CMatrix<R> {
        let m = self.cols.len();
        let mut g = CMatrix::zeros(m, m);
        for j in 0..m {
            for i in 0..=j {
                let v = sparse_dot(&self.cols[i], &self.cols[j]);
                g[(i, j)] = v;
                if i != j {
                    g[(j, i)] = v.conj();
                }
            }
        }
        g
    }

    /// Dense product `P C` of an `n × M` patch matrix with the codes,
    /// yielding `n × m`.
    pub fn left_mul_dense(&self, p: &CMatrix<R>) -> CMatrix<R> {
        assert_eq!(p.ncols(), self.num_patches, "left_mul_dense dimension mismatch");
        let mut out = CMatrix::zeros(p.nrows(), self.cols.len());
        for (i, col) in self.cols.iter().enumerate() {
            let dst = out.col_mut(i);
            for &(l, v) in col {
                axpy(v, p.col(l as usize), dst);
            }
        }
        out
    }

    /// Dense product `P cᵢ` against one sparse column.
    pub fn left_mul_dense_col(&self, p: &CMatrix<R>, i: usize) -> Vec<Cx<R>> {
        assert_eq!(p.ncols(), self.num_patches, "left_mul_dense_col dimension mismatch");
        let mut out = vec![cx_zero(); p.nrows()];
        for &(l, v) in &self.cols[i] {
            axpy(v, p.col(l as usize), &mut out);
        }
        out
    }

    /// Dense synthesis `D Z = D Cᴴ` as an `n × M` matrix of per-patch
    /// approximations.
    pub fn synthesize(&self, atoms: &CMatrix<R>) -> CMatrix<R> {
        assert_eq!(atoms.ncols(), self.cols.len(), "synthesize dimension mismatch");
        let mut out = CMatrix::zeros(atoms.nrows(), self.num_patches);
        for (i, col) in self.cols.iter().enumerate() {
            let di = atoms.col(i);
            for &(l, v) in col {
                axpy(v.conj(), di, out.col_mut(l as usize));
            }
        }
        out
    }

    /// Validates shape compatibility against a dictionary/patch pair.
    pub fn check_dims(&self, num_atoms: usize, num_patches: usize) -> Result<()> {
        if self.cols.len() != num_atoms || self.num_patches != num_patches {
            return Err(CoreError::InvalidArgument(format!(
                "code matrix is {}x{}, expected {}x{}",
                self.num_patches,
                self.cols.len(),
                num_patches,
                num_atoms
            )));
        }
        Ok(())
    }
}

/// Sparse conjugated dot product `aᴴ b` over sorted sparse vectors.
fn sparse_dot<R: Real>(a: &[(u32, Cx<R>)], b: &[(u32, Cx<R>)]) -> Cx<R> {
    let mut acc = cx_zero();
    let (mut ia, mut ib) = (0, 0);
    while ia < a.len() && ib < b.len() {
        let (ka, va) = a[ia];
        let (kb, vb) = b[ib];
        if ka == kb {
            acc += va.conj() * vb;
            ia += 1;
            ib += 1;
        } else if ka < kb {
            ia += 1;
        } else {
            ib += 1;
        }
    }
    acc
}
