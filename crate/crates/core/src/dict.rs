//! Patch dictionaries: storage, structural constraints, and the separable
//! 3D DCT initialization.
//!
//! A dictionary is an `n × m` complex matrix of unit-norm atom columns. Each
//! atom reshapes column-wise into an `(n_x·n_y) × n_t` space-time matrix
//! `R(dᵢ)`; the low-rank constraint bounds the rank of that reshape, while
//! the unitary constraint requires `DᴴD = I`.

use crate::error::{CoreError, Result};
use crate::linalg::{norm, CMatrix};
use crate::scalar::{Cx, Real};
use crate::svd::svd;

/// Structural constraint on the dictionary atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DictConstraint {
    /// Unit-norm atoms only.
    FullRank,
    /// Unit-norm atoms whose space-time reshape has rank at most `r`.
    LowRank(usize),
    /// Orthonormal columns (`DᴴD = I`), which implies unit-norm atoms.
    Unitary,
}

/// Dictionary of unit-norm spatiotemporal atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary<R: Real> {
    atoms: CMatrix<R>,
    constraint: DictConstraint,
    /// Space-time reshape `(n_x·n_y, n_t)` of one atom.
    reshape: (usize, usize),
}

impl<R: Real> Dictionary<R> {
    /// Wraps an atom matrix after validating shape and constraint
    /// feasibility (not constraint satisfaction, which tests probe via the
    /// deviation reports).
    pub fn new(atoms: CMatrix<R>, constraint: DictConstraint, reshape: (usize, usize)) -> Result<Self> {
        let (n1, n2) = reshape;
        if n1 * n2 != atoms.nrows() {
            return Err(CoreError::InvalidArgument(format!(
                "reshape {}x{} does not match atom length {}",
                n1,
                n2,
                atoms.nrows()
            )));
        }
        if atoms.ncols() == 0 {
            return Err(CoreError::InvalidArgument("dictionary needs at least one atom".into()));
        }
        match constraint {
            DictConstraint::LowRank(r) => {
                if r == 0 || r > n1.min(n2) {
                    return Err(CoreError::InvalidArgument(format!(
                        "atom rank {} must lie in 1..={} for a {}x{} reshape",
                        r,
                        n1.min(n2),
                        n1,
                        n2
                    )));
                }
            }
            DictConstraint::Unitary => {
                if atoms.ncols() > atoms.nrows() {
                    return Err(CoreError::InvalidArgument(format!(
                        "a {}x{} dictionary cannot have orthonormal columns",
                        atoms.nrows(),
                        atoms.ncols()
                    )));
                }
            }
            DictConstraint::FullRank => {}
        }
        Ok(Dictionary { atoms, constraint, reshape })
    }

    pub fn atoms(&self) -> &CMatrix<R> {
        &self.atoms
    }

    pub fn atoms_mut(&mut self) -> &mut CMatrix<R> {
        &mut self.atoms
    }

    pub fn constraint(&self) -> DictConstraint {
        self.constraint
    }

    pub fn reshape_dims(&self) -> (usize, usize) {
        self.reshape
    }

    /// Atom length `n`.
    pub fn atom_len(&self) -> usize {
        self.atoms.nrows()
    }

    /// Number of atoms `m`.
    pub fn num_atoms(&self) -> usize {
        self.atoms.ncols()
    }

    /// Atom `i` as a slice.
    pub fn atom(&self, i: usize) -> &[Cx<R>] {
        self.atoms.col(i)
    }

    /// Effective truncation rank for atom updates: `min(n1, n2)` for
    /// full-rank atoms, the constraint rank otherwise.
    pub fn effective_rank(&self) -> usize {
        let full = self.reshape.0.min(self.reshape.1);
        match self.constraint {
            DictConstraint::LowRank(r) => r.min(full),
            _ => full,
        }
    }

    /// Largest deviation of any atom norm from one.
    pub fn max_atom_norm_deviation(&self) -> R {
        (0..self.num_atoms())
            .map(|i| (norm(self.atom(i)) - R::one()).abs())
            .fold(R::zero(), R::max)
    }

    /// Largest residual singular value `σ_{r+1}(R(dᵢ))` beyond the allowed
    /// rank; zero for non-low-rank constraints.
    pub fn max_truncation_residual(&self) -> Result<R> {
        let r = match self.constraint {
            DictConstraint::LowRank(r) => r,
            _ => return Ok(R::zero()),
        };
        let (n1, n2) = self.reshape;
        if r >= n1.min(n2) {
            return Ok(R::zero());
        }
        let mut worst = R::zero();
        for i in 0..self.num_atoms() {
            let m = CMatrix::from_col_major(n1, n2, self.atom(i).to_vec())?;
            let f = svd(&m)?;
            worst = worst.max(f.sigma[r]);
        }
        Ok(worst)
    }

    /// Frobenius deviation `‖DᴴD − I‖_F`; meaningful for the unitary
    /// constraint.
    pub fn unitarity_deviation(&self) -> R {
        let mut g = self.atoms.adjoint_mul(&self.atoms);
        let m = self.num_atoms();
        for i in 0..m {
            g[(i, i)] -= Cx::new(R::one(), R::zero());
        }
        g.frob_norm()
    }
}

/// Orthonormal (type-II) DCT matrix of size `k × k`:
/// `T[p, q] = c_p · cos(π (2q+1) p / (2k))` with `c₀ = √(1/k)`, `c_p = √(2/k)`.
pub fn dct_matrix<R: Real>(k: usize) -> CMatrix<R> {
    assert!(k >= 1, "dct_matrix needs a positive size");
    let kf = R::of(k as f64);
    let c0 = (R::one() / kf).sqrt();
    let cp = (R::of(2.0) / kf).sqrt();
    CMatrix::from_fn(k, k, |p, q| {
        let scale = if p == 0 { c0 } else { cp };
        let angle = R::PI() * R::of((2 * q + 1) as f64) * R::of(p as f64) / (R::of(2.0) * kf);
        Cx::new(scale * angle.cos(), R::zero())
    })
}

/// Square separable 3D DCT synthesis dictionary for the given patch shape.
///
/// The analysis operator on a patch vectorized x-fastest is the Kronecker
/// product `T_t ⊗ T_y ⊗ T_x` of orthonormal DCT matrices, so the synthesis
/// dictionary is its adjoint. Every atom is a separable outer product, hence
/// its space-time reshape has rank one and the dictionary is feasible for
/// all structural constraints.
pub fn build_dct_dictionary<R: Real>(
    patch: (usize, usize, usize),
    constraint: DictConstraint,
) -> Result<Dictionary<R>> {
    let (nx, ny, nt) = patch;
    if nx == 0 || ny == 0 || nt == 0 {
        return Err(CoreError::InvalidArgument("patch dimensions must be positive".into()));
    }
    let tx = dct_matrix::<R>(nx);
    let ty = dct_matrix::<R>(ny);
    let tt = dct_matrix::<R>(nt);
    let n = nx * ny * nt;
    // Atom j = (jx, jy, jt) has entries T_x[jx, ix]·T_y[jy, iy]·T_t[jt, it]
    // at patch position (ix, iy, it); both indices enumerate x fastest.
    let atoms = CMatrix::from_fn(n, n, |a, j| {
        let ix = a % nx;
        let iy = (a / nx) % ny;
        let it = a / (nx * ny);
        let jx = j % nx;
        let jy = (j / nx) % ny;
        let jt = j / (nx * ny);
        let v = tx[(jx, ix)].re * ty[(jy, iy)].re * tt[(jt, it)].re;
        Cx::new(v, R::zero())
    });
    Dictionary::new(atoms, constraint, (nx * ny, nt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_dct_matrix_matches_the_closed_form() {
        let t = dct_matrix::<f64>(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((t[(0, 0)].re - s).abs() < 1e-15);
        assert!((t[(0, 1)].re - s).abs() < 1e-15);
        assert!((t[(1, 0)].re - s).abs() < 1e-15);
        assert!((t[(1, 1)].re + s).abs() < 1e-15);
    }

    #[test]
    fn dct_dictionary_is_orthonormal_with_rank_one_atoms() {
        let d = build_dct_dictionary::<f64>((3, 2, 2), DictConstraint::LowRank(1)).unwrap();
        assert_eq!(d.atom_len(), 12);
        assert_eq!(d.num_atoms(), 12);
        assert!(d.unitarity_deviation() < 1e-12, "DCT dictionary is orthonormal");
        assert!(d.max_atom_norm_deviation() < 1e-13, "atoms are unit norm");
        assert!(
            d.max_truncation_residual().unwrap() < 1e-13,
            "separable atoms reshape to rank one"
        );
    }

    #[test]
    fn constraint_feasibility_is_validated() {
        let atoms = CMatrix::<f64>::identity(4);
        assert!(Dictionary::new(atoms.clone(), DictConstraint::LowRank(0), (2, 2)).is_err());
        assert!(Dictionary::new(atoms.clone(), DictConstraint::LowRank(3), (2, 2)).is_err());
        assert!(Dictionary::new(atoms.clone(), DictConstraint::LowRank(2), (2, 2)).is_ok());
        assert!(Dictionary::new(atoms, DictConstraint::FullRank, (4, 2)).is_err());
    }
}
