//! Dense complex matrices in column-major storage, plus the handful of
//! BLAS-like kernels the toolkit needs.
//!
//! Columns are contiguous so that dictionary atoms, patch vectors, and code
//! vectors can be handed around as plain slices.

use std::ops::{Index, IndexMut};

use crate::error::{CoreError, Result};
use crate::scalar::{cx_zero, Cx, Real};

/// Conjugated dot product `aᴴ b`.
pub fn vdot<R: Real>(a: &[Cx<R>], b: &[Cx<R>]) -> Cx<R> {
    debug_assert_eq!(a.len(), b.len(), "vdot length mismatch");
    let mut acc = cx_zero();
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

/// Squared Euclidean norm `‖a‖₂²`.
pub fn norm_sq<R: Real>(a: &[Cx<R>]) -> R {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Euclidean norm `‖a‖₂`.
pub fn norm<R: Real>(a: &[Cx<R>]) -> R {
    norm_sq(a).sqrt()
}

/// In-place `y ← y + α x`.
pub fn axpy<R: Real>(alpha: Cx<R>, x: &[Cx<R>], y: &mut [Cx<R>]) {
    debug_assert_eq!(x.len(), y.len(), "axpy length mismatch");
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Dense complex matrix with column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<R: Real> {
    nrows: usize,
    ncols: usize,
    data: Vec<Cx<R>>,
}

impl<R: Real> CMatrix<R> {
    /// All-zero matrix.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CMatrix { nrows, ncols, data: vec![cx_zero(); nrows * ncols] }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::new(R::one(), R::zero());
        }
        m
    }

    /// Matrix from a column-major value vector.
    pub fn from_col_major(nrows: usize, ncols: usize, data: Vec<Cx<R>>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(CoreError::InvalidArgument(format!(
                "column-major data length {} does not match {}x{} shape",
                data.len(),
                nrows,
                ncols
            )));
        }
        Ok(CMatrix { nrows, ncols, data })
    }

    /// Matrix with entries generated by `f(row, col)`.
    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> Cx<R>) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for c in 0..ncols {
            for r in 0..nrows {
                data.push(f(r, c));
            }
        }
        CMatrix { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Column `j` as a contiguous slice.
    pub fn col(&self, j: usize) -> &[Cx<R>] {
        debug_assert!(j < self.ncols, "column index out of range");
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    /// Mutable column `j`.
    pub fn col_mut(&mut self, j: usize) -> &mut [Cx<R>] {
        debug_assert!(j < self.ncols, "column index out of range");
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    /// Two distinct mutable columns `(i, j)`, `i != j`.
    pub fn two_cols_mut(&mut self, i: usize, j: usize) -> (&mut [Cx<R>], &mut [Cx<R>]) {
        assert!(i != j, "two_cols_mut requires distinct columns");
        let n = self.nrows;
        if i < j {
            let (lo, hi) = self.data.split_at_mut(j * n);
            (&mut lo[i * n..(i + 1) * n], &mut hi[..n])
        } else {
            let (lo, hi) = self.data.split_at_mut(i * n);
            let (a, b) = (&mut hi[..n], &mut lo[j * n..(j + 1) * n]);
            (a, b)
        }
    }

    /// Underlying column-major storage.
    pub fn as_slice(&self) -> &[Cx<R>] {
        &self.data
    }

    /// Mutable column-major storage.
    pub fn as_mut_slice(&mut self) -> &mut [Cx<R>] {
        &mut self.data
    }

    /// Matrix-vector product `A x`.
    pub fn matvec(&self, x: &[Cx<R>]) -> Vec<Cx<R>> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        let mut y = vec![cx_zero(); self.nrows];
        for j in 0..self.ncols {
            axpy(x[j], self.col(j), &mut y);
        }
        y
    }

    /// Adjoint matrix-vector product `Aᴴ x`.
    pub fn matvec_adj(&self, x: &[Cx<R>]) -> Vec<Cx<R>> {
        assert_eq!(x.len(), self.nrows, "matvec_adj dimension mismatch");
        (0..self.ncols).map(|j| vdot(self.col(j), x)).collect()
    }

    /// Matrix product `A B`.
    pub fn matmul(&self, b: &CMatrix<R>) -> CMatrix<R> {
        assert_eq!(self.ncols, b.nrows, "matmul dimension mismatch");
        let mut out = CMatrix::zeros(self.nrows, b.ncols);
        for j in 0..b.ncols {
            let bj = b.col(j);
            let oj = out.col_mut(j);
            for k in 0..self.ncols {
                axpy(bj[k], self.col(k), oj);
            }
        }
        out
    }

    /// Adjoint-left product `Aᴴ B`.
    pub fn adjoint_mul(&self, b: &CMatrix<R>) -> CMatrix<R> {
        assert_eq!(self.nrows, b.nrows, "adjoint_mul dimension mismatch");
        CMatrix::from_fn(self.ncols, b.ncols, |i, j| vdot(self.col(i), b.col(j)))
    }

    /// Adjoint-right product `A Bᴴ`.
    pub fn mul_adjoint(&self, b: &CMatrix<R>) -> CMatrix<R> {
        assert_eq!(self.ncols, b.ncols, "mul_adjoint dimension mismatch");
        let mut out = CMatrix::zeros(self.nrows, b.nrows);
        for k in 0..self.ncols {
            let ak = self.col(k);
            let bk = b.col(k);
            for j in 0..b.nrows {
                axpy(bk[j].conj(), ak, out.col_mut(j));
            }
        }
        out
    }

    /// Conjugate transpose `Aᴴ`.
    pub fn adjoint(&self) -> CMatrix<R> {
        CMatrix::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].conj())
    }

    /// Squared Frobenius norm.
    pub fn frob_norm_sq(&self) -> R {
        norm_sq(&self.data)
    }

    /// Frobenius norm.
    pub fn frob_norm(&self) -> R {
        self.frob_norm_sq().sqrt()
    }

    /// In-place scaling `A ← α A` by a real factor.
    pub fn scale_real(&mut self, alpha: R) {
        for z in &mut self.data {
            *z = Cx::new(z.re * alpha, z.im * alpha);
        }
    }

    /// In-place `A ← A + α B` with a real factor.
    pub fn add_scaled(&mut self, alpha: R, b: &CMatrix<R>) {
        assert_eq!(
            (self.nrows, self.ncols),
            (b.nrows, b.ncols),
            "add_scaled dimension mismatch"
        );
        for (x, y) in self.data.iter_mut().zip(&b.data) {
            *x += Cx::new(alpha, R::zero()) * y;
        }
    }

    /// Frobenius inner product `⟨A, B⟩ = tr(Aᴴ B)`.
    pub fn frob_inner(&self, b: &CMatrix<R>) -> Cx<R> {
        assert_eq!(
            (self.nrows, self.ncols),
            (b.nrows, b.ncols),
            "frob_inner dimension mismatch"
        );
        vdot(&self.data, &b.data)
    }

    /// True when every stored entry is exactly zero.
    pub fn is_exactly_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == R::zero() && z.im == R::zero())
    }
}

impl<R: Real> Index<(usize, usize)> for CMatrix<R> {
    type Output = Cx<R>;

    fn index(&self, (r, c): (usize, usize)) -> &Cx<R> {
        debug_assert!(r < self.nrows && c < self.ncols, "index out of range");
        &self.data[c * self.nrows + r]
    }
}

impl<R: Real> IndexMut<(usize, usize)> for CMatrix<R> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Cx<R> {
        debug_assert!(r < self.nrows && c < self.ncols, "index out of range");
        &mut self.data[c * self.nrows + r]
    }
}
