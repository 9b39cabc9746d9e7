//! Shared helpers for the integration-test binaries: seeded random data
//! and conversions to the independent dense linear-algebra oracle.

#![allow(dead_code)]

use nalgebra::{Complex, DMatrix, DVector};
use onair_core::linalg::CMatrix;
use onair_core::tensor::{ComplexTensor, PatchConfig};
use onair_core::{Cx, SensingOperator};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Standard normal via Box–Muller.
pub fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    let u: f64 = rng.gen::<f64>().max(1e-12);
    let v: f64 = rng.gen::<f64>();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn gaussian_cx(rng: &mut ChaCha12Rng) -> Cx<f64> {
    Cx::new(gaussian(rng), gaussian(rng))
}

pub fn random_matrix(rng: &mut ChaCha12Rng, nrows: usize, ncols: usize) -> CMatrix<f64> {
    CMatrix::from_fn(nrows, ncols, |_, _| gaussian_cx(rng))
}

pub fn random_tensor(rng: &mut ChaCha12Rng, dims: Vec<usize>) -> ComplexTensor<f64> {
    let mut t = ComplexTensor::zeros(dims);
    for z in t.data_mut() {
        *z = gaussian_cx(rng);
    }
    t
}

pub fn to_na(a: &CMatrix<f64>) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| {
        let z = a[(r, c)];
        Complex::new(z.re, z.im)
    })
}

pub fn from_na(a: &DMatrix<Complex<f64>>) -> CMatrix<f64> {
    CMatrix::from_fn(a.nrows(), a.ncols(), |r, c| Cx::new(a[(r, c)].re, a[(r, c)].im))
}

/// Random matrix with unit-norm columns.
pub fn unit_norm_atoms(rng: &mut ChaCha12Rng, nrows: usize, ncols: usize) -> CMatrix<f64> {
    let mut a = random_matrix(rng, nrows, ncols);
    for i in 0..ncols {
        let nrm: f64 = a.col(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in a.col_mut(i) {
            *z /= nrm;
        }
    }
    a
}

/// Unitary matrix sampled as the Q factor of a complex Gaussian matrix.
pub fn haar_unitary(rng: &mut ChaCha12Rng, n: usize) -> DMatrix<Complex<f64>> {
    to_na(&random_matrix(rng, n, n)).qr().q()
}

/// Sparse code matrix with each entry present independently with
/// probability `fill`; stored values are complex Gaussian.
pub fn random_sparse_codes(
    rng: &mut ChaCha12Rng,
    num_patches: usize,
    num_atoms: usize,
    fill: f64,
) -> onair_core::sparse::SparseCodeMatrix<f64> {
    let mut codes = onair_core::sparse::SparseCodeMatrix::zeros(num_patches, num_atoms);
    for i in 0..num_atoms {
        let mut entries = Vec::new();
        for l in 0..num_patches {
            if rng.gen::<f64>() < fill {
                entries.push((l as u32, gaussian_cx(rng)));
            }
        }
        codes.set_col(i, entries);
    }
    codes
}

/// Dense `M × m` copy of a sparse code matrix for the oracle algebra.
pub fn dense_codes(codes: &onair_core::sparse::SparseCodeMatrix<f64>) -> DMatrix<Complex<f64>> {
    let mut c = DMatrix::zeros(codes.num_patches(), codes.num_atoms());
    for i in 0..codes.num_atoms() {
        for &(l, v) in codes.col(i) {
            c[(l as usize, i)] = Complex::new(v.re, v.im);
        }
    }
    c
}

pub fn max_abs_diff(a: &CMatrix<f64>, b: &CMatrix<f64>) -> f64 {
    assert_eq!(a.nrows(), b.nrows(), "oracle shape mismatch");
    assert_eq!(a.ncols(), b.ncols(), "oracle shape mismatch");
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn to_na_vec(v: &[Cx<f64>]) -> DVector<Complex<f64>> {
    DVector::from_iterator(v.len(), v.iter().map(|z| Complex::new(z.re, z.im)))
}

/// Materializes a sensing operator as a dense matrix, one column per
/// canonical basis tensor.
pub fn dense_operator(op: &SensingOperator<f64>) -> DMatrix<Complex<f64>> {
    let (nx, ny) = op.frame_dims();
    let n = nx * ny * op.num_frames();
    let mut a = DMatrix::zeros(op.measurement_len(), n);
    for i in 0..n {
        let mut e = ComplexTensor::zeros(vec![op.num_frames(), ny, nx]);
        e.data_mut()[i] = Cx::new(1.0, 0.0);
        let col = op.apply(&e).unwrap();
        for (r, z) in col.iter().enumerate() {
            a[(r, i)] = Complex::new(z.re, z.im);
        }
    }
    a
}

/// Start positions re-derived from the documented rule: multiples of the
/// stride while the patch fits, plus a final clamped start if the last
/// pixel is not yet covered.
pub fn grid_positions(extent: usize, patch: usize, stride: usize) -> Vec<usize> {
    let mut xs = Vec::new();
    let mut k = 0;
    while k * stride + patch <= extent {
        xs.push(k * stride);
        k += 1;
    }
    let clamp = extent - patch;
    if xs.last() != Some(&clamp) {
        xs.push(clamp);
    }
    xs
}

/// Flat tensor indices of every patch of a `(nx, ny, nt)` volume, patches
/// enumerated x-fastest then y then t, entries within a patch in the same
/// order. The flat layout is the row-major `[t, y, x]` tensor layout.
pub fn patch_flat_indices(
    (nx, ny, nt): (usize, usize, usize),
    cfg: &PatchConfig,
) -> Vec<Vec<usize>> {
    let (px, py, pt) = cfg.patch;
    let xs = grid_positions(nx, px, cfg.spatial_stride);
    let ys = grid_positions(ny, py, cfg.spatial_stride);
    let ts = grid_positions(nt, pt, cfg.temporal_stride);
    let mut out = Vec::new();
    for &st in &ts {
        for &sy in &ys {
            for &sx in &xs {
                let mut rows = Vec::with_capacity(px * py * pt);
                for dt in 0..pt {
                    for dy in 0..py {
                        for dx in 0..px {
                            rows.push(((st + dt) * ny + sy + dy) * nx + sx + dx);
                        }
                    }
                }
                out.push(rows);
            }
        }
    }
    out
}
