//! Synthetic test data: planted-dictionary streams and an ellipse phantom.
//!
//! The planted generator draws a ground-truth dictionary `D*` and s-sparse
//! codes, synthesizes every patch as `D* z`, assembles frames by
//! coverage-normalized aggregation of the overlapping patches, and adds
//! complex Gaussian noise at a requested SNR. The phantom renders nested
//! piecewise-constant ellipses with deterministic per-frame motion.

use crate::error::{CliError, Result};
use onair_core::tensor::aggregate_patches;
use onair_core::{
    truncated_svd, unitary_polar_factor, CMatrix, ComplexTensor, Cx, DictConstraint, Dictionary,
    PatchConfig,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Standard normal sample via the Box–Muller transform.
fn gaussian(rng: &mut ChaCha12Rng) -> f64 {
    let u: f64 = rng.gen::<f64>().max(1e-12);
    let v: f64 = rng.gen::<f64>();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

fn gaussian_cx(rng: &mut ChaCha12Rng) -> Cx<f64> {
    Cx::new(gaussian(rng), gaussian(rng))
}

fn gaussian_matrix(rng: &mut ChaCha12Rng, nrows: usize, ncols: usize) -> CMatrix<f64> {
    CMatrix::from_fn(nrows, ncols, |_, _| gaussian_cx(rng))
}

fn normalize_columns(a: &mut CMatrix<f64>) {
    for j in 0..a.ncols() {
        let norm: f64 = a.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in a.col_mut(j) {
            *z /= norm;
        }
    }
}

/// Knobs for the planted-dictionary generator.
#[derive(Debug, Clone)]
pub struct PlantedParams {
    /// Frame width and height `(nx, ny)`.
    pub frame_dims: (usize, usize),
    pub num_frames: usize,
    pub patch: PatchConfig,
    pub num_atoms: usize,
    /// Nonzeros per patch code; must lie in `1..=num_atoms`.
    pub sparsity: usize,
    /// Measurement SNR in dB; `f64::INFINITY` leaves the data noiseless.
    pub snr_db: f64,
    /// Force every planted atom's space-time reshape to this rank.
    pub atom_rank: Option<usize>,
    /// Draw a dictionary with orthonormal columns instead of generic atoms.
    pub unitary: bool,
    pub seed: u64,
}

/// Planted stream: noisy frames, the noiseless frames they were made from,
/// and the ground-truth dictionary.
#[derive(Debug, Clone)]
pub struct PlantedScene {
    pub noisy: ComplexTensor<f64>,
    pub clean: ComplexTensor<f64>,
    pub dictionary: Dictionary<f64>,
}

/// Generates a planted-dictionary stream. Deterministic per seed: the
/// dictionary is drawn first, then one support/value set per patch (patches
/// in x-fastest grid order), then the noise.
pub fn synth_planted(params: &PlantedParams) -> Result<PlantedScene> {
    let (nx, ny) = params.frame_dims;
    let dims = vec![params.num_frames, ny, nx];
    params.patch.validate(&dims)?;
    let n = params.patch.patch_len();
    let m = params.num_atoms;
    if params.sparsity == 0 || params.sparsity > m {
        return Err(CliError::Config(format!(
            "sparsity must lie in 1..={m} (the atom count), got {}",
            params.sparsity
        )));
    }
    if params.unitary && params.atom_rank.is_some() {
        return Err(CliError::Config(
            "a planted dictionary can be unitary or low-rank, not both".into(),
        ));
    }
    let reshape = params.patch.reshape_dims();
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);

    let (atoms, constraint) = if params.unitary {
        if m > n {
            return Err(CliError::Config(format!(
                "orthonormal columns need num_atoms <= patch length, got {m} > {n}"
            )));
        }
        let q = unitary_polar_factor(&gaussian_matrix(&mut rng, n, m))?;
        (q, DictConstraint::Unitary)
    } else if let Some(r) = params.atom_rank {
        let max_rank = reshape.0.min(reshape.1);
        if r == 0 || r > max_rank {
            return Err(CliError::Config(format!(
                "atom rank must lie in 1..={max_rank} for {}x{} reshaped atoms, got {r}",
                reshape.0, reshape.1
            )));
        }
        let mut atoms = CMatrix::zeros(n, m);
        for j in 0..m {
            let full = gaussian_matrix(&mut rng, reshape.0, reshape.1);
            let f = truncated_svd(&full, r)?;
            let mut u = f.u;
            for (k, sigma) in f.sigma.iter().enumerate() {
                for z in u.col_mut(k) {
                    *z *= *sigma;
                }
            }
            let low = u.mul_adjoint(&f.v);
            atoms.col_mut(j).copy_from_slice(low.as_slice());
        }
        normalize_columns(&mut atoms);
        (atoms, DictConstraint::LowRank(r))
    } else {
        let mut atoms = gaussian_matrix(&mut rng, n, m);
        normalize_columns(&mut atoms);
        (atoms, DictConstraint::FullRank)
    };

    let (xs, ys, ts) = params.patch.grid(&dims);
    let num_patches = xs.len() * ys.len() * ts.len();
    let mut patches = CMatrix::zeros(n, num_patches);
    for j in 0..num_patches {
        let support = rand::seq::index::sample(&mut rng, m, params.sparsity);
        for atom in support {
            let mag = rng.gen_range(1.0..=2.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let z = Cx::new(mag * phase.cos(), mag * phase.sin());
            let col = patches.col_mut(j);
            for (p, a) in col.iter_mut().zip(atoms.col(atom)) {
                *p += a * z;
            }
        }
    }

    let (mut clean, coverage) = aggregate_patches(&patches, &dims, &params.patch)?;
    for (z, c) in clean.data_mut().iter_mut().zip(&coverage) {
        *z /= *c;
    }

    let noisy = if params.snr_db.is_finite() {
        let energy: f64 = clean.data().iter().map(|z| z.norm_sqr()).sum();
        let voxels = clean.data().len();
        let noise_var = energy / (voxels as f64 * 10f64.powf(params.snr_db / 10.0));
        let sd = (noise_var / 2.0).sqrt();
        let mut noisy = clean.clone();
        for z in noisy.data_mut() {
            *z += Cx::new(sd * gaussian(&mut rng), sd * gaussian(&mut rng));
        }
        noisy
    } else {
        clean.clone()
    };

    let dictionary = Dictionary::new(atoms, constraint, reshape)?;
    Ok(PlantedScene { noisy, clean, dictionary })
}

/// Per-frame motion of the phantom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Motion {
    /// Every frame identical.
    None,
    /// All ellipses shift by this many pixels per frame along x.
    Translate { px_per_frame: i64 },
    /// Frame `k` scales the base frame by `1 + gain·k/(T−1)`.
    IntensityRamp { gain: f64 },
}

/// One ellipse: center, semi-axes, intensity written inside it.
struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    value: f64,
}

/// Renders a piecewise-constant phantom of three nested ellipses with
/// deterministic motion. Intensities stay within `[0, 1]` for ramp gains up
/// to `2/3`; the imaginary parts are identically zero.
pub fn synth_phantom(frame_dims: (usize, usize), num_frames: usize, motion: Motion) -> ComplexTensor<f64> {
    let (nx, ny) = frame_dims;
    let cx = (nx as f64 - 1.0) / 2.0;
    let cy = (ny as f64 - 1.0) / 2.0;
    // Painted in order, inner ellipses overwriting outer ones.
    let ellipses = [
        Ellipse { cx, cy, a: 0.42 * nx as f64, b: 0.44 * ny as f64, value: 0.2 },
        Ellipse { cx: cx + 0.04 * nx as f64, cy: cy - 0.05 * ny as f64, a: 0.26 * nx as f64, b: 0.30 * ny as f64, value: 0.4 },
        Ellipse { cx: cx - 0.06 * nx as f64, cy: cy + 0.08 * ny as f64, a: 0.12 * nx as f64, b: 0.13 * ny as f64, value: 0.6 },
    ];

    let mut frames = ComplexTensor::zeros(vec![num_frames, ny, nx]);
    for k in 0..num_frames {
        let shift = match motion {
            Motion::Translate { px_per_frame } => (k as i64 * px_per_frame) as f64,
            _ => 0.0,
        };
        let scale = match motion {
            Motion::IntensityRamp { gain } if num_frames > 1 => {
                1.0 + gain * k as f64 / (num_frames as f64 - 1.0)
            }
            _ => 1.0,
        };
        let frame = frames.frame_mut(k);
        for y in 0..ny {
            for x in 0..nx {
                let mut value = 0.0;
                for e in &ellipses {
                    let dx = (x as f64 - shift - e.cx) / e.a;
                    let dy = (y as f64 - e.cy) / e.b;
                    if dx * dx + dy * dy <= 1.0 {
                        value = e.value;
                    }
                }
                frame[y * nx + x] = Cx::new(value * scale, 0.0);
            }
        }
    }
    frames
}
