//! Cross-checks the built-in Jacobi SVD against an independent dense
//! implementation (nalgebra) on random complex matrices.

mod common;

use common::{from_na, max_abs_diff, random_matrix, rng, to_na};
use onair_core::linalg::CMatrix;
use onair_core::{svd, truncated_svd, unitary_polar_factor, Cx};

fn recompose(u: &CMatrix<f64>, sigma: &[f64], v: &CMatrix<f64>) -> CMatrix<f64> {
    let mut scaled = u.clone();
    for (j, s) in sigma.iter().enumerate() {
        for z in scaled.col_mut(j) {
            *z *= Cx::new(*s, 0.0);
        }
    }
    scaled.mul_adjoint(v)
}

#[test]
fn singular_values_match_the_dense_oracle() {
    let mut r = rng(101);
    for &(p, q) in &[(5usize, 5usize), (8, 3), (3, 8), (12, 7), (64, 5)] {
        let a = random_matrix(&mut r, p, q);
        let mine = svd(&a).unwrap();
        let oracle = to_na(&a).svd(false, false);
        let mut want: Vec<f64> = oracle.singular_values.iter().copied().collect();
        want.sort_by(|x, y| y.partial_cmp(x).unwrap());
        assert_eq!(mine.sigma.len(), p.min(q));
        for (got, want) in mine.sigma.iter().zip(&want) {
            assert!(
                (got - want).abs() <= 1e-10 * want.max(1.0),
                "σ mismatch on {p}×{q}: {got} vs {want}"
            );
        }
        let back = recompose(&mine.u, &mine.sigma, &mine.v);
        assert!(
            max_abs_diff(&back, &a) < 1e-10,
            "UΣVᴴ must recompose the input for {p}×{q}"
        );
    }
}

#[test]
fn rank_one_truncation_residual_equals_the_tail_energy() {
    // 64×5 complex: ‖M − U₁σ₁V₁ᴴ‖_F² = Σ_{k≥2} σ_k², tail from the
    // independent full decomposition.
    let mut r = rng(202);
    let a = random_matrix(&mut r, 64, 5);
    let t = truncated_svd(&a, 1).unwrap();
    let approx = recompose(&t.u, &t.sigma, &t.v);
    let mut resid = a.clone();
    resid.add_scaled(-1.0, &approx);
    let got = resid.frob_norm_sq();

    let oracle = to_na(&a).svd(false, false);
    let mut sv: Vec<f64> = oracle.singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let want: f64 = sv[1..].iter().map(|s| s * s).sum();
    assert!(
        (got - want).abs() <= 1e-9 * want.max(1.0),
        "rank-1 residual energy {got} vs tail energy {want}"
    );
}

#[test]
fn truncations_match_the_oracle_reconstruction_at_every_rank() {
    let mut r = rng(303);
    let a = random_matrix(&mut r, 9, 6);
    let na = to_na(&a).svd(true, true);
    let u = na.u.as_ref().unwrap();
    let vt = na.v_t.as_ref().unwrap();
    for rank in 1..=6usize {
        let t = truncated_svd(&a, rank).unwrap();
        let mine = recompose(&t.u, &t.sigma, &t.v);
        // Oracle truncation from the independent factorization.
        let mut idx: Vec<usize> = (0..6).collect();
        idx.sort_by(|&i, &j| {
            na.singular_values[j].partial_cmp(&na.singular_values[i]).unwrap()
        });
        let mut oracle = nalgebra::DMatrix::zeros(9, 6);
        for &k in idx.iter().take(rank) {
            let uk = u.column(k);
            let vk = vt.row(k);
            let s = nalgebra::Complex::new(na.singular_values[k], 0.0);
            oracle += (uk * vk).scale(1.0) * s;
        }
        let diff = max_abs_diff(&mine, &from_na(&oracle));
        assert!(diff < 1e-9, "rank-{rank} truncation differs from oracle by {diff}");
    }
}

#[test]
fn polar_factor_matches_the_oracle_and_is_unitary() {
    let mut r = rng(404);
    for n in [3usize, 6, 10] {
        let a = random_matrix(&mut r, n, n);
        let mine = unitary_polar_factor(&a).unwrap();
        let na = to_na(&a).svd(true, true);
        let u = na.u.as_ref().unwrap();
        let vt = na.v_t.as_ref().unwrap();
        let oracle = from_na(&(u * vt));
        assert!(
            max_abs_diff(&mine, &oracle) < 1e-9,
            "polar factors differ on {n}×{n}"
        );
        let gram = mine.adjoint_mul(&mine);
        let mut eye = CMatrix::identity(n);
        eye.add_scaled(-1.0, &gram);
        assert!(eye.frob_norm() < 1e-12, "polar factor must be unitary");
    }
}
