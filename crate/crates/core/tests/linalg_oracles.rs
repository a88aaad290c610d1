mod common;

use common::{gaussian, gram_eigenvalues, rel_err, rng, to_na};
use lowcon_core::linalg::{
    cholesky, condition_number_info, least_squares, leverage_scores, singular_values, Qr, Svd,
};
use lowcon_core::Matrix;
use proptest::prelude::*;

#[test]
fn singular_values_match_gram_eigenvalues() {
    let mut rng = rng(11);
    for case in 0..200 {
        let p = 1 + case % 8;
        let r = p + 1 + (case * 7) % 40;
        let a = gaussian(r, p, &mut rng);
        let s = singular_values(&a);
        let ev = gram_eigenvalues(&a);
        for (sv, e) in s.values().iter().zip(&ev) {
            assert!(rel_err(sv * sv, *e) < 1e-10, "case {case}: {} vs {e}", sv * sv);
        }
        let kappa = ev[0] / ev[p - 1];
        assert!(rel_err(condition_number_info(&a), kappa) < 1e-10);
    }
}

#[test]
fn ill_conditioned_spectrum_is_accurate() {
    // Columns with scales spread over five orders of magnitude.
    let mut rng = rng(12);
    let base = gaussian(60, 5, &mut rng);
    let a = Matrix::from_fn(60, 5, |i, j| base[(i, j)] * 10f64.powi(-(j as i32)));
    let s = singular_values(&a);
    for (sv, e) in s.values().iter().zip(gram_eigenvalues(&a)) {
        assert!(rel_err(sv * sv, e) < 1e-8);
    }
}

#[test]
fn leverage_matches_dense_hat_matrix() {
    let mut rng = rng(13);
    for case in 0..50 {
        let p = 1 + case % 6;
        let n = p + 5 + case;
        let x = gaussian(n, p, &mut rng);
        let xa = to_na(&x);
        let hat = &xa * (xa.transpose() * &xa).try_inverse().unwrap() * xa.transpose();
        let h = leverage_scores(&x).unwrap();
        for i in 0..n {
            assert!((h[i] - hat[(i, i)]).abs() < 1e-10, "case {case} row {i}");
        }
    }
}

#[test]
fn least_squares_matches_normal_equations() {
    let mut rng = rng(14);
    let x = gaussian(50, 4, &mut rng);
    let y: Vec<f64> = gaussian(50, 1, &mut rng).into_vec();
    let w: Vec<f64> = (0..50).map(|i| 0.5 + (i % 7) as f64).collect();
    let xa = to_na(&x);
    let ya = nalgebra::DVector::from_vec(y.clone());
    let wa = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(w.clone()));
    let expect = (xa.transpose() * &wa * &xa).try_inverse().unwrap() * xa.transpose() * &wa * ya;
    let beta = least_squares(&x, &y, Some(&w)).unwrap();
    for j in 0..4 {
        assert!((beta[j] - expect[j]).abs() < 1e-10);
    }
}

#[test]
fn svd_and_qr_reconstruct() {
    let mut rng = rng(15);
    let a = gaussian(12, 4, &mut rng);
    let svd = Svd::new(&a);
    let us = Matrix::from_fn(12, 4, |i, j| svd.u[(i, j)] * svd.spectrum.values()[j]);
    let back = us.matmul(&svd.v.transpose()).unwrap();
    assert!(back.sub(&a).unwrap().frobenius_norm() < 1e-12);
    let qr = Qr::new(&a).unwrap();
    let back = qr.thin_q().matmul(&qr.r()).unwrap();
    assert!(back.sub(&a).unwrap().frobenius_norm() < 1e-12);
    let qtq = qr.thin_q().transpose().matmul(&qr.thin_q()).unwrap();
    assert!(qtq.sub(&Matrix::identity(4)).unwrap().frobenius_norm() < 1e-13);
}

#[test]
fn cholesky_reproduces_matrix() {
    let mut rng = rng(16);
    let b = gaussian(8, 5, &mut rng);
    let a = b.transpose().matmul(&b).unwrap();
    let l = cholesky(&a).unwrap();
    let back = l.matmul(&l.transpose()).unwrap();
    assert!(back.sub(&a).unwrap().frobenius_norm() < 1e-10 * a.frobenius_norm());
}

fn matrix_strategy() -> impl Strategy<Value = Matrix> {
    (1usize..6, 0usize..20, any::<u64>()).prop_map(|(p, extra, seed)| gaussian(p + 1 + extra, p, &mut rng(seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residuals_are_orthogonal_to_columns(x in matrix_strategy(), seed in any::<u64>()) {
        let y = gaussian(x.rows(), 1, &mut rng(seed)).into_vec();
        let beta = least_squares(&x, &y, None).unwrap();
        let fitted = x.mat_vec(&beta).unwrap();
        let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let xtr = x.tr_mat_vec(&resid).unwrap();
        let scale = x.frobenius_norm() * lowcon_core::linalg::norm(&y);
        for v in xtr {
            prop_assert!(v.abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn kappa_is_scale_invariant(x in matrix_strategy(), c in 1e-3f64..1e3) {
        let k = condition_number_info(&x);
        prop_assert!(rel_err(condition_number_info(&x.scaled(c)), k) < 1e-9);
    }

    #[test]
    fn leverage_sums_to_rank(x in matrix_strategy()) {
        let h = leverage_scores(&x).unwrap();
        let total: f64 = h.iter().sum();
        prop_assert!((total - x.cols() as f64).abs() < 1e-10);
        prop_assert!(h.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn weyl_inequality_for_singular_values(x in matrix_strategy(), seed in any::<u64>(), eps in 0.0f64..2.0) {
        let d = gaussian(x.rows(), x.cols(), &mut rng(seed)).scaled(eps);
        let sa = singular_values(&x);
        let sd = singular_values(&d).largest();
        let sum = singular_values(&x.add(&d).unwrap());
        for (a, b) in sa.values().iter().zip(sum.values()) {
            prop_assert!((a - b).abs() <= sd * (1.0 + 1e-12) + 1e-12);
        }
    }
}
