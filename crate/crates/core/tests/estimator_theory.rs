mod common;

use common::{gaussian, rel_err, rng, to_na};
use lowcon_core::estimate::{
    condition_perturbation_ratio, fit_sls, mse_decompose, theorem_bound, trace_inv_bound, weyl_kappa_bound,
    worst_case_mse,
};
use lowcon_core::linalg::{least_squares, singular_values};
use lowcon_core::{Error, Matrix};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Admissible misspecifications satisfy `|h_i| <= α ‖x_i‖`.
fn random_admissible(x: &Matrix, alpha: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..x.rows())
        .map(|i| {
            let bound = alpha * lowcon_core::linalg::norm(x.row(i));
            rng.random_range(-1.0..=1.0) * bound
        })
        .collect()
}

#[test]
fn worst_case_is_attained_and_dominates() {
    let mut rng = rng(31);
    for case in 0..200 {
        let p = rng.random_range(1..=6);
        let r = rng.random_range(p + 1..=30);
        let x = gaussian(r, p, &mut rng);
        let sigma2 = rng.random_range(0.0..3.0);
        let alpha = rng.random_range(0.05..2.0);
        let wc = worst_case_mse(&x, sigma2, alpha).unwrap();
        let at_star = mse_decompose(&x, &wc.h_star, sigma2).unwrap();
        assert!(rel_err(at_star.total, wc.bound) <= 1e-8, "case {case}");
        let trace = singular_values(&x).trace_gram();
        let hs: f64 = wc.h_star.iter().map(|v| v * v).sum();
        assert!(rel_err(hs, alpha * alpha * trace) < 1e-10);
        for _ in 0..1000 {
            let h = random_admissible(&x, alpha, &mut rng);
            let m = mse_decompose(&x, &h, sigma2).unwrap();
            assert!(m.total <= wc.bound + 1e-10, "case {case}");
        }
    }
}

/// `max ‖(XᵀX)⁻¹Xᵀh‖²` over `‖h‖ = 1` is the largest eigenvalue of
/// `X(XᵀX)⁻²Xᵀ`, computed densely here.
#[test]
fn bias_maximum_matches_dense_eigenproblem() {
    let mut rng = rng(32);
    for _ in 0..30 {
        let p = rng.random_range(1..=5);
        let r = rng.random_range(p + 1..=25);
        let x = gaussian(r, p, &mut rng);
        let xa = to_na(&x);
        let g = (xa.transpose() * &xa).try_inverse().unwrap();
        let m = &xa * &g * &g * xa.transpose();
        let top = nalgebra::SymmetricEigen::new(m).eigenvalues.max();
        let trace = singular_values(&x).trace_gram();
        let wc = worst_case_mse(&x, 0.0, 1.0).unwrap();
        assert!(rel_err(wc.bias_term, trace * top) < 1e-9);
    }
}

#[test]
fn decomposition_matches_monte_carlo() {
    let mut rng = rng(33);
    let x = gaussian(20, 3, &mut rng);
    let beta = [1.0, -0.5, 2.0];
    let h: Vec<f64> = (0..20).map(|i| 0.3 * ((i as f64) * 0.7).sin()).collect();
    let sigma2 = 0.8;
    let report = mse_decompose(&x, &h, sigma2).unwrap();
    let mean = x.mat_vec(&beta).unwrap();
    let draws = 100_000;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut y = vec![0.0; 20];
    for _ in 0..draws {
        for i in 0..20 {
            let e: f64 = StandardNormal.sample(&mut rng);
            y[i] = mean[i] + h[i] + sigma2.sqrt() * e;
        }
        let b = least_squares(&x, &y, None).unwrap();
        let err: f64 = b.iter().zip(&beta).map(|(a, t)| (a - t) * (a - t)).sum();
        sum += err;
        sum_sq += err * err;
    }
    let m = sum / draws as f64;
    let se = ((sum_sq / draws as f64 - m * m) / draws as f64).sqrt();
    assert!((m - report.total).abs() <= 3.0 * se, "mc {m} ± {se} vs {}", report.total);
}

#[test]
fn weyl_bounds_hold_for_small_perturbations() {
    let mut rng = rng(34);
    let mut checked = 0;
    while checked < 500 {
        let p = rng.random_range(1..=6);
        let r = rng.random_range(p + 1..=40);
        let l = gaussian(r, p, &mut rng);
        let d = gaussian(r, p, &mut rng).scaled(rng.random_range(0.0..0.5));
        let (kb, tb) = match (weyl_kappa_bound(&l, &d), trace_inv_bound(&l, &d)) {
            (Ok(k), Ok(t)) => (k, t),
            (Err(Error::AssumptionViolated { .. }), _) => continue,
            other => panic!("unexpected {other:?}"),
        };
        let s = singular_values(&l.add(&d).unwrap());
        assert!(s.condition_number() <= kb * (1.0 + 1e-12));
        assert!(s.trace_inverse_gram() <= tb * (1.0 + 1e-12));
        checked += 1;
    }
}

#[test]
fn weyl_bounds_reject_large_perturbations() {
    let l = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
    let d = Matrix::from_rows(&[[2.0, 0.0], [0.0, 0.0], [0.0, 0.0]]).unwrap();
    assert!(matches!(weyl_kappa_bound(&l, &d), Err(Error::AssumptionViolated { .. })));
    assert!(matches!(trace_inv_bound(&l, &d), Err(Error::AssumptionViolated { .. })));
}

#[test]
fn leading_bound_matches_worst_case_for_orthogonal_design() {
    // For an orthogonal design the worst case is exactly the leading bound.
    let l = Matrix::from_rows(&[[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]).unwrap();
    let tb = theorem_bound(&l, 1.5, 0.4).unwrap();
    let wc = worst_case_mse(&l, 1.5, 0.4).unwrap();
    assert!((tb.kappa - 1.0).abs() < 1e-12);
    assert!(rel_err(tb.leading, wc.bound) < 1e-12);
}

#[test]
fn perturbation_ratio_respects_condition_bound() {
    let mut rng = rng(35);
    for _ in 0..100 {
        let x = gaussian(30, 4, &mut rng);
        let y = gaussian(30, 1, &mut rng).into_vec();
        let delta = gaussian(4, 1, &mut rng).scaled(1e-3).into_vec();
        let (lhs, rhs) = condition_perturbation_ratio(&x, &y, &delta).unwrap();
        assert!(lhs <= rhs * (1.0 + 1e-9));
    }
}

#[test]
fn weighted_fit_matches_row_scaled_ols() {
    let mut rng = rng(36);
    let x = gaussian(25, 3, &mut rng);
    let y = gaussian(25, 1, &mut rng).into_vec();
    let w: Vec<f64> = (0..25).map(|_| rng.random_range(0.1..4.0)).collect();
    let fit = fit_sls(&x, &y, Some(&w)).unwrap();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let xs = x.scale_rows(&sw).unwrap();
    let ys: Vec<f64> = y.iter().zip(&sw).map(|(a, b)| a * b).collect();
    let ols = least_squares(&xs, &ys, None).unwrap();
    for (a, b) in fit.beta.iter().zip(ols) {
        assert!((a - b).abs() < 1e-12);
    }
}
