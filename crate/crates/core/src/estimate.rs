//! Subsample least squares and the mean-squared-error theory around it.
//!
//! For a subsample `X*` (r × p) and a misspecification vector `h` on those
//! rows, the SLS estimator has
//!
//! ```text
//! MSE = σ² tr[(X*ᵀX*)⁻¹] + ‖(X*ᵀX*)⁻¹X*ᵀh‖²
//! ```
//!
//! and over all `h` with `‖h‖² <= α² tr(X*ᵀX*)` the second term peaks at
//! `α² tr(X*ᵀX*) / λ_min(X*ᵀX*)`. Both terms only depend on the singular
//! values of `X*`, which is how they are computed here.

use alloc::vec::Vec;

#[allow(unused_imports)] // needed without std, shadowed by inherent methods with it
use num_traits::Float;

use crate::linalg::{least_squares, norm, singular_values, sqrt_weights, Matrix, SingularSpectrum, Svd};
use crate::sampler::Method;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta: Vec<f64>,
    /// `κ(X*ᵀX*)` of the (weighted) design the fit used.
    pub kappa_sub: f64,
    /// `tr[(X*ᵀX*)⁻¹]`.
    pub trace_inv: f64,
    pub method: Option<Method>,
}

/// Least-squares fit on a subsample, weighted when `weights` is given.
pub fn fit_sls(x_sub: &Matrix, y_sub: &[f64], weights: Option<&[f64]>) -> Result<FitResult> {
    let beta = least_squares(x_sub, y_sub, weights)?;
    let spectrum = match weights {
        None => singular_values(x_sub),
        Some(w) => singular_values(&x_sub.scale_rows(&sqrt_weights(w, x_sub.rows())?)?),
    };
    Ok(FitResult {
        beta,
        kappa_sub: spectrum.condition_number(),
        trace_inv: spectrum.trace_inverse_gram(),
        method: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseReport {
    pub variance_term: f64,
    pub bias_sq_term: f64,
    pub total: f64,
}

fn full_rank_spectrum(x: &Matrix) -> Result<SingularSpectrum> {
    if x.rows() < x.cols() {
        return Err(Error::RankDeficient {
            rank: x.rows(),
            cols: x.cols(),
        });
    }
    let s = singular_values(x);
    if s.is_rank_deficient() {
        return Err(Error::RankDeficient {
            rank: s.rank(),
            cols: x.cols(),
        });
    }
    Ok(s)
}

/// Variance and squared-bias terms of the SLS estimator's MSE when the
/// errors on the subsample have mean `h_sub` and variance `sigma2`.
pub fn mse_decompose(x_sub: &Matrix, h_sub: &[f64], sigma2: f64) -> Result<MseReport> {
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidArgument("sigma2 must be nonnegative"));
    }
    let s = full_rank_spectrum(x_sub)?;
    let variance_term = sigma2 * s.trace_inverse_gram();
    let bias = least_squares(x_sub, h_sub, None)?;
    let b = norm(&bias);
    let bias_sq_term = b * b;
    Ok(MseReport {
        variance_term,
        bias_sq_term,
        total: variance_term + bias_sq_term,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub alpha: f64,
    pub bound: f64,
    pub variance_term: f64,
    pub bias_term: f64,
    /// Misspecification vector attaining the bound.
    pub h_star: Vec<f64>,
}

/// Worst-case MSE over misspecifications with `‖h‖² <= α² tr(X*ᵀX*)`.
///
/// The maximizer is the left singular vector of `X*` for its smallest
/// singular value, scaled to the boundary of the admissible ball.
pub fn worst_case_mse(x_sub: &Matrix, sigma2: f64, alpha: f64) -> Result<WorstCase> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument("alpha must be positive"));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidArgument("sigma2 must be nonnegative"));
    }
    full_rank_spectrum(x_sub)?;
    let svd = Svd::new(x_sub);
    let s = &svd.spectrum;
    let trace = s.trace_gram();
    let lambda_min = s.smallest() * s.smallest();
    let variance_term = sigma2 * s.trace_inverse_gram();
    let bias_term = alpha * alpha * trace / lambda_min;
    let radius = (alpha * alpha * trace).sqrt();
    let h_star = svd.smallest_left_vector().into_iter().map(|u| radius * u).collect();
    Ok(WorstCase {
        alpha,
        bound: variance_term + bias_term,
        variance_term,
        bias_term,
        h_star,
    })
}

fn design_and_perturbation(l: &Matrix, d: &Matrix) -> Result<(f64, f64, f64)> {
    if l.shape() != d.shape() {
        return Err(Error::Dimension("L and D must have the same shape"));
    }
    let sl = singular_values(l);
    let s1_d = singular_values(d).largest();
    let sp_l = sl.smallest();
    if sp_l <= s1_d {
        return Err(Error::AssumptionViolated {
            sp_design: sp_l,
            s1_perturbation: s1_d,
        });
    }
    Ok((sl.largest(), sp_l, s1_d))
}

/// Upper bound on `κ((L+D)ᵀ(L+D))` from Weyl's inequalities:
/// `((s_1(L) + s_1(D)) / (s_p(L) - s_1(D)))²`.
pub fn weyl_kappa_bound(l: &Matrix, d: &Matrix) -> Result<f64> {
    let (s1_l, sp_l, s1_d) = design_and_perturbation(l, d)?;
    let ratio = (s1_l + s1_d) / (sp_l - s1_d);
    Ok(ratio * ratio)
}

/// Upper bound on `tr[((L+D)ᵀ(L+D))⁻¹]`: `p / (s_p(L) - s_1(D))²`.
pub fn trace_inv_bound(l: &Matrix, d: &Matrix) -> Result<f64> {
    let (_, sp_l, s1_d) = design_and_perturbation(l, d)?;
    let gap = sp_l - s1_d;
    Ok(l.cols() as f64 / (gap * gap))
}

/// Leading terms of the MSE bound for a subsample that tracks the design `L`:
/// `σ² p² κ(LᵀL) / tr(LᵀL) + α² p κ(LᵀL)`. The remainder, which vanishes
/// with the perturbation size, is not included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremBound {
    pub variance_term: f64,
    pub bias_term: f64,
    pub leading: f64,
    pub kappa: f64,
    pub trace: f64,
}

pub fn theorem_bound(l: &Matrix, sigma2: f64, alpha: f64) -> Result<TheoremBound> {
    let s = full_rank_spectrum(l)?;
    let p = l.cols() as f64;
    let kappa = s.condition_number();
    let trace = s.trace_gram();
    let variance_term = sigma2 * p * p * kappa / trace;
    let bias_term = alpha * alpha * p * kappa;
    Ok(TheoremBound {
        variance_term,
        bias_term,
        leading: variance_term + bias_term,
        kappa,
        trace,
    })
}

/// Relative change of the SLS solution when `X*ᵀy*` moves by `delta_xty`
/// (`lhs`) against the condition-number bound on it (`rhs`).
pub fn condition_perturbation_ratio(x_sub: &Matrix, y_sub: &[f64], delta_xty: &[f64]) -> Result<(f64, f64)> {
    if delta_xty.len() != x_sub.cols() {
        return Err(Error::Dimension("perturbation must have one entry per column"));
    }
    full_rank_spectrum(x_sub)?;
    let xty = x_sub.tr_mat_vec(y_sub)?;
    let xty_norm = norm(&xty);
    if xty_norm == 0.0 {
        return Err(Error::InvalidArgument("X*ᵀy* must be nonzero"));
    }
    let svd = Svd::new(x_sub);
    let beta = gram_solve(&svd, &xty);
    let delta_beta = gram_solve(&svd, delta_xty);
    let lhs = norm(&delta_beta) / norm(&beta);
    let rhs = svd.spectrum.condition_number() * norm(delta_xty) / xty_norm;
    Ok((lhs, rhs))
}

/// `(XᵀX)⁻¹ b = V diag(1/s²) Vᵀ b`.
fn gram_solve(svd: &Svd, b: &[f64]) -> Vec<f64> {
    let s = svd.spectrum.values();
    let vt_b = svd.v.tr_mat_vec(b).expect("V has one row per column");
    let scaled: Vec<f64> = vt_b.iter().zip(s).map(|(c, si)| c / (si * si)).collect();
    svd.v.mat_vec(&scaled).expect("V is square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec;

    #[test]
    fn identity_fit() {
        let x = Matrix::identity(3);
        let f = fit_sls(&x, &[1.0, -2.0, 0.5], None).unwrap();
        assert_eq!(f.beta, vec![1.0, -2.0, 0.5]);
        assert!((f.trace_inv - 3.0).abs() < 1e-14);
        assert!((f.kappa_sub - 1.0).abs() < 1e-14);
    }

    #[test]
    fn duplicated_rows_still_solvable() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
        let y = [2.0, 2.0, 3.0, 2.0];
        let f = fit_sls(&x, &y, Some(&[0.5, 0.5, 2.0, 1.0])).unwrap();
        assert!((f.beta[0] - 2.0).abs() < 1e-12 && (f.beta[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mse_terms() {
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let r = mse_decompose(&x, &[0.0, 0.0, 0.0], 2.0).unwrap();
        assert_eq!(r.bias_sq_term, 0.0);
        assert!((r.variance_term - 4.0).abs() < 1e-14);
        // h in the column space of an orthonormal X: bias equals ‖h‖².
        let r = mse_decompose(&x, &[3.0, 4.0, 0.0], 0.0).unwrap();
        assert!((r.bias_sq_term - 25.0).abs() < 1e-12);
        assert!(mse_decompose(&x, &[0.0; 3], -1.0).is_err());
    }

    #[test]
    fn worst_case_at_identity() {
        let x = Matrix::identity(3);
        let w = worst_case_mse(&x, 2.0, 0.5).unwrap();
        assert!((w.bound - (2.0 * 3.0 + 0.25 * 3.0)).abs() < 1e-12);
        let check = mse_decompose(&x, &w.h_star, 2.0).unwrap();
        assert!((check.total - w.bound).abs() < 1e-12);
    }

    #[test]
    fn weyl_bounds_basic() {
        let l = Matrix::from_rows(&[[1.0, 0.0], [0.0, 2.0], [0.0, 0.0]]).unwrap();
        let zero = Matrix::zeros(3, 2);
        assert!((weyl_kappa_bound(&l, &zero).unwrap() - 4.0).abs() < 1e-12);
        let l1 = Matrix::column_vector(&[1.0, 0.0]).unwrap();
        let d1 = Matrix::column_vector(&[0.0, 0.5]).unwrap();
        assert!((trace_inv_bound(&l1, &d1).unwrap() - 4.0).abs() < 1e-12);
        let actual = singular_values(&l1.add(&d1).unwrap()).trace_inverse_gram();
        assert!((actual - 0.8).abs() < 1e-12);
        let q = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert!((trace_inv_bound(&q, &zero).unwrap() - 2.0).abs() < 1e-12);
        let big = Matrix::from_rows(&[[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(weyl_kappa_bound(&q, &big), Err(Error::AssumptionViolated { .. })));
        assert!(matches!(trace_inv_bound(&q, &big), Err(Error::AssumptionViolated { .. })));
    }

    #[test]
    fn theorem_bound_at_orthonormal() {
        let q = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let t = theorem_bound(&q, 0.0, 1.5).unwrap();
        assert!((t.leading - 2.25 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn perturbation_identity_is_tight() {
        let x = Matrix::identity(2);
        let (lhs, rhs) = condition_perturbation_ratio(&x, &[1.0, 2.0], &[0.3, -0.1]).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
        let (lhs, rhs) = condition_perturbation_ratio(&x, &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
        assert!(condition_perturbation_ratio(&x, &[0.0, 0.0], &[1.0, 0.0]).is_err());
    }
}
