//! Huber M-estimation by iteratively reweighted least squares.

use alloc::vec::Vec;

use crate::linalg::{least_squares, Matrix};
use crate::stats::median;
use crate::Result;

/// Consistency factor turning the MAD into a normal-scale estimate.
const MAD_TO_SIGMA: f64 = 1.482_602_218_505_602;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberOptions {
    /// Residuals beyond `tuning × scale` are downweighted. 1.345 gives 95%
    /// efficiency at the normal model.
    pub tuning: f64,
    pub max_iter: usize,
    /// Stop once the largest relative coefficient change drops below this.
    pub tol: f64,
}

impl Default for HuberOptions {
    fn default() -> Self {
        Self {
            tuning: 1.345,
            max_iter: 100,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HuberFit {
    pub beta: Vec<f64>,
    pub scale: f64,
    pub iterations: usize,
    /// False when `max_iter` ran out; `beta` is then the last iterate.
    pub converged: bool,
}

pub fn fit_huber_m(x: &Matrix, y: &[f64], options: &HuberOptions) -> Result<HuberFit> {
    let mut beta = least_squares(x, y, None)?;
    let mut scale = 0.0;
    for iter in 1..=options.max_iter {
        let fitted = x.mat_vec(&beta)?;
        let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        scale = mad_scale(&resid);
        if scale == 0.0 {
            // At least half the residuals vanish; nothing to reweight.
            return Ok(HuberFit {
                beta,
                scale,
                iterations: iter,
                converged: true,
            });
        }
        let cutoff = options.tuning * scale;
        let weights: Vec<f64> = resid
            .iter()
            .map(|e| if e.abs() <= cutoff { 1.0 } else { cutoff / e.abs() })
            .collect();
        let next = least_squares(x, y, Some(&weights))?;
        let change = next
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a - b).abs() / b.abs().max(1e-12))
            .fold(0.0f64, f64::max);
        beta = next;
        if change < options.tol {
            return Ok(HuberFit {
                beta,
                scale,
                iterations: iter,
                converged: true,
            });
        }
    }
    Ok(HuberFit {
        beta,
        scale,
        iterations: options.max_iter,
        converged: false,
    })
}

/// Normalized median absolute deviation about the median.
fn mad_scale(resid: &[f64]) -> f64 {
    let m = median(resid);
    let dev: Vec<f64> = resid.iter().map(|r| (r - m).abs()).collect();
    MAD_TO_SIGMA * median(&dev)
}
