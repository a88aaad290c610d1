//! Synthetic predictors, coefficients, misspecification terms and responses
//! for the simulation study.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

#[allow(unused_imports)] // needed without std, shadowed by inherent methods with it
use num_traits::Float;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::linalg::{cholesky, dot, Matrix};
use crate::{Error, Result};

/// Target for `max_i |h(x_i)|` after calibration.
pub const MISSPEC_PEAK: f64 = 10.0;

/// Predictor distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PredictorDist {
    /// `N(1, Σ)`
    D1,
    /// `0.5 N(0, 2Σ) + 0.5 N(1, Σ)`
    D2,
    /// `t_10(1, Σ)`
    D3,
}

impl PredictorDist {
    pub fn name(self) -> &'static str {
        match self {
            PredictorDist::D1 => "D1",
            PredictorDist::D2 => "D2",
            PredictorDist::D3 => "D3",
        }
    }
}

impl fmt::Display for PredictorDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PredictorDist {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "D1" => Ok(PredictorDist::D1),
            "D2" => Ok(PredictorDist::D2),
            "D3" => Ok(PredictorDist::D3),
            _ => Err(Error::InvalidArgument("unknown predictor distribution")),
        }
    }
}

/// Toeplitz covariance `Σ_ij = 10 · 0.6^|i-j|`.
#[derive(Debug, Clone)]
pub struct CovarianceSpec {
    sigma: Matrix,
    factor: Matrix,
}

impl CovarianceSpec {
    pub fn new(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("p must be positive"));
        }
        let sigma = Matrix::from_fn(p, p, |i, j| 10.0 * 0.6f64.powi(i.abs_diff(j) as i32));
        let factor = cholesky(&sigma)?;
        Ok(Self { sigma, factor })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.sigma
    }

    /// Lower Cholesky factor.
    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    pub fn dim(&self) -> usize {
        self.sigma.rows()
    }

    /// One draw of `chol(Σ) z` with `z ~ N(0, I)`.
    fn correlated_normal<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64], z: &mut [f64]) {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(&self.factor.row(i)[..=i], &z[..=i]);
        }
    }
}

/// Coefficients: the first and last `⌈0.2p⌉` entries are 1, the rest 0.1.
pub fn beta0(p: usize) -> Vec<f64> {
    let edge = (p as f64 * 0.2).ceil() as usize;
    (0..p)
        .map(|j| if j < edge || j + edge >= p { 1.0 } else { 0.1 })
        .collect()
}

pub fn gen_predictors<R: Rng + ?Sized>(dist: PredictorDist, n: usize, p: usize, rng: &mut R) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive"));
    }
    let cov = CovarianceSpec::new(p)?;
    match dist {
        PredictorDist::D1 => Ok(gen_normal_rows(&cov, n, 1.0, 1.0, rng)),
        PredictorDist::D2 => {
            let mut out = Matrix::zeros(n, p);
            let mut z = vec![0.0; p];
            let mut v = vec![0.0; p];
            let root2 = 2.0f64.sqrt();
            for i in 0..n {
                cov.correlated_normal(rng, &mut v, &mut z);
                let (loc, scale) = if rng.random_bool(0.5) { (0.0, root2) } else { (1.0, 1.0) };
                for (o, x) in out.row_mut(i).iter_mut().zip(&v) {
                    *o = loc + scale * x;
                }
            }
            Ok(out)
        }
        PredictorDist::D3 => gen_multivariate_t(&cov, n, 1.0, 10.0, rng),
    }
}

fn gen_normal_rows<R: Rng + ?Sized>(cov: &CovarianceSpec, n: usize, loc: f64, scale: f64, rng: &mut R) -> Matrix {
    let p = cov.dim();
    let mut out = Matrix::zeros(n, p);
    let mut z = vec![0.0; p];
    let mut v = vec![0.0; p];
    for i in 0..n {
        cov.correlated_normal(rng, &mut v, &mut z);
        for (o, x) in out.row_mut(i).iter_mut().zip(&v) {
            *o = loc + scale * x;
        }
    }
    out
}

/// Multivariate t: `location + chol(Σ) z / sqrt(χ²_df / df)` per row.
pub fn gen_multivariate_t<R: Rng + ?Sized>(
    cov: &CovarianceSpec,
    n: usize,
    location: f64,
    df: f64,
    rng: &mut R,
) -> Result<Matrix> {
    let chi = ChiSquared::new(df).map_err(|_| Error::InvalidArgument("degrees of freedom must be positive"))?;
    let p = cov.dim();
    let mut out = Matrix::zeros(n, p);
    let mut z = vec![0.0; p];
    let mut v = vec![0.0; p];
    for i in 0..n {
        cov.correlated_normal(rng, &mut v, &mut z);
        let w: f64 = chi.sample(rng);
        let scale = 1.0 / (w / df).sqrt();
        for (o, x) in out.row_mut(i).iter_mut().zip(&v) {
            *o = location + scale * x;
        }
    }
    Ok(out)
}

/// Misspecification term shapes. Coordinates are 1-based in the formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MisspecKind {
    /// `h = 0`
    H1,
    /// `h = 10 sin(x_3)`
    H2,
    /// `h = c₁ x_3 x_8`
    H3,
    /// `h = c₂ x_3 sin(x_8)`
    H4,
    /// `h = c₃ x_3²`
    H5,
}

impl MisspecKind {
    pub const ALL: [MisspecKind; 5] = [
        MisspecKind::H1,
        MisspecKind::H2,
        MisspecKind::H3,
        MisspecKind::H4,
        MisspecKind::H5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MisspecKind::H1 => "H1",
            MisspecKind::H2 => "H2",
            MisspecKind::H3 => "H3",
            MisspecKind::H4 => "H4",
            MisspecKind::H5 => "H5",
        }
    }

    pub fn min_dim(self) -> usize {
        match self {
            MisspecKind::H1 => 0,
            MisspecKind::H2 | MisspecKind::H5 => 3,
            MisspecKind::H3 | MisspecKind::H4 => 8,
        }
    }

    /// The shape with unit constant.
    fn shape(self, x: &[f64]) -> f64 {
        match self {
            MisspecKind::H1 => 0.0,
            MisspecKind::H2 => x[2].sin(),
            MisspecKind::H3 => x[2] * x[7],
            MisspecKind::H4 => x[2] * x[7].sin(),
            MisspecKind::H5 => x[2] * x[2],
        }
    }
}

impl fmt::Display for MisspecKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MisspecKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MisspecKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidArgument("unknown misspecification term"))
    }
}

/// `h(x) = constant × shape(x)`.
pub fn misspec_value(kind: MisspecKind, x: &[f64], constant: f64) -> Result<f64> {
    if x.len() < kind.min_dim() {
        return Err(Error::DimensionTooSmall {
            needed: kind.min_dim(),
            got: x.len(),
        });
    }
    Ok(constant * kind.shape(x))
}

/// `c = 10 / max_i |g(x_i)|` for the unit-constant shape `g`.
pub fn calibrate_constant(kind: MisspecKind, x: &Matrix) -> Result<f64> {
    if !matches!(kind, MisspecKind::H3 | MisspecKind::H4 | MisspecKind::H5) {
        return Err(Error::InvalidArgument("only H3, H4 and H5 carry a calibrated constant"));
    }
    if x.cols() < kind.min_dim() {
        return Err(Error::DimensionTooSmall {
            needed: kind.min_dim(),
            got: x.cols(),
        });
    }
    let peak = (0..x.rows()).map(|i| kind.shape(x.row(i)).abs()).fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok(MISSPEC_PEAK / peak)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisspecTerm {
    pub kind: MisspecKind,
    pub constant: f64,
}

impl MisspecTerm {
    /// Term for the sample `x`, with its constant calibrated where the
    /// formula has a free one.
    pub fn calibrated(kind: MisspecKind, x: &Matrix) -> Result<Self> {
        let constant = match kind {
            MisspecKind::H1 => 0.0,
            MisspecKind::H2 => {
                if x.cols() < 3 {
                    return Err(Error::DimensionTooSmall { needed: 3, got: x.cols() });
                }
                MISSPEC_PEAK
            }
            _ => calibrate_constant(kind, x)?,
        };
        Ok(Self { kind, constant })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        misspec_value(self.kind, x, self.constant)
    }

    pub fn values(&self, x: &Matrix) -> Result<Vec<f64>> {
        (0..x.rows()).map(|i| self.value(x.row(i))).collect()
    }
}

/// `y_i = x_iᵀβ₀ + h(x_i) + σ z_i`.
pub fn gen_response<R: Rng + ?Sized>(
    x: &Matrix,
    beta0: &[f64],
    misspec: &MisspecTerm,
    sigma2: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if beta0.len() != x.cols() {
        return Err(Error::Dimension("beta0 length differs from column count"));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidArgument("sigma2 must be nonnegative"));
    }
    let sigma = sigma2.sqrt();
    let mut y = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let row = x.row(i);
        let z: f64 = StandardNormal.sample(rng);
        y.push(dot(row, beta0) + misspec.value(row)? + sigma * z);
    }
    Ok(y)
}

/// One-predictor partially linear model `y = x + sin(x²)/2 + ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyModel {
    pub n: usize,
    /// `x ~ N(0, 1)` conditioned on `|x| <= truncation`.
    pub truncation: f64,
    pub noise_sd: f64,
}

impl Default for ToyModel {
    fn default() -> Self {
        Self {
            n: 1000,
            truncation: 3.0,
            noise_sd: 1.0,
        }
    }
}

impl ToyModel {
    /// Coefficient of the postulated model `y = βx + ε`.
    pub const BETA0: f64 = 1.0;

    pub fn mean(x: f64) -> f64 {
        x + (x * x).sin() / 2.0
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.n == 0 || !(self.truncation > 0.0) || !(self.noise_sd >= 0.0) {
            return Err(Error::InvalidArgument("toy model needs n >= 1, truncation > 0, noise_sd >= 0"));
        }
        let mut x = Vec::with_capacity(self.n);
        while x.len() < self.n {
            let v: f64 = StandardNormal.sample(rng);
            if v.abs() <= self.truncation {
                x.push(v);
            }
        }
        let y = x
            .iter()
            .map(|&v| {
                let e: f64 = StandardNormal.sample(rng);
                Self::mean(v) + self.noise_sd * e
            })
            .collect();
        Ok((x, y))
    }
}

/// Convenience wrapper around [`ToyModel::generate`] with default settings.
pub fn toy_example<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
    ToyModel {
        n,
        ..ToyModel::default()
    }
    .generate(rng)
}
