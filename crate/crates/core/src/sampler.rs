//! Subsampling methods: LowCon and the five baselines it is compared with.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::design::{generate_olhd, rescale_design, DesignBox, DesignMatrix, OlhdOptions};
use crate::linalg::{condition_number_info, leverage_scores, Matrix};
use crate::spatial::{ClaimSet, PointIndex};
use crate::stats::quantile_sorted;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Unif,
    Blev,
    Slev,
    Levunw,
    Iboss,
    Lowcon,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Unif,
        Method::Blev,
        Method::Slev,
        Method::Levunw,
        Method::Iboss,
        Method::Lowcon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Unif => "UNIF",
            Method::Blev => "BLEV",
            Method::Slev => "SLEV",
            Method::Levunw => "LEVUNW",
            Method::Iboss => "IBOSS",
            Method::Lowcon => "LOWCON",
        }
    }

    /// Stable numeric label, used to derive per-method random streams.
    pub fn id(self) -> u64 {
        self as u64
    }

    /// Whether the method draws with replacement and may repeat rows.
    pub fn with_replacement(self) -> bool {
        matches!(self, Method::Blev | Method::Slev | Method::Levunw)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidArgument("unknown subsampling method"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionDiagnostics {
    /// `κ(X*ᵀX*)` of the selected raw rows.
    pub kappa_sub: f64,
    /// Mean distance from design points to their claimed sample points
    /// (LowCon only).
    pub mean_nn_distance: Option<f64>,
}

/// Row indices into the full sample, plus optional weights for weighted LS.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsampleSelection {
    pub indices: Vec<usize>,
    pub weights: Option<Vec<f64>>,
    pub method: Method,
    pub diagnostics: SelectionDiagnostics,
}

impl SubsampleSelection {
    fn new(x: &Matrix, indices: Vec<usize>, weights: Option<Vec<f64>>, method: Method) -> Self {
        let kappa_sub = condition_number_info(&x.select_rows(&indices));
        Self {
            indices,
            weights,
            method,
            diagnostics: SelectionDiagnostics {
                kappa_sub,
                mean_nn_distance: None,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Per-column range of the raw sample, used to map it onto `[-1, 1]^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalingSpec {
    pub fn scale(&self, j: usize, v: f64) -> f64 {
        2.0 * (v - self.min[j]) / (self.max[j] - self.min[j]) - 1.0
    }

    pub fn unscale(&self, j: usize, v: f64) -> f64 {
        self.min[j] + (v + 1.0) * 0.5 * (self.max[j] - self.min[j])
    }
}

/// Affinely maps every column onto exactly `[-1, 1]`.
pub fn scale_to_cube(x: &Matrix) -> Result<(Matrix, ScalingSpec)> {
    let p = x.cols();
    let mut min = Vec::with_capacity(p);
    let mut max = Vec::with_capacity(p);
    for j in 0..p {
        let (lo, hi) = x
            .column(j)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if lo >= hi {
            return Err(Error::ConstantColumn(j));
        }
        min.push(lo);
        max.push(hi);
    }
    let spec = ScalingSpec { min, max };
    let scaled = Matrix::from_fn(x.rows(), p, |i, j| spec.scale(j, x[(i, j)]));
    Ok((scaled, spec))
}

/// Per-column `[θ-percentile, (100-θ)-percentile]` box of scaled data, with
/// linearly interpolated quantiles.
pub fn theta_box(scaled: &Matrix, theta: f64) -> Result<DesignBox> {
    if !(0.0..50.0).contains(&theta) {
        return Err(Error::InvalidArgument("theta must lie in [0, 50)"));
    }
    let q = theta / 100.0;
    let mut lower = Vec::with_capacity(scaled.cols());
    let mut upper = Vec::with_capacity(scaled.cols());
    for j in 0..scaled.cols() {
        let mut col = scaled.column_vec(j);
        col.sort_by(f64::total_cmp);
        let lo = quantile_sorted(&col, q);
        let hi = quantile_sorted(&col, 1.0 - q);
        if lo >= hi {
            return Err(Error::DegenerateBox(j));
        }
        lower.push(lo);
        upper.push(hi);
    }
    DesignBox::new(lower, upper)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowconOptions {
    /// Trimming percentile for the design box, in `[0, 50)`.
    pub theta: f64,
    pub olhd: OlhdOptions,
    /// Let several design points claim the same sample point.
    pub allow_duplicates: bool,
}

impl Default for LowconOptions {
    fn default() -> Self {
        Self {
            theta: 1.0,
            olhd: OlhdOptions::default(),
            allow_duplicates: false,
        }
    }
}

/// Everything LowCon produced on the way to its selection.
#[derive(Debug, Clone)]
pub struct LowconOutcome {
    pub selection: SubsampleSelection,
    /// Sample scaled to `[-1, 1]^p`.
    pub scaled: Matrix,
    pub scaling: ScalingSpec,
    /// Design points placed in the trimmed box, in claiming order.
    pub design: DesignMatrix,
    /// Distance from each design point to the sample point it claimed.
    pub distances: Vec<f64>,
}

impl LowconOutcome {
    /// Selected scaled rows, aligned with the design rows.
    pub fn selected_scaled(&self) -> Matrix {
        self.scaled.select_rows(&self.selection.indices)
    }

    /// `D = X*_L - L` in scaled coordinates.
    pub fn perturbation(&self) -> Matrix {
        self.selected_scaled()
            .sub(&self.design.points)
            .expect("design and selection share a shape")
    }
}

pub fn lowcon<R: Rng + ?Sized>(x: &Matrix, r: usize, options: &LowconOptions, rng: &mut R) -> Result<SubsampleSelection> {
    lowcon_detailed(x, r, options, rng).map(|o| o.selection)
}

/// Scale to the cube, lay an OLHD over the θ-trimmed box and let each design
/// point claim its nearest sample point.
pub fn lowcon_detailed<R: Rng + ?Sized>(
    x: &Matrix,
    r: usize,
    options: &LowconOptions,
    rng: &mut R,
) -> Result<LowconOutcome> {
    let (n, p) = x.shape();
    if r < p + 1 || r > n {
        return Err(Error::InvalidArgument("LowCon needs p + 1 <= r <= n"));
    }
    let (scaled, scaling) = scale_to_cube(x)?;
    let design_box = theta_box(&scaled, options.theta)?;
    let canonical = generate_olhd(r, p, rng, &options.olhd)?;
    let design = rescale_design(&canonical, &design_box)?;

    let index = PointIndex::build(scaled.clone());
    let mut claimed = ClaimSet::new(n);
    let mut indices = Vec::with_capacity(r);
    let mut distances = Vec::with_capacity(r);
    for i in 0..r {
        let nb = index.nearest(design.points.row(i), &claimed)?;
        if !options.allow_duplicates {
            claimed.insert(nb.index);
        }
        indices.push(nb.index);
        distances.push(nb.distance);
    }
    let mut selection = SubsampleSelection::new(x, indices, None, Method::Lowcon);
    selection.diagnostics.mean_nn_distance = Some(distances.iter().sum::<f64>() / r as f64);
    Ok(LowconOutcome {
        selection,
        scaled,
        scaling,
        design,
        distances,
    })
}

/// Simple random sampling without replacement.
pub fn unif<R: Rng + ?Sized>(x: &Matrix, r: usize, rng: &mut R) -> Result<SubsampleSelection> {
    let n = x.rows();
    if r == 0 || r > n {
        return Err(Error::InvalidArgument("UNIF needs 1 <= r <= n"));
    }
    let indices = rand::seq::index::sample(rng, n, r).into_vec();
    Ok(SubsampleSelection::new(x, indices, None, Method::Unif))
}

/// Sampling probabilities `π_i = α h_ii / p + (1 - α) / n`.
pub fn leverage_probabilities(x: &Matrix, alpha: f64) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument("shrinkage alpha must lie in (0, 1]"));
    }
    let (n, p) = x.shape();
    let h = leverage_scores(x)?;
    Ok(h.into_iter()
        .map(|hi| alpha * hi / p as f64 + (1.0 - alpha) / n as f64)
        .collect())
}

fn draw_weighted<R: Rng + ?Sized>(
    x: &Matrix,
    model: &Matrix,
    r: usize,
    alpha: f64,
    method: Method,
    rng: &mut R,
) -> Result<SubsampleSelection> {
    if r == 0 || r > x.rows() {
        return Err(Error::InvalidArgument("leverage sampling needs 1 <= r <= n"));
    }
    if model.rows() != x.rows() {
        return Err(Error::Dimension("model matrix and sample differ in rows"));
    }
    let pi = leverage_probabilities(model, alpha)?;
    let dist = WeightedIndex::new(&pi).map_err(|_| Error::InvalidArgument("degenerate sampling probabilities"))?;
    let indices: Vec<usize> = (0..r).map(|_| dist.sample(rng)).collect();
    let weights = indices.iter().map(|&i| 1.0 / (r as f64 * pi[i])).collect();
    Ok(SubsampleSelection::new(x, indices, Some(weights), method))
}

/// Basic leverage sampling: `π ∝ h_ii`, with replacement, weights `1/(rπ)`.
pub fn blev<R: Rng + ?Sized>(x: &Matrix, r: usize, rng: &mut R) -> Result<SubsampleSelection> {
    draw_weighted(x, x, r, 1.0, Method::Blev, rng)
}

/// Shrinkage leverage sampling, mixing leverage with the uniform distribution.
pub fn slev<R: Rng + ?Sized>(x: &Matrix, r: usize, alpha: f64, rng: &mut R) -> Result<SubsampleSelection> {
    draw_weighted(x, x, r, alpha, Method::Slev, rng)
}

/// Same draw as [`blev`], fitted without weights.
pub fn levunw<R: Rng + ?Sized>(x: &Matrix, r: usize, rng: &mut R) -> Result<SubsampleSelection> {
    let mut s = blev(x, r, rng)?;
    s.weights = None;
    s.method = Method::Levunw;
    Ok(s)
}

/// Information-based optimal subset selection: for each column in turn take
/// the `⌊r/2p⌋` smallest and largest values among rows not yet chosen. Any
/// remainder comes from column 0, alternating smallest and largest.
pub fn iboss(x: &Matrix, r: usize) -> Result<SubsampleSelection> {
    let (n, p) = x.shape();
    if r < 2 * p || r > n {
        return Err(Error::InvalidArgument("IBOSS needs 2p <= r <= n"));
    }
    let per_side = r / (2 * p);
    let mut taken = ClaimSet::new(n);
    let mut indices = Vec::with_capacity(r);
    for j in 0..p {
        let pool = sorted_pool(x, j, &taken);
        for &i in pool.iter().take(per_side) {
            taken.insert(i);
            indices.push(i);
        }
        for &i in pool.iter().rev().filter(|&&i| !taken.contains(i)).take(per_side).collect::<Vec<_>>() {
            taken.insert(i);
            indices.push(i);
        }
    }
    let mut from_low = true;
    while indices.len() < r {
        let pool = sorted_pool(x, 0, &taken);
        let i = if from_low { pool[0] } else { pool[pool.len() - 1] };
        taken.insert(i);
        indices.push(i);
        from_low = !from_low;
    }
    Ok(SubsampleSelection::new(x, indices, None, Method::Iboss))
}

/// Unclaimed rows ordered by column `j`, then by index.
fn sorted_pool(x: &Matrix, j: usize, taken: &ClaimSet) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..x.rows()).filter(|&i| !taken.contains(i)).collect();
    pool.sort_by(|&a, &b| x[(a, j)].total_cmp(&x[(b, j)]).then(a.cmp(&b)));
    pool
}

/// Tunables shared by all methods.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerParams {
    pub lowcon: LowconOptions,
    pub slev_alpha: f64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self {
            lowcon: LowconOptions::default(),
            slev_alpha: 0.9,
        }
    }
}

/// Runs `method` on the predictors `x`. Leverage-based methods score rows of
/// `model` instead when given (e.g. the predictors with an intercept column).
pub fn select<R: Rng + ?Sized>(
    method: Method,
    x: &Matrix,
    model: Option<&Matrix>,
    r: usize,
    params: &SamplerParams,
    rng: &mut R,
) -> Result<SubsampleSelection> {
    let model = model.unwrap_or(x);
    match method {
        Method::Unif => unif(x, r, rng),
        Method::Blev => draw_weighted(x, model, r, 1.0, Method::Blev, rng),
        Method::Slev => draw_weighted(x, model, r, params.slev_alpha, Method::Slev, rng),
        Method::Levunw => {
            let mut s = draw_weighted(x, model, r, 1.0, Method::Levunw, rng)?;
            s.weights = None;
            Ok(s)
        }
        Method::Iboss => iboss(x, r),
        Method::Lowcon => lowcon(x, r, &params.lowcon, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::vec;

    #[test]
    fn cube_scaling() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let (s, spec) = scale_to_cube(&x).unwrap();
        assert_eq!(s.column_vec(0), vec![-1.0, 0.0, 1.0]);
        assert_eq!(spec.unscale(0, 0.0), 1.0);
        let x = Matrix::from_rows(&[[-1.0], [1.0]]).unwrap();
        assert_eq!(scale_to_cube(&x).unwrap().0, x);
        let c = Matrix::from_rows(&[[1.0, 3.0], [2.0, 3.0]]).unwrap();
        assert_eq!(scale_to_cube(&c).unwrap_err(), Error::ConstantColumn(1));
    }

    #[test]
    fn theta_box_on_grid() {
        let col: Vec<[f64; 1]> = (0..=100).map(|k| [-1.0 + 0.02 * k as f64]).collect();
        let x = Matrix::from_rows(&col).unwrap();
        let b = theta_box(&x, 1.0).unwrap();
        assert!((b.lower()[0] + 0.98).abs() < 1e-12);
        assert!((b.upper()[0] - 0.98).abs() < 1e-12);
        let (s, _) = scale_to_cube(&x).unwrap();
        let b0 = theta_box(&s, 0.0).unwrap();
        assert_eq!((b0.lower()[0], b0.upper()[0]), (-1.0, 1.0));
        assert!(theta_box(&x, 50.0).is_err());
        assert!(theta_box(&x, -1.0).is_err());
    }

    #[test]
    fn degenerate_theta_box() {
        let x = Matrix::from_rows(&[[-1.0], [0.0], [0.0], [0.0], [1.0]]).unwrap();
        assert_eq!(theta_box(&x, 30.0).unwrap_err(), Error::DegenerateBox(0));
    }

    #[test]
    fn iboss_extremes() {
        let x = Matrix::from_rows(&[[5.0], [1.0], [9.0], [3.0], [7.0]]).unwrap();
        let s = iboss(&x, 4).unwrap();
        let mut got = s.indices.clone();
        got.sort();
        assert_eq!(got, vec![1, 2, 3, 4]);
        assert!(s.weights.is_none());
        assert!(iboss(&x, 1).is_err());
    }

    #[test]
    fn iboss_remainder_alternates_on_first_column() {
        let x = Matrix::from_fn(10, 1, |i, _| i as f64);
        let s = iboss(&x, 5).unwrap();
        // Two from each end, then the next smallest.
        assert_eq!(s.indices, vec![0, 1, 9, 8, 2]);
    }

    #[test]
    fn unif_full_population() {
        let x = Matrix::from_fn(6, 2, |i, j| (i * 3 + j * j) as f64 + 0.5 * (i * j) as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = unif(&x, 6, &mut rng).unwrap().indices;
        s.sort();
        assert_eq!(s, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn slev_alpha_one_is_blev() {
        let x = Matrix::from_fn(40, 2, |i, j| ((i * 7 + j * 13) % 11) as f64 + (i as f64) * 0.1 * (j as f64 + 1.0));
        let a = blev(&x, 12, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = slev(&x, 12, 1.0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let c = levunw(&x, 12, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a.indices, b.indices);
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.indices, c.indices);
        assert!(c.weights.is_none());
        let pi = leverage_probabilities(&x, 0.9).unwrap();
        assert!(pi.iter().all(|&v| v >= 0.1 / 40.0 - 1e-15));
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(leverage_probabilities(&x, 0.0).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("lowcon".parse::<Method>().unwrap(), Method::Lowcon);
        assert!("nope".parse::<Method>().is_err());
    }
}
