//! Latin hypercube designs and their low-correlation (orthogonal) variant.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::linalg::{condition_number_info, Matrix};
use crate::{Error, Result};

/// Axis-aligned box `Π [lower_j, upper_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DesignBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Dimension("box bounds must have equal nonzero length"));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidArgument("box bounds must be finite"));
            }
            if lo >= hi {
                return Err(Error::DegenerateBox(j));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[-1, 1]^p`.
    pub fn unit(p: usize) -> Self {
        Self {
            lower: vec![-1.0; p],
            upper: vec![1.0; p],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    /// Maps a coordinate of `[-1, 1]` onto `[lower_j, upper_j]`.
    fn map(&self, j: usize, t: f64) -> f64 {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        if lo == -1.0 && hi == 1.0 {
            return t;
        }
        lo + (t + 1.0) * 0.5 * (hi - lo)
    }
}

/// An `r × p` Latin hypercube design placed in a box.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    /// Design points in box coordinates.
    pub points: Matrix,
    /// The same design on `[-1, 1]^p`; each column is a permutation of
    /// [`lhd_levels`].
    pub canonical: Matrix,
    pub design_box: DesignBox,
    /// `κ(LᵀL)` of `points`.
    pub kappa: f64,
    /// Largest absolute Pearson correlation between two columns.
    pub max_abs_corr: f64,
}

impl DesignMatrix {
    fn from_canonical(canonical: Matrix) -> Self {
        let p = canonical.cols();
        let points = canonical.clone();
        Self::assemble(points, canonical, DesignBox::unit(p))
    }

    fn assemble(points: Matrix, canonical: Matrix, design_box: DesignBox) -> Self {
        let kappa = condition_number_info(&points);
        let max_abs_corr = max_abs_correlation(&points);
        Self {
            points,
            canonical,
            design_box,
            kappa,
            max_abs_corr,
        }
    }

    pub fn runs(&self) -> usize {
        self.points.rows()
    }

    pub fn factors(&self) -> usize {
        self.points.cols()
    }
}

/// The `r` equispaced levels `(2k - 1 - r) / r`, `k = 1..=r`, ascending.
pub fn lhd_levels(r: usize) -> Vec<f64> {
    (1..=r).map(|k| level(odd_level(k, r), r)).collect()
}

/// Integer numerator `2k - 1 - r` of the k-th level.
fn odd_level(k: usize, r: usize) -> i64 {
    2 * k as i64 - 1 - r as i64
}

fn level(numerator: i64, r: usize) -> f64 {
    numerator as f64 / r as f64
}

/// Random Latin hypercube on `[-1, 1]^p`: every column is an independent
/// uniform permutation of the levels.
pub fn generate_lhd<R: Rng + ?Sized>(r: usize, p: usize, rng: &mut R) -> Result<DesignMatrix> {
    if r < 2 || p == 0 {
        return Err(Error::InvalidArgument("a Latin hypercube needs r >= 2 and p >= 1"));
    }
    let cols = IntDesign::random(r, p, rng);
    Ok(DesignMatrix::from_canonical(cols.to_matrix()))
}

/// Search parameters for [`generate_olhd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OlhdOptions {
    pub kappa_target: f64,
    pub max_restarts: usize,
    /// Swap proposals per restart; `None` means `200 r p`.
    pub swap_budget: Option<usize>,
}

impl Default for OlhdOptions {
    fn default() -> Self {
        Self {
            kappa_target: 1.13,
            max_restarts: 20,
            swap_budget: None,
        }
    }
}

/// Latin hypercube with small pairwise column correlations.
///
/// Starting from a random LHD, two entries of one column are swapped whenever
/// that lowers the largest absolute column correlation, or keeps it and lowers
/// the sum of squared correlations. A restart begins when the swap budget runs
/// out with `κ(LᵀL)` still above the target. The best design found is returned
/// even when the target is missed; its `kappa` field says how close it got.
pub fn generate_olhd<R: Rng + ?Sized>(
    r: usize,
    p: usize,
    rng: &mut R,
    options: &OlhdOptions,
) -> Result<DesignMatrix> {
    if p == 0 || r < 2 {
        return Err(Error::InvalidArgument("an OLHD needs r >= 2 and p >= 1"));
    }
    if r <= p {
        return Err(Error::InfeasibleDesign { runs: r, factors: p });
    }
    let budget = options.swap_budget.unwrap_or(200 * r * p);
    let mut best: Option<DesignMatrix> = None;
    for _ in 0..=options.max_restarts {
        let mut search = SwapSearch::new(IntDesign::random(r, p, rng));
        let design = search.run(budget, options.kappa_target, rng);
        let done = design.kappa <= options.kappa_target;
        if best.as_ref().is_none_or(|b| design.kappa < b.kappa) {
            best = Some(design);
        }
        if done {
            break;
        }
    }
    Ok(best.expect("at least one restart runs"))
}

/// Maps a canonical design affinely into `design_box`, column by column.
pub fn rescale_design(design: &DesignMatrix, design_box: &DesignBox) -> Result<DesignMatrix> {
    if design_box.dim() != design.factors() {
        return Err(Error::Dimension("box dimension differs from design"));
    }
    let c = &design.canonical;
    let points = Matrix::from_fn(c.rows(), c.cols(), |i, j| design_box.map(j, c[(i, j)]));
    Ok(DesignMatrix::assemble(points, c.clone(), design_box.clone()))
}

/// Largest absolute Pearson correlation over column pairs; zero for `p = 1`.
pub fn max_abs_correlation(x: &Matrix) -> f64 {
    let (n, p) = x.shape();
    let centered: Vec<Vec<f64>> = (0..p)
        .map(|j| {
            let col = x.column_vec(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            col.into_iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered.iter().map(|c| crate::linalg::norm(c)).collect();
    let mut worst = 0.0f64;
    for j in 0..p {
        for k in j + 1..p {
            if norms[j] == 0.0 || norms[k] == 0.0 {
                continue;
            }
            let c = crate::linalg::dot(&centered[j], &centered[k]) / (norms[j] * norms[k]);
            worst = worst.max(c.abs());
        }
    }
    worst
}

/// LHD with integer level numerators, column-major.
#[derive(Debug, Clone)]
struct IntDesign {
    r: usize,
    p: usize,
    cols: Vec<Vec<i64>>,
}

impl IntDesign {
    fn random<R: Rng + ?Sized>(r: usize, p: usize, rng: &mut R) -> Self {
        let base: Vec<i64> = (1..=r).map(|k| odd_level(k, r)).collect();
        let cols = (0..p)
            .map(|_| {
                let mut c = base.clone();
                c.shuffle(rng);
                c
            })
            .collect();
        Self { r, p, cols }
    }

    fn dot(&self, j: usize, k: usize) -> i64 {
        self.cols[j].iter().zip(&self.cols[k]).map(|(a, b)| a * b).sum()
    }

    fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.r, self.p, |i, j| level(self.cols[j][i], self.r))
    }
}

/// Greedy pairwise-swap descent on `(max |dot|, Σ dot²)`.
///
/// Column sums are zero for every permutation of the levels, so the integer
/// dot products are proportional to the column correlations.
struct SwapSearch {
    design: IntDesign,
    /// Symmetric `p × p` table of column dot products (diagonal unused).
    dots: Vec<i64>,
    max_dot: i64,
    sum_sq: i64,
    /// For each column, the largest |dot| among pairs not involving it.
    max_excluding: Vec<i64>,
    /// Pair realizing `max_dot`.
    worst_pair: (usize, usize),
    delta: Vec<i64>,
}

impl SwapSearch {
    fn new(design: IntDesign) -> Self {
        let p = design.p;
        let mut dots = vec![0; p * p];
        for j in 0..p {
            for k in j + 1..p {
                let d = design.dot(j, k);
                dots[j * p + k] = d;
                dots[k * p + j] = d;
            }
        }
        let mut s = Self {
            design,
            dots,
            max_dot: 0,
            sum_sq: 0,
            max_excluding: vec![0; p],
            worst_pair: (0, 0),
            delta: vec![0; p],
        };
        s.refresh();
        s
    }

    fn refresh(&mut self) {
        let p = self.design.p;
        let mut pairs: Vec<(i64, usize, usize)> = Vec::with_capacity(p * (p - 1) / 2);
        self.sum_sq = 0;
        for j in 0..p {
            for k in j + 1..p {
                let d = self.dots[j * p + k];
                self.sum_sq += d * d;
                pairs.push((d.abs(), j, k));
            }
        }
        pairs.sort_unstable_by(|a, b| b.cmp(a));
        self.max_dot = pairs.first().map_or(0, |t| t.0);
        self.worst_pair = pairs.first().map_or((0, 0), |t| (t.1, t.2));
        for (col, slot) in self.max_excluding.iter_mut().enumerate() {
            *slot = pairs
                .iter()
                .find(|t| t.1 != col && t.2 != col)
                .map_or(0, |t| t.0);
        }
    }

    fn kappa(&self) -> f64 {
        condition_number_info(&self.design.to_matrix())
    }

    fn run<R: Rng + ?Sized>(&mut self, budget: usize, target: f64, rng: &mut R) -> DesignMatrix {
        let (r, p) = (self.design.r, self.design.p);
        if p > 1 {
            let check_every = (r * p).max(64);
            for step in 0..budget {
                if self.max_dot == 0 {
                    break;
                }
                self.propose(rng);
                if (step + 1) % check_every == 0 && self.kappa() <= target {
                    break;
                }
            }
        }
        DesignMatrix::from_canonical(self.design.to_matrix())
    }

    fn propose<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let (r, p) = (self.design.r, self.design.p);
        let j = if rng.random_bool(0.5) {
            if rng.random_bool(0.5) {
                self.worst_pair.0
            } else {
                self.worst_pair.1
            }
        } else {
            rng.random_range(0..p)
        };
        let a = rng.random_range(0..r);
        let mut b = rng.random_range(0..r - 1);
        if b >= a {
            b += 1;
        }
        let cj = &self.design.cols[j];
        let diff = cj[a] - cj[b];
        let mut new_max = self.max_excluding[j];
        let mut new_sum_sq = self.sum_sq;
        for k in 0..p {
            if k == j {
                continue;
            }
            let ck = &self.design.cols[k];
            // Swapping rows a and b of column j shifts dot(j, k) by this amount.
            let d = diff * (ck[b] - ck[a]);
            self.delta[k] = d;
            let old = self.dots[j * p + k];
            let new = old + d;
            new_max = new_max.max(new.abs());
            new_sum_sq += new * new - old * old;
        }
        let better = new_max < self.max_dot || (new_max == self.max_dot && new_sum_sq < self.sum_sq);
        if !better {
            return;
        }
        self.design.cols[j].swap(a, b);
        for k in 0..p {
            if k != j {
                self.dots[j * p + k] += self.delta[k];
                self.dots[k * p + j] += self.delta[k];
            }
        }
        self.refresh();
    }
}
