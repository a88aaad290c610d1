//! Dense linear algebra used throughout the crate.
//!
//! Least squares goes through a Householder QR factorization and every
//! spectral quantity (condition numbers, trace of the inverse Gram matrix)
//! comes from singular values computed by one-sided Jacobi rotations. Nothing
//! here ever forms an explicit inverse.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

#[allow(unused_imports)] // needed without std, shadowed by inherent methods with it
use num_traits::Float;

use crate::{Error, Result};

/// Relative cutoff used to declare numerical rank deficiency.
pub const RANK_EPS: f64 = 1e-12;

const JACOBI_EPS: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 80;

/// Dense real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix needs at least one row and one column"));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension("entry count does not match shape"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::Dimension("ragged rows"));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(rows.len(), cols, data)
    }

    /// Single-column matrix.
    pub fn column_vector(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data[j..].iter().step_by(self.cols).copied()
    }

    pub fn column_vec(&self, j: usize) -> Vec<f64> {
        self.column(j).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Rows at `indices`, in that order (repeats allowed).
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        assert!(!indices.is_empty(), "empty row selection");
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn matmul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension("inner dimensions differ"));
        }
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = rhs.row(k);
                for (o, b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension("vector length differs from column count"));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    /// `selfᵀ v`.
    pub fn tr_mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows {
            return Err(Error::Dimension("vector length differs from row count"));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::Dimension("shapes differ"));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// Multiplies row `i` by `factors[i]`.
    pub fn scale_rows(&self, factors: &[f64]) -> Result<Matrix> {
        if factors.len() != self.rows {
            return Err(Error::Dimension("one factor per row required"));
        }
        let mut out = self.clone();
        for (i, &f) in factors.iter().enumerate() {
            out.row_mut(i).iter_mut().for_each(|v| *v *= f);
        }
        Ok(out)
    }

    /// Prepends a column of ones.
    pub fn with_intercept(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols + 1, |i, j| {
            if j == 0 {
                1.0
            } else {
                self[(i, j - 1)]
            }
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Column-major copy, the layout the factorizations work in.
    fn to_col_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            out.extend(self.column(j));
        }
        out
    }

    fn from_col_major(rows: usize, cols: usize, cm: &[f64]) -> Matrix {
        Matrix::from_fn(rows, cols, |i, j| cm[j * rows + i])
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm with scaling against overflow.
pub fn norm(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = v.iter().map(|x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

/// Singular values `s_1 >= ... >= s_k`, `k = min(rows, cols)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn smallest(&self) -> f64 {
        *self.values.last().expect("spectrum is never empty")
    }

    /// `s_k < max(rows, cols) * s_1 * 1e-12`.
    pub fn is_rank_deficient(&self) -> bool {
        self.rank() < self.values.len()
    }

    pub fn rank(&self) -> usize {
        let tol = self.rows.max(self.cols) as f64 * self.largest() * RANK_EPS;
        if self.largest() == 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&s| s >= tol).count()
    }

    /// `κ(AᵀA) = (s_1 / s_k)²`, infinite when rank deficient.
    pub fn condition_number(&self) -> f64 {
        if self.is_rank_deficient() {
            return f64::INFINITY;
        }
        let ratio = self.largest() / self.smallest();
        ratio * ratio
    }

    /// `tr(AᵀA) = Σ s_j²`.
    pub fn trace_gram(&self) -> f64 {
        self.values.iter().map(|s| s * s).sum()
    }

    /// `tr[(AᵀA)⁻¹] = Σ 1/s_j²`, infinite when rank deficient.
    pub fn trace_inverse_gram(&self) -> f64 {
        if self.is_rank_deficient() {
            return f64::INFINITY;
        }
        self.values.iter().map(|s| 1.0 / (s * s)).sum()
    }

    fn check_full_rank(&self) -> Result<()> {
        if self.is_rank_deficient() {
            Err(Error::RankDeficient {
                rank: self.rank(),
                cols: self.values.len(),
            })
        } else {
            Ok(())
        }
    }
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `rows × k`
    pub u: Matrix,
    pub spectrum: SingularSpectrum,
    /// `cols × k`
    pub v: Matrix,
}

impl Svd {
    pub fn new(a: &Matrix) -> Svd {
        if a.rows >= a.cols {
            let (u, s, v) = jacobi_svd(a.rows, a.cols, a.to_col_major(), true);
            Svd {
                u: Matrix::from_col_major(a.rows, a.cols, &u),
                spectrum: SingularSpectrum {
                    values: s,
                    rows: a.rows,
                    cols: a.cols,
                },
                v: Matrix::from_col_major(a.cols, a.cols, &v),
            }
        } else {
            let t = Svd::new(&a.transpose());
            Svd {
                u: t.v,
                spectrum: SingularSpectrum {
                    values: t.spectrum.values,
                    rows: a.rows,
                    cols: a.cols,
                },
                v: t.u,
            }
        }
    }

    /// Left singular vector paired with the smallest singular value, with its
    /// first non-negligible entry made positive.
    pub fn smallest_left_vector(&self) -> Vec<f64> {
        let k = self.spectrum.values.len() - 1;
        let mut u = self.u.column_vec(k);
        let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(first) = u.iter().find(|x| x.abs() > 1e-12 * scale).copied() {
            if first < 0.0 {
                u.iter_mut().for_each(|x| *x = -*x);
            }
        }
        u
    }
}

/// One-sided Jacobi on an `m × n` column-major matrix with `m >= n`.
/// Returns `(U, s, V)` with singular values sorted in decreasing order; `U` and
/// `V` are empty when `want_vectors` is false.
fn jacobi_svd(m: usize, n: usize, mut a: Vec<f64>, want_vectors: bool) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    debug_assert!(m >= n);
    let mut v = if want_vectors {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        v
    } else {
        Vec::new()
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let cp = &a[p * m..(p + 1) * m];
                    let cq = &a[q * m..(q + 1) * m];
                    (dot(cp, cp), dot(cq, cq), dot(cp, cq))
                };
                if gamma == 0.0 || gamma.abs() <= JACOBI_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, m, p, q, c, s);
                if want_vectors {
                    rotate_columns(&mut v, n, p, q, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<(f64, usize)> = (0..n).map(|j| (norm(&a[j * m..(j + 1) * m]), j)).collect();
    sv.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let s: Vec<f64> = sv.iter().map(|x| x.0).collect();
    if !want_vectors {
        return (Vec::new(), s, Vec::new());
    }

    let mut u = vec![0.0; m * n];
    let mut vs = vec![0.0; n * n];
    for (dst, &(sigma, src)) in sv.iter().enumerate() {
        let col = &a[src * m..(src + 1) * m];
        let out = &mut u[dst * m..(dst + 1) * m];
        if sigma > 0.0 {
            for (o, x) in out.iter_mut().zip(col) {
                *o = x / sigma;
            }
        }
        vs[dst * n..(dst + 1) * n].copy_from_slice(&v[src * n..(src + 1) * n]);
    }
    (u, s, vs)
}

fn rotate_columns(a: &mut [f64], m: usize, p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = a.split_at_mut(q * m);
    let cp = &mut head[p * m..(p + 1) * m];
    let cq = &mut tail[..m];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Householder QR of an `m × n` matrix, `m >= n`.
#[derive(Debug, Clone)]
pub struct Qr {
    m: usize,
    n: usize,
    /// Column-major; R above the diagonal, Householder vectors below it.
    packed: Vec<f64>,
    diag: Vec<f64>,
    tau: Vec<f64>,
}

impl Qr {
    pub fn new(a: &Matrix) -> Result<Qr> {
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::Dimension("QR needs at least as many rows as columns"));
        }
        let mut packed = a.to_col_major();
        let mut diag = vec![0.0; n];
        let mut tau = vec![0.0; n];
        for k in 0..n {
            let col = &mut packed[k * m + k..(k + 1) * m];
            let nrm = norm(col);
            if nrm == 0.0 {
                continue;
            }
            let x0 = col[0];
            let beta = -x0.signum() * nrm;
            tau[k] = (beta - x0) / beta;
            let denom = x0 - beta;
            for x in col[1..].iter_mut() {
                *x /= denom;
            }
            col[0] = 1.0;
            diag[k] = beta;
            for j in k + 1..n {
                let (head, tail) = packed.split_at_mut(j * m);
                let v = &head[k * m + k..(k + 1) * m];
                let target = &mut tail[k..m];
                let s = dot(v, target) * tau[k];
                for (t, vi) in target.iter_mut().zip(v) {
                    *t -= s * vi;
                }
            }
        }
        Ok(Qr {
            m,
            n,
            packed,
            diag,
            tau,
        })
    }

    fn reflector(&self, k: usize) -> &[f64] {
        &self.packed[k * self.m + k..(k + 1) * self.m]
    }

    fn apply_reflector(&self, k: usize, x: &mut [f64]) {
        if self.tau[k] == 0.0 {
            return;
        }
        let v = self.reflector(k);
        // v[0] is implicitly 1; the packed slot holds it after factorization.
        let target = &mut x[k..];
        let s = dot(v, target) * self.tau[k];
        for (t, vi) in target.iter_mut().zip(v) {
            *t -= s * vi;
        }
    }

    /// Overwrites `b` with `Qᵀ b`.
    pub fn apply_qt(&self, b: &mut [f64]) {
        for k in 0..self.n {
            self.apply_reflector(k, b);
        }
    }

    /// Upper-triangular `n × n` factor.
    pub fn r(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| match i.cmp(&j) {
            core::cmp::Ordering::Equal => self.diag[i],
            core::cmp::Ordering::Less => self.packed[j * self.m + i],
            core::cmp::Ordering::Greater => 0.0,
        })
    }

    /// Thin orthonormal factor, `m × n`.
    pub fn thin_q(&self) -> Matrix {
        let mut cm = vec![0.0; self.m * self.n];
        for j in 0..self.n {
            let col = &mut cm[j * self.m..(j + 1) * self.m];
            col[j] = 1.0;
            for k in (0..self.n).rev() {
                self.apply_reflector(k, col);
            }
        }
        Matrix::from_col_major(self.m, self.n, &cm)
    }

    /// Singular values of the factored matrix (those of R).
    pub fn spectrum(&self) -> SingularSpectrum {
        let r = self.r();
        let (_, s, _) = jacobi_svd(self.n, self.n, r.to_col_major(), false);
        SingularSpectrum {
            values: s,
            rows: self.m,
            cols: self.n,
        }
    }

    /// Least-squares solution assuming R is nonsingular.
    fn solve_unchecked(&self, b: &[f64]) -> Vec<f64> {
        let mut c = b.to_vec();
        self.apply_qt(&mut c);
        let mut x = vec![0.0; self.n];
        for i in (0..self.n).rev() {
            let mut s = c[i];
            for (j, xj) in x.iter().enumerate().skip(i + 1) {
                s -= self.packed[j * self.m + i] * xj;
            }
            x[i] = s / self.diag[i];
        }
        x
    }
}

/// `arg min Σ wᵢ (yᵢ − xᵢᵀβ)²`; unit weights when `weights` is `None`.
pub fn least_squares(x: &Matrix, y: &[f64], weights: Option<&[f64]>) -> Result<Vec<f64>> {
    if y.len() != x.rows() {
        return Err(Error::Dimension("response length differs from row count"));
    }
    if x.rows() < x.cols() {
        return Err(Error::RankDeficient {
            rank: x.rows(),
            cols: x.cols(),
        });
    }
    match weights {
        None => {
            let qr = Qr::new(x)?;
            qr.spectrum().check_full_rank()?;
            Ok(qr.solve_unchecked(y))
        }
        Some(w) => {
            let root = sqrt_weights(w, x.rows())?;
            let xs = x.scale_rows(&root)?;
            let ys: Vec<f64> = y.iter().zip(&root).map(|(a, b)| a * b).collect();
            least_squares(&xs, &ys, None)
        }
    }
}

pub(crate) fn sqrt_weights(w: &[f64], rows: usize) -> Result<Vec<f64>> {
    if w.len() != rows {
        return Err(Error::Dimension("one weight per row required"));
    }
    if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("weights must be positive and finite"));
    }
    Ok(w.iter().map(|v| v.sqrt()).collect())
}

/// All singular values of `a`, largest first.
pub fn singular_values(a: &Matrix) -> SingularSpectrum {
    let (m, n) = a.shape();
    if m < n {
        let mut s = singular_values(&a.transpose());
        s.rows = m;
        s.cols = n;
        return s;
    }
    if m > 2 * n {
        // Tall: the R factor carries the same spectrum and is much smaller.
        if let Ok(qr) = Qr::new(a) {
            return qr.spectrum();
        }
    }
    let (_, s, _) = jacobi_svd(m, n, a.to_col_major(), false);
    SingularSpectrum {
        values: s,
        rows: m,
        cols: n,
    }
}

/// `κ(XᵀX) = (s_1 / s_p)²`, or `+∞` when `X` is numerically rank deficient.
pub fn condition_number_info(x: &Matrix) -> f64 {
    singular_values(x).condition_number()
}

/// Diagonal of the hat matrix `X(XᵀX)⁻¹Xᵀ`, from row norms of the thin Q.
pub fn leverage_scores(x: &Matrix) -> Result<Vec<f64>> {
    if x.rows() < x.cols() {
        return Err(Error::RankDeficient {
            rank: x.rows(),
            cols: x.cols(),
        });
    }
    let qr = Qr::new(x)?;
    qr.spectrum().check_full_rank()?;
    let q = qr.thin_q();
    Ok((0..q.rows()).map(|i| q.row(i).iter().map(|v| v * v).sum()).collect())
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::Dimension("Cholesky needs a square matrix"));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(Error::InvalidArgument("matrix is not positive definite"));
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    Ok(l)
}
