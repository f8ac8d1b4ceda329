//! Dense row-major matrices, norms, stable rank and column coherence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Relative tolerance used by [`spectral_norm_default`].
pub const DEFAULT_NORM_TOL: f64 = 1e-10;

/// A real matrix stored row-major. Every entry is finite and both
/// dimensions are positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be nonempty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Wraps a buffer produced by arithmetic on already-valid matrices.
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self::from_parts(self.cols, self.rows, data)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_parts(self.rows, self.cols, self.data.iter().map(|x| c * x).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "{:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_parts(self.rows, self.cols, data))
    }

    /// Largest entrywise absolute difference; `None` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        if self.shape() != other.shape() {
            return None;
        }
        Some(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    /// Squared Euclidean norm of every column.
    pub fn column_sqnorms(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols) {
            for (acc, x) in out.iter_mut().zip(row) {
                *acc += x * x;
            }
        }
        out
    }

    /// Plain product `self * other` (not transposed).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            let out = &mut data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_parts(self.rows, other.cols, data))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `A Bᵀ` for matrices sharing a column count.
pub fn matmul_exact(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.cols != b.cols {
        return Err(Error::Dimension(format!(
            "A has {} columns but B has {}",
            a.cols, b.cols
        )));
    }
    let mut data = Vec::with_capacity(a.rows * b.rows);
    for i in 0..a.rows {
        let ai = a.row(i);
        for j in 0..b.rows {
            data.push(dot(ai, b.row(j)));
        }
    }
    Ok(DenseMatrix::from_parts(a.rows, b.rows, data))
}

pub fn frobenius_norm(m: &DenseMatrix) -> f64 {
    m.data.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Iteration budget used when the caller does not choose one.
pub fn default_max_iter(rows: usize, cols: usize) -> usize {
    10 * rows.max(cols) + 100
}

/// Gram matrix of the smaller side: `M Mᵀ` when rows ≤ cols, else `Mᵀ M`.
fn small_gram(m: &DenseMatrix) -> DenseMatrix {
    if m.rows <= m.cols {
        // Only fails on a column mismatch, impossible here.
        matmul_exact(m, m).expect("same column count")
    } else {
        let t = m.transpose();
        matmul_exact(&t, &t).expect("same column count")
    }
}

/// Gram dimension up to which the operator is squared between iterates.
const SQUARING_MAX_DIM: usize = 256;

/// Largest singular value by power iteration on the smaller Gram matrix `G`.
///
/// For `G` of dimension up to 256 the operator is squared at every step, so
/// step `j` holds the iterate `G^(2^j) v` of plain power iteration started
/// from `v`. This brackets the top eigenvalue: the Rayleigh quotient of the
/// iterate is a lower bound, and `‖G^(2^j)‖_F^(1/2^j)` is an upper bound that
/// overshoots by at most a factor `d^(1/2^(j+1))`. Iteration stops once
/// the two square roots agree to a relative `tol`.
///
/// Larger Gram matrices use plain steps and stop once the relative residual
/// `‖Gv − λv‖ / λ` drops below `tol`.
///
/// The start vector is drawn from a fixed seed so results are reproducible.
pub fn spectral_norm(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::Domain("max_iter must be positive".into()));
    }
    if m.is_zero() {
        return Ok(0.0);
    }
    let g = small_gram(m);
    let d = g.rows;
    if d == 1 {
        return Ok(g.data[0].sqrt());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let start: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    if d <= SQUARING_MAX_DIM {
        bracketed_top_eigenvalue(&g, &start, tol, max_iter).map(f64::sqrt)
    } else {
        residual_top_eigenvalue(&g, start, tol, max_iter).map(f64::sqrt)
    }
}

fn rayleigh(g: &DenseMatrix, v: &[f64], w: &mut [f64]) -> f64 {
    for (i, wi) in w.iter_mut().enumerate() {
        *wi = dot(g.row(i), v);
    }
    dot(v, w)
}

fn bracketed_top_eigenvalue(g: &DenseMatrix, start: &[f64], tol: f64, max_iter: usize) -> Result<f64> {
    let d = g.rows;
    let target = (1.0 + tol) * (1.0 + tol);
    let g_norm = frobenius_norm(g);
    // p = g / exp(log_scale / 2^j), always of unit Frobenius norm
    let mut p = g.scale(1.0 / g_norm);
    let mut log_scale = g_norm.ln();
    let mut power = 1.0f64;
    let mut v = vec![0.0; d];
    let mut w = vec![0.0; d];
    let mut lower: f64 = 0.0;
    let mut gap = f64::INFINITY;

    for _ in 0..max_iter {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = dot(p.row(i), start);
        }
        if normalize(&mut v) == 0.0 {
            // start vector orthogonal to the dominant space; use p's largest column
            let best = (0..d)
                .max_by(|&a, &b| p.get(a, a).total_cmp(&p.get(b, b)))
                .unwrap_or(0);
            v = p.column(best);
            normalize(&mut v);
        }
        lower = lower.max(rayleigh(g, &v, &mut w));
        let upper = (log_scale / power).exp();
        if lower > 0.0 {
            gap = upper / lower - 1.0;
            if upper <= lower * target {
                return Ok(lower);
            }
        }
        let sq = matmul_exact(&p, &p).expect("square");
        let f = frobenius_norm(&sq);
        p = sq.scale(1.0 / f);
        log_scale = 2.0 * log_scale + f.ln();
        power *= 2.0;
    }
    Err(Error::Convergence {
        iterations: max_iter,
        gap,
    })
}

fn residual_top_eigenvalue(g: &DenseMatrix, mut v: Vec<f64>, tol: f64, max_iter: usize) -> Result<f64> {
    let d = g.rows;
    normalize(&mut v);
    let mut w = vec![0.0; d];
    let mut gap = f64::INFINITY;
    for _ in 0..max_iter {
        let lambda = rayleigh(g, &v, &mut w);
        let residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - lambda * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if lambda > 0.0 {
            gap = residual / lambda;
            if gap <= tol {
                return Ok(lambda);
            }
        }
        if normalize(&mut w) == 0.0 {
            w.iter_mut().enumerate().for_each(|(i, x)| *x = 1.0 / (i + 1) as f64);
            normalize(&mut w);
        }
        std::mem::swap(&mut v, &mut w);
    }
    Err(Error::Convergence {
        iterations: max_iter,
        gap,
    })
}

/// [`spectral_norm`] with [`DEFAULT_NORM_TOL`] and [`default_max_iter`].
pub fn spectral_norm_default(m: &DenseMatrix) -> Result<f64> {
    spectral_norm(m, DEFAULT_NORM_TOL, default_max_iter(m.rows, m.cols))
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// `k = max(‖A‖_F² / ‖A‖², ‖B‖_F² / ‖B‖²)`, a stable-rank proxy that lies
/// between 1 and `max(rank A, rank B)`.
///
/// `tr(AAᵀ)` and `tr(AᵀA)` coincide, both being `‖A‖_F²`.
pub fn stable_rank_k(a: &DenseMatrix, b: &DenseMatrix) -> Result<f64> {
    if a.cols != b.cols {
        return Err(Error::Dimension(format!(
            "A has {} columns but B has {}",
            a.cols, b.cols
        )));
    }
    let ratio = |m: &DenseMatrix, name: &str| -> Result<f64> {
        if m.is_zero() {
            return Err(Error::Domain(format!("stable rank undefined: {name} is zero")));
        }
        let s = spectral_norm_default(m)?;
        let f = frobenius_norm(m);
        Ok((f * f) / (s * s))
    };
    Ok(ratio(a, "A")?.max(ratio(b, "B")?))
}

/// Column mass profile of a pair of (normalized, rotated) matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceReport {
    /// `m` times the largest squared column norm over both matrices.
    pub mu: f64,
    pub k_a: f64,
    pub k_b: f64,
    pub q_col_sqnorms: Vec<f64>,
    pub r_col_sqnorms: Vec<f64>,
}

pub fn coherence(q: &DenseMatrix, r: &DenseMatrix) -> Result<CoherenceReport> {
    if q.cols != r.cols {
        return Err(Error::Dimension(format!(
            "Q has {} columns but R has {}",
            q.cols, r.cols
        )));
    }
    let q_col_sqnorms = q.column_sqnorms();
    let r_col_sqnorms = r.column_sqnorms();
    let max = q_col_sqnorms
        .iter()
        .chain(&r_col_sqnorms)
        .copied()
        .fold(0.0, f64::max);
    Ok(CoherenceReport {
        mu: q.cols as f64 * max,
        k_a: q_col_sqnorms.iter().sum(),
        k_b: r_col_sqnorms.iter().sum(),
        q_col_sqnorms,
        r_col_sqnorms,
    })
}
