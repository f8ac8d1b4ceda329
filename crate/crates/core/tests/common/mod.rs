//! Reference implementations used only by tests. None of these call into the
//! code paths they check.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srht_matmul::DenseMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0)).unwrap()
}

pub fn to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Singular values (descending) by one-sided Jacobi rotations on columns.
pub fn jacobi_singular_values(m: &DenseMatrix) -> Vec<f64> {
    let rows = to_rows(m);
    let (r, c) = (rows.len(), rows[0].len());
    // work on columns of the taller orientation
    let mut cols: Vec<Vec<f64>> = if r >= c {
        (0..c).map(|j| (0..r).map(|i| rows[i][j]).collect()).collect()
    } else {
        rows.clone()
    };
    let n = cols.len();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for k in 0..cols[p].len() {
                    let (x, y) = (cols[p][k], cols[q][k]);
                    cols[p][k] = cs * x - sn * y;
                    cols[q][k] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Sylvester Hadamard matrix built from the block recursion.
pub fn sylvester(m: usize) -> Vec<Vec<i64>> {
    let mut h = vec![vec![1i64]];
    while h.len() < m {
        let t = h.len();
        let mut next = vec![vec![0i64; 2 * t]; 2 * t];
        for i in 0..t {
            for j in 0..t {
                next[i][j] = h[i][j];
                next[i][j + t] = h[i][j];
                next[i + t][j] = h[i][j];
                next[i + t][j + t] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

pub fn naive_hadamard_apply(v: &[i64]) -> Vec<i64> {
    let h = sylvester(v.len());
    h.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// `A Bᵀ` by the textbook triple loop.
pub fn triple_loop_abt(a: &DenseMatrix, b: &DenseMatrix) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; b.rows()]; a.rows()];
    for i in 0..a.rows() {
        for j in 0..b.rows() {
            for k in 0..a.cols() {
                out[i][j] += a.get(i, k) * b.get(j, k);
            }
        }
    }
    out
}

/// Scales so the largest singular value is exactly one (per the SVD oracle).
pub fn normalize_by_svd(m: &DenseMatrix) -> DenseMatrix {
    m.scale(1.0 / jacobi_singular_values(m)[0])
}
