//! Brute-force distributional quantities of the sampling estimator on small
//! instances.
//!
//! The estimator error equals `‖(1/n) Σ Xⱼ − M‖` for i.i.d. copies of the
//! symmetric random matrix `X = m·[[0, qᵢrᵢᵀ], [rᵢqᵢᵀ, 0]]` (each `i` with
//! probability `1/m`) and `M = [[0, QRᵀ], [RQᵀ, 0]]`. Everything here is
//! computed by summing over the `m` outcomes directly, so the moment
//! inequalities feeding the Bernstein bound can be checked numerically.

use crate::error::{Error, Result};
use crate::matrix::{spectral_norm, DenseMatrix};

/// Largest column count [`exact_moments`] accepts.
pub const MAX_ORACLE_COLS: usize = 64;
/// Largest number of index tuples [`enumerate_estimator_mean`] visits.
pub const MAX_ENUMERATION: usize = 1_000_000;
/// Absolute slack when comparing the two sides of an inequality.
pub const INEQUALITY_SLACK: f64 = 1e-9;

const NORM_TOL: f64 = 1e-12;
const NORM_MAX_ITER: usize = 100_000;
const UNIT_NORM_SLACK: f64 = 1e-9;

fn norm(m: &DenseMatrix) -> Result<f64> {
    spectral_norm(m, NORM_TOL, NORM_MAX_ITER)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    /// `M`, of size `(d_A + d_B)²`.
    pub m_matrix: DenseMatrix,
    /// `E[X]`, summed over outcomes.
    pub mean_outcome: DenseMatrix,
    /// `E[X²]`, summed over outcomes.
    pub ex2: DenseMatrix,
    pub mu: f64,
    pub k_a: f64,
    pub k_b: f64,
    /// `max_i ‖Xᵢ − M‖`.
    pub max_outcome_dev: f64,
    pub ex2_norm: f64,
    pub ex2_trace: f64,
    /// `‖E[X²] − M²‖ = ‖E[(X − M)²]‖`.
    pub centered_ex2_norm: f64,
}

/// One checked inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Square block matrix `[[0, top_right], [top_rightᵀ, 0]]`.
fn block_antidiag(top_right: &DenseMatrix) -> DenseMatrix {
    let (da, db) = top_right.shape();
    let d = da + db;
    let mut data = vec![0.0; d * d];
    for i in 0..da {
        for j in 0..db {
            let v = top_right.get(i, j);
            data[i * d + da + j] = v;
            data[(da + j) * d + i] = v;
        }
    }
    DenseMatrix::from_parts(d, d, data)
}

/// Outcome `i`: `m·[[0, qᵢrᵢᵀ], [rᵢqᵢᵀ, 0]]`.
fn outcome(q: &DenseMatrix, r: &DenseMatrix, i: usize) -> DenseMatrix {
    let m = q.cols() as f64;
    let qi = q.column(i);
    let ri = r.column(i);
    let outer = DenseMatrix::from_parts(
        qi.len(),
        ri.len(),
        qi.iter().flat_map(|&a| ri.iter().map(move |&b| m * a * b)).collect(),
    );
    block_antidiag(&outer)
}

fn trace(m: &DenseMatrix) -> f64 {
    (0..m.rows()).map(|i| m.get(i, i)).sum()
}

/// Exact moments of `X` for spectrally normalized `Q`, `R`.
pub fn exact_moments(q: &DenseMatrix, r: &DenseMatrix) -> Result<MomentReport> {
    if q.cols() != r.cols() {
        return Err(Error::Dimension(format!(
            "Q has {} columns but R has {}",
            q.cols(),
            r.cols()
        )));
    }
    let m = q.cols();
    if m > MAX_ORACLE_COLS {
        return Err(Error::Domain(format!(
            "exact moments limited to m <= {MAX_ORACLE_COLS}, got {m}"
        )));
    }
    for (name, x) in [("Q", q), ("R", r)] {
        let s = norm(x)?;
        if s > 1.0 + UNIT_NORM_SLACK {
            return Err(Error::Domain(format!(
                "{name} must have spectral norm at most 1, got {s}"
            )));
        }
    }

    let qr = DenseMatrix::from_fn(q.rows(), r.rows(), |i, j| {
        (0..m).map(|c| q.get(i, c) * r.get(j, c)).sum()
    })?;
    let m_matrix = block_antidiag(&qr);
    let d = m_matrix.rows();

    let weight = 1.0 / m as f64;
    let mut mean_outcome = DenseMatrix::zeros(d, d)?;
    let mut ex2 = DenseMatrix::zeros(d, d)?;
    let mut max_outcome_dev: f64 = 0.0;
    for i in 0..m {
        let x = outcome(q, r, i);
        mean_outcome = mean_outcome.add(&x.scale(weight))?;
        ex2 = ex2.add(&x.matmul(&x)?.scale(weight))?;
        max_outcome_dev = max_outcome_dev.max(norm(&x.sub(&m_matrix)?)?);
    }

    let q_sq = q.column_sqnorms();
    let r_sq = r.column_sqnorms();
    let max_sq = q_sq.iter().chain(&r_sq).copied().fold(0.0, f64::max);
    let m2 = m_matrix.matmul(&m_matrix)?;

    Ok(MomentReport {
        mu: m as f64 * max_sq,
        k_a: q_sq.iter().sum(),
        k_b: r_sq.iter().sum(),
        max_outcome_dev,
        ex2_norm: norm(&ex2)?,
        ex2_trace: trace(&ex2),
        centered_ex2_norm: norm(&ex2.sub(&m2)?)?,
        m_matrix,
        mean_outcome,
        ex2,
    })
}

/// The four moment inequalities behind the coherence-conditional bound.
pub fn verify_lemma1_inequalities(report: &MomentReport) -> Vec<InequalityCheck> {
    let mu = report.mu;
    let check = |name, lhs: f64, rhs: f64| InequalityCheck {
        name,
        lhs,
        rhs,
        holds: lhs <= rhs + INEQUALITY_SLACK,
    };
    vec![
        check(
            "tr(E[X^2]) <= 2 mu sqrt(k_A k_B)",
            report.ex2_trace,
            2.0 * mu * (report.k_a * report.k_b).sqrt(),
        ),
        check("||E[X^2]|| <= mu", report.ex2_norm, mu),
        check("||E[(X-M)^2]|| <= mu + 1", report.centered_ex2_norm, mu + 1.0),
        check("max_i ||X_i - M|| <= mu + 1", report.max_outcome_dev, mu + 1.0),
    ]
}

/// Exact mean of `(m/n) Σⱼ q_{iⱼ} r_{iⱼ}ᵀ` over all `mⁿ` index tuples.
pub fn enumerate_estimator_mean(q: &DenseMatrix, r: &DenseMatrix, n: usize) -> Result<DenseMatrix> {
    if q.cols() != r.cols() {
        return Err(Error::Dimension(format!(
            "Q has {} columns but R has {}",
            q.cols(),
            r.cols()
        )));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let m = q.cols();
    let tuples = u32::try_from(n)
        .ok()
        .and_then(|e| m.checked_pow(e))
        .filter(|&t| t <= MAX_ENUMERATION)
        .ok_or_else(|| {
            Error::Domain(format!("enumeration of {m}^{n} tuples exceeds {MAX_ENUMERATION}"))
        })?;

    let (da, db) = (q.rows(), r.rows());
    let scale = m as f64 / n as f64;
    let mut total = vec![0.0; da * db];
    let mut tuple = vec![0usize; n];
    for _ in 0..tuples {
        for &c in &tuple {
            for a in 0..da {
                let qa = scale * q.get(a, c);
                for b in 0..db {
                    total[a * db + b] += qa * r.get(b, c);
                }
            }
        }
        // odometer increment
        for slot in tuple.iter_mut() {
            *slot += 1;
            if *slot < m {
                break;
            }
            *slot = 0;
        }
    }
    let inv = 1.0 / tuples as f64;
    total.iter_mut().for_each(|x| *x *= inv);
    Ok(DenseMatrix::from_parts(da, db, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn single_column_instance() {
        let one = m(&[&[1.0]]);
        let rep = exact_moments(&one, &one).unwrap();
        assert_eq!(rep.m_matrix.data(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(rep.ex2.data(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(rep.max_outcome_dev, 0.0);
        assert_eq!(rep.mu, 1.0);
        assert!(verify_lemma1_inequalities(&rep).iter().all(|c| c.holds));
    }

    #[test]
    fn flat_row_has_unit_coherence() {
        let h = 0.5f64.sqrt();
        let q = m(&[&[h, h]]);
        let rep = exact_moments(&q, &q).unwrap();
        assert!((rep.mu - 1.0).abs() < 1e-15);
        assert!(rep.ex2_norm <= 1.0 + 1e-12);
    }

    #[test]
    fn guards() {
        let wide = DenseMatrix::from_fn(1, 65, |_, j| if j == 0 { 1.0 } else { 0.0 }).unwrap();
        assert!(matches!(exact_moments(&wide, &wide), Err(Error::Domain(_))));
        let big = m(&[&[2.0, 0.0]]);
        let ok = m(&[&[1.0, 0.0]]);
        assert!(matches!(exact_moments(&big, &ok), Err(Error::Domain(_))));
        assert!(exact_moments(&ok, &m(&[&[1.0]])).is_err());
        let four = DenseMatrix::identity(4).unwrap();
        assert!(enumerate_estimator_mean(&four, &four, 10).is_err());
        assert!(enumerate_estimator_mean(&four, &four, 0).is_err());
    }

    #[test]
    fn enumeration_small_cases() {
        let q = m(&[&[0.3], &[-0.7]]);
        let r = m(&[&[0.9]]);
        let mean = enumerate_estimator_mean(&q, &r, 5).unwrap();
        assert!(mean.max_abs_diff(&m(&[&[0.27], &[-0.63]])).unwrap() < 1e-15);

        let q = m(&[&[0.5, -0.25]]);
        let r = m(&[&[0.1, 0.8], &[0.4, 0.2]]);
        let mean = enumerate_estimator_mean(&q, &r, 1).unwrap();
        let expect = m(&[&[0.5 * 0.1 - 0.25 * 0.8, 0.5 * 0.4 - 0.25 * 0.2]]);
        assert!(mean.max_abs_diff(&expect).unwrap() < 1e-15);
    }
}
