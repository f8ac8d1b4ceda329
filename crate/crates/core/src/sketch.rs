//! Uniform with-replacement column sampling and the scaled outer-product
//! estimator `(m/n) Σⱼ ã_{iⱼ} b̃_{iⱼ}ᵀ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rotate::{apply_rotation, make_rotation, RotationSpec};

/// XORed into the user seed to get the sampling stream's seed.
pub const SAMPLE_SEED_MASK: u64 = 0x9E37_79B9_7F4A_7C15;

/// Splits one user-facing seed into `(rotation_seed, sample_seed)`.
pub fn split_seed(seed: u64) -> (u64, u64) {
    (seed, seed ^ SAMPLE_SEED_MASK)
}

/// A realized randomization: the rotation plus `n` sampled column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchPlan {
    pub rotation: RotationSpec,
    pub n: usize,
    pub indices: Vec<usize>,
    pub sample_seed: u64,
}

/// Draws `n` indices i.i.d. uniform on `0..m_padded` from a ChaCha8 stream.
pub fn draw_plan(rotation: RotationSpec, n: usize, sample_seed: u64) -> Result<SketchPlan> {
    if n == 0 {
        return Err(Error::Domain("sample count n must be at least 1".into()));
    }
    let m = rotation.m_padded as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let indices = (0..n).map(|_| rng.random_range(0..m) as usize).collect();
    Ok(SketchPlan {
        rotation,
        n,
        indices,
        sample_seed,
    })
}

/// Estimator from already-rotated inputs and a plan.
pub fn sample_product(
    a_rot: &DenseMatrix,
    b_rot: &DenseMatrix,
    plan: &SketchPlan,
) -> Result<DenseMatrix> {
    let m = plan.rotation.m_padded;
    if a_rot.cols() != m || b_rot.cols() != m {
        return Err(Error::Dimension(format!(
            "rotated inputs have {} and {} columns, plan expects {m}",
            a_rot.cols(),
            b_rot.cols()
        )));
    }
    if plan.indices.len() != plan.n || plan.n == 0 {
        return Err(Error::Domain(format!(
            "plan has {} indices for n = {}",
            plan.indices.len(),
            plan.n
        )));
    }
    if let Some(&bad) = plan.indices.iter().find(|&&i| i >= m) {
        return Err(Error::Domain(format!("sample index {bad} out of range 0..{m}")));
    }

    // Repeated draws of a column are merged into one rank-1 update of
    // weight count·m/n, applied in ascending column order.
    let mut counts = vec![0usize; m];
    plan.indices.iter().for_each(|&i| counts[i] += 1);
    let (da, db) = (a_rot.rows(), b_rot.rows());
    let (m_f, n_f) = (m as f64, plan.n as f64);
    let mut acc = vec![0.0; da * db];
    let mut a_col = vec![0.0; da];
    let mut b_col = vec![0.0; db];
    for (i, &c) in counts.iter().enumerate().filter(|(_, &c)| c > 0) {
        let weight = c as f64 * m_f / n_f;
        for (r, x) in a_col.iter_mut().enumerate() {
            *x = weight * a_rot.get(r, i);
        }
        for (r, x) in b_col.iter_mut().enumerate() {
            *x = b_rot.get(r, i);
        }
        for (row, &a) in acc.chunks_exact_mut(db).zip(&a_col) {
            for (o, &b) in row.iter_mut().zip(&b_col) {
                *o += a * b;
            }
        }
    }
    Ok(DenseMatrix::from_parts(da, db, acc))
}

/// Full pipeline: rotate both inputs with one shared rotation, sample `n`
/// column pairs, return the estimate of `A Bᵀ` and the plan that produced it.
///
/// Seeds are derived with [`split_seed`].
pub fn approx_matmul(
    a: &DenseMatrix,
    b: &DenseMatrix,
    n: usize,
    seed: u64,
) -> Result<(DenseMatrix, SketchPlan)> {
    if a.cols() != b.cols() {
        return Err(Error::Dimension(format!(
            "A has {} columns but B has {}",
            a.cols(),
            b.cols()
        )));
    }
    if n == 0 {
        return Err(Error::Domain("sample count n must be at least 1".into()));
    }
    let (rotation_seed, sample_seed) = split_seed(seed);
    let rotation = make_rotation(a.cols(), rotation_seed)?;
    let a_rot = apply_rotation(a, &rotation)?;
    let b_rot = apply_rotation(b, &rotation)?;
    let plan = draw_plan(rotation, n, sample_seed)?;
    let est = sample_product(&a_rot, &b_rot, &plan)?;
    Ok((est, plan))
}
