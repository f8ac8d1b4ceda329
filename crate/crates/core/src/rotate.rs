//! The random rotation `Θ = (1/√m)·D·H` with `D` a Rademacher sign
//! diagonal and `H` the Sylvester Hadamard matrix.
//!
//! Inputs whose column count is not a power of two are zero-padded on the
//! right up to the next power of two. Padding leaves `A Bᵀ`, the spectral
//! and Frobenius norms, and hence the stable rank unchanged, so everything
//! downstream runs at the padded width.

use std::ops::{Add, Sub};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Largest padded width [`materialize_theta`] will build.
pub const MAX_MATERIALIZED: usize = 4096;

/// One realized rotation: the sign vector and the padded width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationSpec {
    pub m_original: usize,
    pub m_padded: usize,
    pub signs: Vec<i8>,
    pub seed: u64,
}

impl RotationSpec {
    /// `1/√m_padded`.
    pub fn scale(&self) -> f64 {
        1.0 / (self.m_padded as f64).sqrt()
    }
}

/// In-place unnormalized Sylvester-Hadamard transform, `v ← H v`.
///
/// `H₁ = [1]`, `H₂ₜ = [[Hₜ, Hₜ], [Hₜ, −Hₜ]]`. Works on any ring-like
/// element type so integer inputs are transformed exactly.
pub fn fwht_in_place<T>(v: &mut [T]) -> Result<()>
where
    T: Copy + Add<Output = T> + Sub<Output = T>,
{
    let n = v.len();
    if !n.is_power_of_two() {
        return Err(Error::Domain(format!(
            "Hadamard transform length must be a power of two, got {n}"
        )));
    }
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    Ok(())
}

/// Signs come from a ChaCha8 stream seeded with `seed_from_u64(seed)`:
/// sign `i` is `+1` when bit 31 of the `i`-th `u32` output is clear and
/// `−1` otherwise.
pub fn make_rotation(m: usize, seed: u64) -> Result<RotationSpec> {
    if m == 0 {
        return Err(Error::Domain("rotation width must be at least 1".into()));
    }
    let m_padded = m
        .checked_next_power_of_two()
        .ok_or_else(|| Error::Overflow(format!("no power of two ≥ {m}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signs = (0..m_padded)
        .map(|_| if rng.next_u32() >> 31 == 0 { 1 } else { -1 })
        .collect();
    Ok(RotationSpec {
        m_original: m,
        m_padded,
        signs,
        seed,
    })
}

/// `A_pad · Θ`, computed row by row as sign flip, FWHT, then one scaling.
pub fn apply_rotation(a: &DenseMatrix, spec: &RotationSpec) -> Result<DenseMatrix> {
    if a.cols() != spec.m_original {
        return Err(Error::Dimension(format!(
            "matrix has {} columns but rotation expects {}",
            a.cols(),
            spec.m_original
        )));
    }
    let m = spec.m_padded;
    let scale = spec.scale();
    let mut out = vec![0.0; a.rows() * m];
    for (i, dst) in out.chunks_exact_mut(m).enumerate() {
        for ((d, &x), &s) in dst.iter_mut().zip(a.row(i)).zip(&spec.signs) {
            *d = if s > 0 { x } else { -x };
        }
        fwht_in_place(dst)?;
        dst.iter_mut().for_each(|x| *x *= scale);
    }
    Ok(DenseMatrix::from_parts(a.rows(), m, out))
}

/// Explicit `Θ`, with `H[i][j] = (−1)^popcount(i & j)`.
pub fn materialize_theta(spec: &RotationSpec) -> Result<DenseMatrix> {
    let m = spec.m_padded;
    if m > MAX_MATERIALIZED {
        return Err(Error::Domain(format!(
            "refusing to materialize a {m}x{m} rotation (limit {MAX_MATERIALIZED})"
        )));
    }
    let scale = spec.scale();
    DenseMatrix::from_fn(m, m, |i, j| {
        let h = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        f64::from(spec.signs[i]) * h * scale
    })
}
