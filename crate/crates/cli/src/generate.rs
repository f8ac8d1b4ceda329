//! Synthetic inputs covering the coherence extremes.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use srht_matmul::DenseMatrix;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// i.i.d. standard normal entries.
    Gaussian,
    /// Product of `rows×rank` and `rank×cols` Gaussian factors, scaled by `1/√rank`.
    LowRank,
    /// Gaussian entries on the first `rank` columns, zero elsewhere.
    Spiky,
    /// `[I | 0]`: row `i` is the `i`-th coordinate vector.
    Coordinate,
}

impl FromStr for GeneratorKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "low-rank" => Ok(Self::LowRank),
            "spiky" => Ok(Self::Spiky),
            "coordinate" => Ok(Self::Coordinate),
            other => Err(CliError::Usage(format!(
                "unknown generator `{other}` (expected gaussian, low-rank, spiky or coordinate)"
            ))),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gaussian => "gaussian",
            Self::LowRank => "low-rank",
            Self::Spiky => "spiky",
            Self::Coordinate => "coordinate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<DenseMatrix> {
        let (rows, cols) = (self.rows, self.cols);
        if rows == 0 || cols == 0 || self.rank == 0 {
            return Err(CliError::Usage(format!(
                "generator needs positive rows, cols and rank, got {rows}x{cols} rank {}",
                self.rank
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };
        let m = match self.kind {
            GeneratorKind::Gaussian => DenseMatrix::from_fn(rows, cols, |_, _| normal())?,
            GeneratorKind::LowRank => {
                let r = self.rank;
                let left = DenseMatrix::from_fn(rows, r, |_, _| normal())?;
                let right = DenseMatrix::from_fn(r, cols, |_, _| normal())?;
                left.matmul(&right)?.scale(1.0 / (r as f64).sqrt())
            }
            GeneratorKind::Spiky => {
                let r = self.rank.min(cols);
                DenseMatrix::from_fn(rows, cols, |_, j| if j < r { normal() } else { 0.0 })?
            }
            GeneratorKind::Coordinate => {
                DenseMatrix::from_fn(rows, cols, |i, j| if i == j { 1.0 } else { 0.0 })?
            }
        };
        Ok(m)
    }
}
