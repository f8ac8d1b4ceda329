//! The experiment behind each subcommand. Every runner returns a structured
//! result whose `Display` is the text summary; CSV and matrix outputs are
//! written by the caller.

mod coherence;
mod lemma2;
mod moments;
mod theorem1;
mod tools;

pub use coherence::{run_coherence, CoherenceDraw, CoherenceRun};
pub use lemma2::{run_verify_lemma2, Lemma2Row, Lemma2Run, Lemma2TailSummary};
pub use moments::{run_moments, MomentsRun};
pub use theorem1::{run_verify_theorem1, Theorem1Run, Theorem1Summary, TrialRecord};
pub use tools::{run_bound, run_sketch, BoundRun, SketchRun};

use rayon::prelude::*;
use srht_matmul::matrix::DEFAULT_NORM_TOL;
use srht_matmul::{spectral_norm, DenseMatrix};

use crate::error::{CliError, Result};

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;

const NORM_MAX_ITER: usize = 10_000;

pub(crate) fn norm(m: &DenseMatrix) -> Result<f64> {
    Ok(spectral_norm(m, DEFAULT_NORM_TOL, NORM_MAX_ITER)?)
}

pub(crate) fn nonzero_norm(m: &DenseMatrix, name: &str) -> Result<f64> {
    let s = norm(m)?;
    if s == 0.0 {
        return Err(srht_matmul::Error::Domain(format!("{name} is the zero matrix")).into());
    }
    Ok(s)
}

/// Runs `count` independent jobs on a pool of `threads` workers. Results
/// come back in index order whatever the scheduling.
pub(crate) fn run_indexed<T, F>(threads: usize, count: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if threads <= 1 {
        return (0..count).map(job).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    pool.install(|| (0..count).into_par_iter().map(job).collect())
}

/// Nearest-rank quantile of an ascending slice.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub(crate) fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Upper edge of a 99% normal-approximation binomial interval around `p`
/// for `trials` draws.
pub fn binomial_upper_99(p: f64, trials: usize) -> f64 {
    p + Z_99 * (p * (1.0 - p) / trials as f64).sqrt()
}
