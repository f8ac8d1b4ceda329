use std::fmt;

use srht_matmul::{apply_rotation, coherence, make_rotation, mu_threshold, stable_rank_k, CoherenceReport, DenseMatrix};

use super::{nonzero_norm, quantile, run_indexed, sorted};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceDraw {
    pub seed: u64,
    pub mu: f64,
    pub k_a: f64,
    pub k_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceRun {
    pub m: usize,
    pub m_padded: usize,
    pub k: f64,
    pub delta: f64,
    /// Coherence of `A/‖A‖`, `B/‖B‖` with no rotation.
    pub baseline: CoherenceReport,
    pub threshold: f64,
    pub identity_rotation: bool,
    pub draws: Vec<CoherenceDraw>,
    pub mu_min: f64,
    pub mu_median: f64,
    pub mu_max: f64,
    pub below_threshold: usize,
}

impl CoherenceRun {
    /// Fraction of draws at or above the threshold stays within `2δ/3`.
    pub fn passed(&self) -> bool {
        let above = self.draws.len() - self.below_threshold;
        above as f64 / self.draws.len() as f64 <= 2.0 * self.delta / 3.0
    }
}

impl fmt::Display for CoherenceRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "coherence")?;
        writeln!(f, "  columns            {} (padded to {})", self.m, self.m_padded)?;
        writeln!(f, "  stable rank k      {:.6}", self.k)?;
        writeln!(
            f,
            "  baseline           mu {:.6}  k_a {:.6}  k_b {:.6}",
            self.baseline.mu, self.baseline.k_a, self.baseline.k_b
        )?;
        let label = if self.identity_rotation { "identity draws" } else { "rotated draws" };
        writeln!(f, "  {label:<18} {}", self.draws.len())?;
        writeln!(f, "  mu min/med/max     {:.6} / {:.6} / {:.6}", self.mu_min, self.mu_median, self.mu_max)?;
        writeln!(f, "  delta              {}", self.delta)?;
        writeln!(f, "  mu threshold       {:.6}", self.threshold)?;
        writeln!(f, "  below threshold    {} of {}", self.below_threshold, self.draws.len())?;
        write!(f, "  result             {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

fn normalized(a: &DenseMatrix, name: &str) -> Result<DenseMatrix> {
    Ok(a.scale(1.0 / nonzero_norm(a, name)?))
}

pub fn run_coherence(cfg: &ExperimentConfig) -> Result<CoherenceRun> {
    let a = cfg.load_a()?;
    let b = cfg.load_b()?;
    if a.cols() != b.cols() {
        return Err(CliError::Usage(format!("A has {} columns but B has {}", a.cols(), b.cols())));
    }
    let (q, r) = (normalized(&a, "A")?, normalized(&b, "B")?);
    let m = a.cols();
    let m_padded = m.next_power_of_two();
    let k = stable_rank_k(&a, &b)?;
    let baseline = coherence(&q, &r)?;
    let threshold = mu_threshold(k, m_padded, cfg.delta)?;

    let draw = |i: usize| -> Result<CoherenceDraw> {
        let seed = cfg.trial_seed(i);
        let rep = if cfg.identity_rotation {
            baseline.clone()
        } else {
            let rotation = make_rotation(m, seed)?;
            coherence(&apply_rotation(&q, &rotation)?, &apply_rotation(&r, &rotation)?)?
        };
        Ok(CoherenceDraw {
            seed,
            mu: rep.mu,
            k_a: rep.k_a,
            k_b: rep.k_b,
        })
    };
    let draws = run_indexed(cfg.threads, cfg.trials, draw)?;
    let mus = sorted(draws.iter().map(|d| d.mu).collect());

    Ok(CoherenceRun {
        m,
        m_padded,
        k,
        delta: cfg.delta,
        threshold,
        identity_rotation: cfg.identity_rotation,
        below_threshold: mus.iter().filter(|&&mu| mu < threshold).count(),
        mu_min: mus[0],
        mu_median: quantile(&mus, 0.5),
        mu_max: mus[mus.len() - 1],
        draws,
        baseline,
    })
}
