use std::fmt;
use std::io::Write;

use srht_matmul::{apply_rotation, frobenius_norm, lemma2_bound, make_rotation};

use super::{binomial_upper_99, nonzero_norm, run_indexed};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::io::fmt_f64;

/// One (sign draw, t) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Row {
    pub trial_index: usize,
    pub seed: u64,
    pub t: f64,
    /// `max_i ‖(ZΘ) e_i‖²` for the normalized `Z`.
    pub max_col_sqnorm: f64,
    pub threshold: f64,
    pub exceeded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2TailSummary {
    pub t: f64,
    pub threshold: f64,
    pub exceeded: usize,
    pub exceed_fraction: f64,
    /// `e^{-t}`
    pub tail: f64,
    /// `e^{-t}` plus the 99% binomial allowance for the trial count.
    pub allowance: f64,
}

impl Lemma2TailSummary {
    pub fn passed(&self) -> bool {
        self.exceed_fraction <= self.allowance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Run {
    pub rows: usize,
    pub m: usize,
    pub m_padded: usize,
    pub k_z: f64,
    pub trials: usize,
    /// `max_i ‖Z e_i‖²` before rotation.
    pub baseline_max_col_sqnorm: f64,
    pub mean_max_col_sqnorm: f64,
    pub per_t: Vec<Lemma2TailSummary>,
    pub records: Vec<Lemma2Row>,
}

impl Lemma2Run {
    pub fn passed(&self) -> bool {
        self.per_t.iter().all(Lemma2TailSummary::passed)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trial_index", "seed", "t", "max_col_sqnorm", "threshold", "exceeded"])?;
        for r in &self.records {
            w.write_record([
                r.trial_index.to_string(),
                r.seed.to_string(),
                fmt_f64(r.t),
                fmt_f64(r.max_col_sqnorm),
                fmt_f64(r.threshold),
                r.exceeded.to_string(),
            ])?;
        }
        w.flush().map_err(|e| CliError::io("<csv>", e))?;
        Ok(())
    }
}

impl fmt::Display for Lemma2Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify-lemma2")?;
        writeln!(f, "  shape              Z {}x{} (m padded to {})", self.rows, self.m, self.m_padded)?;
        writeln!(f, "  k_z                {:.6}", self.k_z)?;
        writeln!(f, "  trials             {}", self.trials)?;
        writeln!(f, "  max col sqnorm     {:.6} unrotated, {:.6} mean rotated", self.baseline_max_col_sqnorm, self.mean_max_col_sqnorm)?;
        writeln!(f, "  {:>10}  {:>12}  {:>10}  {:>10}  {:>10}  result", "t", "threshold", "exceeded", "e^-t", "allowed")?;
        for s in &self.per_t {
            writeln!(
                f,
                "  {:>10.6}  {:>12.6}  {:>10.4}  {:>10.6}  {:>10.6}  {}",
                s.t,
                s.threshold,
                s.exceed_fraction,
                s.tail,
                s.allowance,
                if s.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        write!(f, "  result             {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Draws `trials` sign vectors and checks the largest rotated column norm
/// of `Z / ‖Z‖` against the quadratic-form threshold for each `t`.
pub fn run_verify_lemma2(cfg: &ExperimentConfig) -> Result<Lemma2Run> {
    let z = cfg.load_a()?;
    let z = z.scale(1.0 / nonzero_norm(&z, "Z")?);
    let m = z.cols();
    let m_padded = m.next_power_of_two();
    let k_z = frobenius_norm(&z).powi(2);
    let thresholds = cfg
        .t_grid
        .iter()
        .map(|&t| lemma2_bound(k_z, m_padded, t))
        .collect::<srht_matmul::Result<Vec<_>>>()?;

    let max_sq = |trial: usize| -> Result<f64> {
        let rotation = make_rotation(m, cfg.trial_seed(trial))?;
        let rotated = apply_rotation(&z, &rotation)?;
        Ok(rotated.column_sqnorms().into_iter().fold(0.0, f64::max))
    };
    let maxima = run_indexed(cfg.threads, cfg.trials, max_sq)?;

    let mut records = Vec::with_capacity(maxima.len() * thresholds.len());
    for (i, &x) in maxima.iter().enumerate() {
        for (&t, &threshold) in cfg.t_grid.iter().zip(&thresholds) {
            records.push(Lemma2Row {
                trial_index: i,
                seed: cfg.trial_seed(i),
                t,
                max_col_sqnorm: x,
                threshold,
                exceeded: x > threshold,
            });
        }
    }
    let per_t = cfg
        .t_grid
        .iter()
        .zip(&thresholds)
        .map(|(&t, &threshold)| {
            let exceeded = maxima.iter().filter(|&&x| x > threshold).count();
            let tail = (-t).exp();
            Lemma2TailSummary {
                t,
                threshold,
                exceeded,
                exceed_fraction: exceeded as f64 / cfg.trials as f64,
                tail,
                allowance: binomial_upper_99(tail.min(1.0), cfg.trials),
            }
        })
        .collect();

    Ok(Lemma2Run {
        rows: z.rows(),
        m,
        m_padded,
        k_z,
        trials: cfg.trials,
        baseline_max_col_sqnorm: z.column_sqnorms().into_iter().fold(0.0, f64::max),
        mean_max_col_sqnorm: maxima.iter().sum::<f64>() / maxima.len() as f64,
        per_t,
        records,
    })
}
