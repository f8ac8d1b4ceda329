use std::fmt;
use std::io::Write;

use srht_matmul::{
    apply_rotation, coherence, draw_plan, frobenius_norm, make_rotation, matmul_exact, required_n,
    sample_product, split_seed, stable_rank_k, theorem1_bound,
};

use super::{nonzero_norm, norm, quantile, run_indexed, sorted};
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::io::fmt_f64;

/// One Monte Carlo trial of the estimator against the unconditional bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub seed: u64,
    /// `‖ÂBᵀ − ABᵀ‖ / (‖A‖‖B‖)`
    pub rel_spectral_error: f64,
    /// `‖ÂBᵀ − ABᵀ‖_F / (‖A‖_F‖B‖_F)`
    pub rel_frobenius_error: f64,
    pub bound_value: f64,
    pub exceeded: bool,
    /// Coherence of the rotated, normalized inputs in this trial.
    pub mu_observed: f64,
}

impl TrialRecord {
    pub const HEADER: [&'static str; 7] = [
        "trial_index",
        "seed",
        "rel_spectral_error",
        "rel_frobenius_error",
        "bound_value",
        "exceeded",
        "mu_observed",
    ];

    fn fields(&self) -> [String; 7] {
        [
            self.trial_index.to_string(),
            self.seed.to_string(),
            fmt_f64(self.rel_spectral_error),
            fmt_f64(self.rel_frobenius_error),
            fmt_f64(self.bound_value),
            self.exceeded.to_string(),
            fmt_f64(self.mu_observed),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Summary {
    pub trials: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub m: usize,
    pub m_padded: usize,
    pub n: usize,
    pub k: f64,
    pub delta: f64,
    pub bound: f64,
    pub exceeded: usize,
    pub exceed_fraction: f64,
    pub mean_error: f64,
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
    pub max_error: f64,
    pub mean_frobenius_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Run {
    pub summary: Theorem1Summary,
    pub records: Vec<TrialRecord>,
}

impl Theorem1Run {
    /// The empirical failure rate stays within `delta`.
    pub fn passed(&self) -> bool {
        self.summary.exceed_fraction <= self.summary.delta
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(TrialRecord::HEADER)?;
        for r in &self.records {
            w.write_record(r.fields())?;
        }
        w.flush().map_err(|e| CliError::io("<csv>", e))?;
        Ok(())
    }
}

impl fmt::Display for Theorem1Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify-theorem1")?;
        writeln!(f, "  shape              A {}x{}, B {}x{} (m padded to {})", self.d_a, self.m, self.d_b, self.m, self.m_padded)?;
        writeln!(f, "  stable rank k      {:.6}", self.k)?;
        writeln!(f, "  samples n          {}", self.n)?;
        writeln!(f, "  delta              {}", self.delta)?;
        writeln!(f, "  bound              {:.6}", self.bound)?;
        writeln!(f, "  trials             {}", self.trials)?;
        writeln!(f, "  exceeded           {} ({:.4})", self.exceeded, self.exceed_fraction)?;
        writeln!(f, "  error mean         {:.6}", self.mean_error)?;
        writeln!(f, "  error q50/q90/q99  {:.6} / {:.6} / {:.6}", self.q50, self.q90, self.q99)?;
        writeln!(f, "  error max          {:.6}", self.max_error)?;
        writeln!(f, "  frobenius mean     {:.6}", self.mean_frobenius_error)?;
        write!(
            f,
            "  result             {}",
            if self.exceed_fraction <= self.delta { "PASS" } else { "FAIL" }
        )
    }
}

/// Sample count from `--n`, or the smallest `n` meeting `--eps`.
pub(crate) fn resolve_n(cfg: &ExperimentConfig, k: f64, m_padded: usize) -> Result<usize> {
    match (cfg.n, cfg.eps) {
        (Some(n), _) => Ok(n),
        (None, Some(eps)) => Ok(required_n(k, m_padded, cfg.delta, eps)?),
        (None, None) => Err(CliError::Usage("pass --n or --eps".into())),
    }
}

pub fn run_verify_theorem1(cfg: &ExperimentConfig) -> Result<Theorem1Run> {
    let a = cfg.load_a()?;
    let b = cfg.load_b()?;
    if a.cols() != b.cols() {
        return Err(CliError::Usage(format!(
            "A has {} columns but B has {}",
            a.cols(),
            b.cols()
        )));
    }
    let m = a.cols();
    let m_padded = m.next_power_of_two();
    let k = stable_rank_k(&a, &b)?;
    let n = resolve_n(cfg, k, m_padded)?;
    let bound = theorem1_bound(k, m_padded, n, cfg.delta)?.relative_error_bound;

    let exact = matmul_exact(&a, &b)?;
    let (norm_a, norm_b) = (nonzero_norm(&a, "A")?, nonzero_norm(&b, "B")?);
    let fro = frobenius_norm(&a) * frobenius_norm(&b);

    let trial = |i: usize| -> Result<TrialRecord> {
        let seed = cfg.trial_seed(i);
        // same seed split and steps as srht_matmul::approx_matmul
        let (rotation_seed, sample_seed) = split_seed(seed);
        let rotation = make_rotation(m, rotation_seed)?;
        let a_rot = apply_rotation(&a, &rotation)?;
        let b_rot = apply_rotation(&b, &rotation)?;
        let mu_observed = coherence(&a_rot.scale(1.0 / norm_a), &b_rot.scale(1.0 / norm_b))?.mu;
        let plan = draw_plan(rotation, n, sample_seed)?;
        let diff = sample_product(&a_rot, &b_rot, &plan)?.sub(&exact)?;
        let rel_spectral_error = norm(&diff)? / (norm_a * norm_b);
        Ok(TrialRecord {
            trial_index: i,
            seed,
            rel_spectral_error,
            rel_frobenius_error: frobenius_norm(&diff) / fro,
            bound_value: bound,
            exceeded: rel_spectral_error > bound,
            mu_observed,
        })
    };
    let records = run_indexed(cfg.threads, cfg.trials, trial)?;

    let errors = sorted(records.iter().map(|r| r.rel_spectral_error).collect());
    let t = records.len() as f64;
    let exceeded = records.iter().filter(|r| r.exceeded).count();
    let summary = Theorem1Summary {
        trials: records.len(),
        d_a: a.rows(),
        d_b: b.rows(),
        m,
        m_padded,
        n,
        k,
        delta: cfg.delta,
        bound,
        exceeded,
        exceed_fraction: exceeded as f64 / t,
        mean_error: errors.iter().sum::<f64>() / t,
        q50: quantile(&errors, 0.5),
        q90: quantile(&errors, 0.9),
        q99: quantile(&errors, 0.99),
        max_error: errors.last().copied().unwrap_or(0.0),
        mean_frobenius_error: records.iter().map(|r| r.rel_frobenius_error).sum::<f64>() / t,
    };
    Ok(Theorem1Run { summary, records })
}

