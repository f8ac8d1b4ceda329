use std::fmt;
use std::time::{Duration, Instant};

use srht_matmul::{
    apply_rotation, draw_plan, make_rotation, required_n, sample_product, split_seed,
    stable_rank_k, theorem1_bound, DenseMatrix, SketchPlan,
};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone)]
pub struct SketchRun {
    pub estimate: DenseMatrix,
    pub plan: SketchPlan,
    pub rotation_time: Duration,
    pub accumulation_time: Duration,
}

impl fmt::Display for SketchRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (r, c) = self.estimate.shape();
        writeln!(f, "sketch")?;
        writeln!(f, "  output             {r}x{c}")?;
        writeln!(f, "  columns (padded)   {}", self.plan.rotation.m_padded)?;
        writeln!(f, "  samples n          {}", self.plan.n)?;
        writeln!(f, "  seed               {}", self.plan.rotation.seed)?;
        writeln!(f, "  rotation           {:.6} s", self.rotation_time.as_secs_f64())?;
        write!(f, "  accumulation       {:.6} s", self.accumulation_time.as_secs_f64())
    }
}

/// One estimate of `ABᵀ` with seed `--seed`, timing the two stages apart.
pub fn run_sketch(cfg: &ExperimentConfig) -> Result<SketchRun> {
    let a = cfg.load_a()?;
    let b = cfg.load_b()?;
    if a.cols() != b.cols() {
        return Err(CliError::Usage(format!("A has {} columns but B has {}", a.cols(), b.cols())));
    }
    let n = cfg.n.ok_or_else(|| CliError::Usage("sketch needs --n".into()))?;

    let start = Instant::now();
    let (rotation_seed, sample_seed) = split_seed(cfg.base_seed);
    let rotation = make_rotation(a.cols(), rotation_seed)?;
    let a_rot = apply_rotation(&a, &rotation)?;
    let b_rot = apply_rotation(&b, &rotation)?;
    let rotation_time = start.elapsed();

    let start = Instant::now();
    let plan = draw_plan(rotation, n, sample_seed)?;
    let estimate = sample_product(&a_rot, &b_rot, &plan)?;
    let accumulation_time = start.elapsed();

    Ok(SketchRun {
        estimate,
        plan,
        rotation_time,
        accumulation_time,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRun {
    pub k: f64,
    pub m: usize,
    pub m_padded: usize,
    pub delta: f64,
    /// `(n, relative error bound, failure probability)`
    pub bound: Option<(usize, f64, f64)>,
    /// `(eps, smallest n)`
    pub required: Option<(f64, usize)>,
}

impl fmt::Display for BoundRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bound")?;
        writeln!(f, "  k                  {:.6}", self.k)?;
        writeln!(f, "  m (padded)         {} ({})", self.m, self.m_padded)?;
        write!(f, "  delta              {}", self.delta)?;
        if let Some((n, eps, p)) = self.bound {
            write!(f, "\n  n                  {n}")?;
            write!(f, "\n  theorem1_bound     {eps:.16e}")?;
            write!(f, "\n  failure prob       {p:.6e}")?;
        }
        if let Some((eps, n)) = self.required {
            write!(f, "\n  eps                {eps}")?;
            write!(f, "\n  required_n         {n}")?;
        }
        Ok(())
    }
}

/// Evaluates the bound at `--n` and inverts it at `--eps`. `k` and `m` come
/// from `--k`/`--m` or from the input matrices.
pub fn run_bound(cfg: &ExperimentConfig) -> Result<BoundRun> {
    let (k, m) = match (cfg.k, cfg.m) {
        (Some(k), Some(m)) if cfg.matrix_a.is_none() => (k, m),
        _ => {
            let a = cfg.load_a()?;
            let b = cfg.load_b()?;
            let k = match cfg.k {
                Some(k) => k,
                None => stable_rank_k(&a, &b)?,
            };
            (k, a.cols())
        }
    };
    if cfg.n.is_none() && cfg.eps.is_none() {
        return Err(CliError::Usage("bound needs --n, --eps or both".into()));
    }
    let m_padded = m.next_power_of_two();
    let bound = cfg
        .n
        .map(|n| -> Result<_> {
            let r = theorem1_bound(k, m_padded, n, cfg.delta)?;
            Ok((n, r.relative_error_bound, r.failure_probability))
        })
        .transpose()?;
    let required = cfg
        .eps
        .map(|eps| -> Result<_> { Ok((eps, required_n(k, m_padded, cfg.delta, eps)?)) })
        .transpose()?;
    Ok(BoundRun {
        k,
        m,
        m_padded,
        delta: cfg.delta,
        bound,
        required,
    })
}
