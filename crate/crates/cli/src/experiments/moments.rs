use std::fmt;

use srht_matmul::oracle::MAX_ENUMERATION;
use srht_matmul::{
    apply_rotation, enumerate_estimator_mean, exact_moments, make_rotation, matmul_exact,
    verify_lemma1_inequalities, InequalityCheck, MomentReport,
};

use super::nonzero_norm;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MomentsRun {
    pub m: usize,
    pub rotated: bool,
    pub report: MomentReport,
    pub checks: Vec<InequalityCheck>,
    /// `max |E[X] − M|` entrywise.
    pub mean_identity_gap: f64,
    /// `(n, max |E[ÂBᵀ] − QRᵀ|)` when `--n` was given and enumeration is feasible.
    pub enumeration: Option<(usize, f64)>,
}

/// Tolerance on the enumeration and mean-identity gaps.
pub const EXACTNESS_TOL: f64 = 1e-12;

impl MomentsRun {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
            && self.mean_identity_gap <= EXACTNESS_TOL
            && self.enumeration.is_none_or(|(_, gap)| gap <= EXACTNESS_TOL)
    }
}

impl fmt::Display for MomentsRun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "moments")?;
        writeln!(f, "  columns            {} ({})", self.m, if self.rotated { "rotated" } else { "unrotated" })?;
        writeln!(f, "  mu                 {:.6}", self.report.mu)?;
        writeln!(f, "  k_a, k_b           {:.6}, {:.6}", self.report.k_a, self.report.k_b)?;
        writeln!(f, "  |E[X] - M|         {:.3e}", self.mean_identity_gap)?;
        for c in &self.checks {
            writeln!(
                f,
                "  {:<36} {:>14.6e} <= {:<14.6e} {}",
                c.name,
                c.lhs,
                c.rhs,
                if c.holds { "PASS" } else { "FAIL" }
            )?;
        }
        if let Some((n, gap)) = self.enumeration {
            writeln!(f, "  enumerated mean    n = {n}, max gap {gap:.3e}")?;
        }
        write!(f, "  result             {}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

pub fn run_moments(cfg: &ExperimentConfig) -> Result<MomentsRun> {
    let a = cfg.load_a()?;
    let b = cfg.load_b()?;
    if a.cols() != b.cols() {
        return Err(CliError::Usage(format!("A has {} columns but B has {}", a.cols(), b.cols())));
    }
    let (a, b) = if cfg.identity_rotation {
        (a, b)
    } else {
        let rotation = make_rotation(a.cols(), cfg.base_seed)?;
        (apply_rotation(&a, &rotation)?, apply_rotation(&b, &rotation)?)
    };
    let q = a.scale(1.0 / nonzero_norm(&a, "A")?);
    let r = b.scale(1.0 / nonzero_norm(&b, "B")?);

    let report = exact_moments(&q, &r)?;
    let checks = verify_lemma1_inequalities(&report);
    let mean_identity_gap = report.mean_outcome.max_abs_diff(&report.m_matrix).unwrap_or(f64::INFINITY);

    let m = q.cols();
    let feasible = |n: usize| {
        u32::try_from(n)
            .ok()
            .and_then(|e| m.checked_pow(e))
            .is_some_and(|t| t <= MAX_ENUMERATION)
    };
    let enumeration = match cfg.n.filter(|&n| feasible(n)) {
        Some(n) => {
            let mean = enumerate_estimator_mean(&q, &r, n)?;
            let gap = mean.max_abs_diff(&matmul_exact(&q, &r)?).unwrap_or(f64::INFINITY);
            Some((n, gap))
        }
        None => None,
    };

    Ok(MomentsRun {
        m,
        rotated: !cfg.identity_rotation,
        report,
        checks,
        mean_identity_gap,
        enumeration,
    })
}
