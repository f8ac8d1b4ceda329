//! Closed-form tail bounds for the rotated-sampling estimator and the
//! inversion from a target error to a sufficient sample count.
//!
//! All logarithms are natural.

use crate::error::{Error, Result};

/// Smallest Bernstein parameter for which `t/(eᵗ−t−1) ≤ e^{−t/2}` is used.
pub const MIN_BERNSTEIN_T: f64 = 2.6;

/// Slack for stable-rank estimates that land a hair under 1.
const K_SLACK: f64 = 1e-9;

/// A bound on `‖ÂBᵀ − ABᵀ‖ / (‖A‖‖B‖)` and the probability it fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub relative_error_bound: f64,
    pub failure_probability: f64,
}

/// Parameters of the bounds. `mu` and `t` matter only for the
/// coherence-conditional bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub k: f64,
    pub m: usize,
    pub n: usize,
    pub delta: f64,
    pub mu: f64,
    pub t: f64,
}

impl BoundInputs {
    pub fn theorem1(&self) -> Result<BoundResult> {
        theorem1_bound(self.k, self.m, self.n, self.delta)
    }

    /// Coherence-conditional bound with `k_A = k_B = k`.
    pub fn lemma1(&self) -> Result<BoundResult> {
        lemma1_bound(self.mu, self.t, self.n, self.k, self.k)
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {x}")))
    }
}

fn valid_k(k: f64) -> Result<()> {
    if k.is_finite() && k >= 1.0 - K_SLACK {
        Ok(())
    } else {
        Err(Error::Domain(format!("k must be at least 1, got {k}")))
    }
}

fn valid_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 / 3.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta must lie in (0, 1/3), got {delta}")))
    }
}

/// `t / (eᵗ − t − 1)`. Below `t = 1e-4` the denominator is evaluated from
/// its Taylor series to avoid cancellation.
pub fn bernstein_tail(t: f64) -> Result<f64> {
    positive("t", t)?;
    let denom = if t < 1e-4 {
        let t2 = t * t;
        t2 * (0.5 + t * (1.0 / 6.0 + t * (1.0 / 24.0 + t / 120.0)))
    } else {
        t.exp_m1() - t
    };
    Ok(t / denom)
}

/// Error bound given the realized coherence `mu`:
/// `√(2(μ+1)t/n) + (μ+1)t/(3n)`, failing with probability at most
/// `2√(k_a k_b) · t/(eᵗ−t−1)` (clamped to 1).
pub fn lemma1_bound(mu: f64, t: f64, n: usize, k_a: f64, k_b: f64) -> Result<BoundResult> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("mu must be nonnegative, got {mu}")));
    }
    positive("t", t)?;
    positive("k_a", k_a)?;
    positive("k_b", k_b)?;
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let n = n as f64;
    let c = (mu + 1.0) * t;
    Ok(BoundResult {
        relative_error_bound: (2.0 * c / n).sqrt() + c / (3.0 * n),
        failure_probability: (2.0 * (k_a * k_b).sqrt() * bernstein_tail(t)?).min(1.0),
    })
}

/// Threshold on `max_i ‖Zᵀ Θ eᵢ‖²` that a normalized `Z` exceeds with
/// probability at most `e^{−t}`:
/// `(k_z + 2√(k_z(ln m + t)) + 2(ln m + t)) / m`.
pub fn lemma2_bound(k_z: f64, m: usize, t: f64) -> Result<f64> {
    positive("k_z", k_z)?;
    positive("t", t)?;
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let m = m as f64;
    let l = m.ln() + t;
    Ok((k_z + 2.0 * (k_z * l).sqrt() + 2.0 * l) / m)
}

/// `k + 2√(k ln(3m/δ)) + 2 ln(3m/δ)`: the coherence level both normalized
/// inputs stay under with probability at least `1 − 2δ/3`.
pub fn mu_threshold(k: f64, m: usize, delta: f64) -> Result<f64> {
    valid_k(k)?;
    valid_delta(delta)?;
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let l = (3.0 * m as f64 / delta).ln();
    Ok(k + 2.0 * (k * l).sqrt() + 2.0 * l)
}

/// Unconditional bound holding with probability at least `1 − δ`.
///
/// With `L = ln(3m/δ)`, `C = k + 2√(kL) + 2L + 1` and `T = ln(6k/δ)`, the
/// bound is `√(4CT/n) + 2CT/(3n)`.
pub fn theorem1_bound(k: f64, m: usize, n: usize, delta: f64) -> Result<BoundResult> {
    valid_k(k)?;
    valid_delta(delta)?;
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let big_t = (6.0 * k / delta).ln();
    if 2.0 * big_t < MIN_BERNSTEIN_T {
        return Err(Error::Domain(format!(
            "need 2 ln(6k/delta) >= {MIN_BERNSTEIN_T}, got {}",
            2.0 * big_t
        )));
    }
    let c = mu_threshold(k, m, delta)? + 1.0;
    let n = n as f64;
    Ok(BoundResult {
        relative_error_bound: (4.0 * c * big_t / n).sqrt() + 2.0 * c * big_t / (3.0 * n),
        failure_probability: delta,
    })
}

/// Smallest `n` whose [`theorem1_bound`] is at most `eps`, found by
/// doubling and then bisecting (the bound is strictly decreasing in `n`).
pub fn required_n(k: f64, m: usize, delta: f64, eps: f64) -> Result<usize> {
    positive("eps", eps)?;
    let bound = |n: usize| theorem1_bound(k, m, n, delta).map(|r| r.relative_error_bound);

    let mut hi = 1usize;
    while bound(hi)? > eps {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::Overflow(format!("no representable n reaches eps = {eps}")))?;
    }
    if hi == 1 {
        return Ok(1);
    }
    // bound(lo) > eps >= bound(hi)
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid)? <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernstein_tail_domain() {
        assert!(bernstein_tail(0.0).is_err());
        assert!(bernstein_tail(-1.0).is_err());
        assert!(bernstein_tail(f64::NAN).is_err());
    }

    #[test]
    fn bernstein_tail_small_t() {
        let v = bernstein_tail(1e-6).unwrap();
        assert!((v - 2e6).abs() / 2e6 < 0.01);
        // both branches agree across the switch point
        let below = bernstein_tail(0.99999e-4).unwrap();
        let above = bernstein_tail(1.00001e-4).unwrap();
        assert!((below - above).abs() / below < 1e-4);
    }

    #[test]
    fn bernstein_tail_large_t() {
        let v = bernstein_tail(20.0).unwrap();
        assert!((v - 4.122_307_5e-8).abs() < 1e-13, "{v}");
        assert_eq!(bernstein_tail(1000.0).unwrap(), 0.0);
    }

    #[test]
    fn lemma1_examples() {
        let r = lemma1_bound(1.0, 2.0, 8, 1.0, 1.0).unwrap();
        assert!((r.relative_error_bound - (1.0 + 1.0 / 6.0)).abs() < 1e-15);
        let small = lemma1_bound(1.0, 2.0, 1 << 40, 1.0, 1.0).unwrap();
        assert!(small.relative_error_bound < 1e-5);
        // clamped probability for small t
        assert_eq!(lemma1_bound(1.0, 0.1, 8, 4.0, 4.0).unwrap().failure_probability, 1.0);
        assert!(lemma1_bound(-1.0, 2.0, 8, 1.0, 1.0).is_err());
        assert!(lemma1_bound(1.0, 2.0, 0, 1.0, 1.0).is_err());
    }

    #[test]
    fn lemma2_examples() {
        let v = lemma2_bound(1.0, 1, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-5);
        let a = lemma2_bound(3.0, 64, 1.0).unwrap();
        let b = lemma2_bound(3.0, 64, 1.5).unwrap();
        assert!(b > a);
        assert!(lemma2_bound(0.0, 4, 1.0).is_err());
        assert!(lemma2_bound(1.0, 0, 1.0).is_err());
    }

    #[test]
    fn theorem1_domain() {
        assert!(theorem1_bound(0.5, 16, 10, 0.1).is_err());
        assert!(theorem1_bound(1.0, 16, 10, 0.4).is_err());
        assert!(theorem1_bound(1.0, 16, 10, 0.0).is_err());
        assert!(theorem1_bound(1.0, 16, 0, 0.1).is_err());
        assert_eq!(theorem1_bound(2.0, 16, 10, 0.1).unwrap().failure_probability, 0.1);
    }

    #[test]
    fn theorem1_matches_lemma1_at_proof_parameters() {
        for &(k, m, n, delta) in &[(1.0, 1024, 10_000, 0.1), (7.5, 256, 300, 0.01), (40.0, 8, 5, 0.3)] {
            let thm = theorem1_bound(k, m, n, delta).unwrap();
            let mu = mu_threshold(k, m, delta).unwrap();
            let t = 2.0 * (6.0 * k / delta).ln();
            let lem = lemma1_bound(mu, t, n, k, k).unwrap();
            let rel = (thm.relative_error_bound - lem.relative_error_bound).abs() / thm.relative_error_bound;
            assert!(rel < 1e-14, "{rel}");
        }
    }

    #[test]
    fn required_n_small_cases() {
        assert_eq!(required_n(1.0, 2, 0.3, 1e6).unwrap(), 1);
        assert!(required_n(1.0, 2, 0.3, 0.0).is_err());
        assert!(matches!(required_n(1.0, 2, 0.3, 1e-300), Err(Error::Overflow(_))));
    }

    #[test]
    fn bound_inputs_dispatch() {
        let inputs = BoundInputs { k: 2.0, m: 64, n: 100, delta: 0.1, mu: 3.0, t: 4.0 };
        assert_eq!(inputs.theorem1().unwrap(), theorem1_bound(2.0, 64, 100, 0.1).unwrap());
        assert_eq!(inputs.lemma1().unwrap(), lemma1_bound(3.0, 4.0, 100, 2.0, 2.0).unwrap());
    }
}
