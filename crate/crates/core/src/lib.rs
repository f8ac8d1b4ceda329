//! Randomized approximate matrix multiplication.
//!
//! Both factors are rotated by a shared random-sign Hadamard matrix, which
//! spreads their mass evenly over the columns, and `A Bᵀ` is then estimated
//! from a small uniform sample of rotated column pairs. The crate also
//! evaluates the spectral-norm tail bounds for this estimator and carries a
//! brute-force oracle for its moments.
//!
//! ```
//! use srht_matmul::{approx_matmul, matmul_exact, DenseMatrix};
//!
//! let a = DenseMatrix::from_fn(4, 64, |i, j| ((i + 1) * (j + 3)) as f64 % 7.0).unwrap();
//! let (estimate, plan) = approx_matmul(&a, &a, 32, 7).unwrap();
//! assert_eq!(estimate.shape(), (4, 4));
//! assert_eq!(plan.indices.len(), 32);
//! assert_eq!(matmul_exact(&a, &a).unwrap().shape(), (4, 4));
//! ```

pub mod bounds;
pub mod error;
pub mod matrix;
pub mod oracle;
pub mod rotate;
pub mod sketch;

pub use bounds::{
    bernstein_tail, lemma1_bound, lemma2_bound, mu_threshold, required_n, theorem1_bound,
    BoundInputs, BoundResult,
};
pub use error::{Error, Result};
pub use matrix::{
    coherence, frobenius_norm, matmul_exact, spectral_norm, spectral_norm_default, stable_rank_k,
    CoherenceReport, DenseMatrix,
};
pub use oracle::{
    enumerate_estimator_mean, exact_moments, verify_lemma1_inequalities, InequalityCheck,
    MomentReport,
};
pub use rotate::{apply_rotation, fwht_in_place, make_rotation, materialize_theta, RotationSpec};
pub use sketch::{approx_matmul, draw_plan, sample_product, split_seed, SketchPlan};
