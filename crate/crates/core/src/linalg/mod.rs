//! Sparse symmetric linear algebra: storage, direct and iterative solvers,
//! condition number estimation.

pub mod cg;
pub mod cholesky;
pub mod condition;
pub mod sparse;

pub use cg::{solve_cg, CgOutcome, Preconditioner};
pub use cholesky::Cholesky;
pub use condition::{estimate_condition, estimate_condition_with, ConditionEstimate};
pub use sparse::{SparseSymmetric, TripletBuilder};

use crate::error::Result;

/// Solve `A x = b` for SPD `A` with the envelope Cholesky factorization.
pub fn solve_direct(a: &SparseSymmetric, b: &[f64]) -> Result<Vec<f64>> {
    Ok(Cholesky::factor(a)?.solve(b))
}

/// `‖A x - b‖ / ‖b‖` (or the absolute residual norm if `b = 0`).
pub fn relative_residual(a: &SparseSymmetric, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}
