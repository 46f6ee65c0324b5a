//! Spectral condition number estimation for SPD matrices.

use super::cholesky::Cholesky;
use super::sparse::SparseSymmetric;
use crate::error::{Error, Result};

/// Relative change of the eigenvalue estimate at which iteration stops.
pub const EIGEN_TOLERANCE: f64 = 1e-6;
pub const MAX_EIGEN_ITERATIONS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionEstimate {
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub kappa: f64,
    pub power_iterations: usize,
    pub inverse_iterations: usize,
}

fn start_vector(n: usize) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 1.234_567 + 0.1).sin())
        .collect();
    normalize(&mut x);
    x
}

fn normalize(x: &mut [f64]) -> f64 {
    let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nrm > 0.0 {
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    nrm
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rayleigh-quotient iteration driver shared by the power and inverse
/// iterations; `apply` maps the current unit vector to the next iterate.
fn iterate(
    n: usize,
    mut apply: impl FnMut(&[f64]) -> Vec<f64>,
) -> std::result::Result<(f64, usize), f64> {
    let mut x = start_vector(n);
    let mut estimate = f64::NAN;
    for it in 1..=MAX_EIGEN_ITERATIONS {
        let mut y = apply(&x);
        let next = dot(&x, &y);
        normalize(&mut y);
        x = y;
        if (next - estimate).abs() < EIGEN_TOLERANCE * next.abs() {
            return Ok((next, it));
        }
        estimate = next;
    }
    Err(estimate)
}

/// `κ₂ = λ_max / λ_min` via power iteration and inverse iteration.
pub fn estimate_condition(a: &SparseSymmetric) -> Result<ConditionEstimate> {
    let factor = Cholesky::factor(a)?;
    estimate_condition_with(a, &factor)
}

pub fn estimate_condition_with(a: &SparseSymmetric, factor: &Cholesky) -> Result<ConditionEstimate> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::Config("empty matrix".into()));
    }
    let power = iterate(n, |x| a.mul_vec(x));
    let inverse = iterate(n, |x| factor.solve(x));
    match (power, inverse) {
        (Ok((lmax, pi)), Ok((mu, ii))) => {
            let lambda_min = 1.0 / mu;
            Ok(ConditionEstimate {
                lambda_max: lmax,
                lambda_min,
                kappa: lmax / lambda_min,
                power_iterations: pi,
                inverse_iterations: ii,
            })
        }
        (p, i) => {
            let lambda_max = match p {
                Ok((v, _)) | Err(v) => v,
            };
            let lambda_min = match i {
                Ok((v, _)) | Err(v) => 1.0 / v,
            };
            Err(Error::Estimation {
                reason: format!("no convergence within {MAX_EIGEN_ITERATIONS} iterations"),
                lambda_max,
                lambda_min,
            })
        }
    }
}
