//! Preconditioned conjugate gradients.

use super::sparse::SparseSymmetric;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Diagonal,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual `‖b - Ax‖ / ‖b‖` after each iteration.
    pub residual_history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn solve_cg(
    a: &SparseSymmetric,
    b: &[f64],
    tol: f64,
    max_iters: usize,
    preconditioner: Preconditioner,
) -> Result<CgOutcome> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("CG tolerance must be positive, got {tol}")));
    }
    let n = a.dim();
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            residual_history: vec![0.0],
        });
    }
    let inv_diag: Vec<f64> = match preconditioner {
        Preconditioner::None => vec![1.0; n],
        Preconditioner::Diagonal => a
            .diagonal()
            .into_iter()
            .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect(),
    };
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut history = Vec::new();
    for it in 1..=max_iters {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::Solver(format!(
                "CG breakdown at iteration {it}: pᵀAp = {pap:e}"
            )));
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let rel = dot(&r, &r).sqrt() / b_norm;
        history.push(rel);
        if rel <= tol {
            return Ok(CgOutcome {
                x,
                iterations: it,
                residual_history: history,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Convergence {
        iterations: max_iters,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}
