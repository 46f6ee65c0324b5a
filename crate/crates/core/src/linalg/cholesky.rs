//! Envelope Cholesky factorization with reverse Cuthill–McKee ordering.

use std::collections::VecDeque;

use super::sparse::SparseSymmetric;
use crate::error::{Error, Result};

/// Pivots below this fraction of the corresponding diagonal entry are
/// reported as a loss of positive definiteness.
const PIVOT_TOLERANCE: f64 = 1e-14;

/// Reverse Cuthill–McKee permutation: `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &SparseSymmetric) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).filter(|&(j, _)| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));

    let bfs = |start: usize, visited: &mut Vec<bool>, out: &mut Vec<usize>| {
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            out.push(v);
            let mut nbrs: Vec<usize> = a
                .row(v)
                .map(|(j, _)| j)
                .filter(|&j| j != v && !visited[j])
                .collect();
            nbrs.sort_by_key(|&j| (degree[j], j));
            for j in nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    };

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        // move towards a pseudo-peripheral node: the last node of a BFS
        let mut probe_visited = visited.clone();
        let mut level = Vec::new();
        bfs(seed, &mut probe_visited, &mut level);
        let far = *level.last().unwrap_or(&seed);
        bfs(far, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// Cholesky factor `L` of `P A Pᵀ` stored row-wise over each row's envelope.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    row_start: Vec<usize>,
    values: Vec<f64>,
}

impl Cholesky {
    pub fn factor(a: &SparseSymmetric) -> Result<Self> {
        let n = a.dim();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (old, &i) in inv.iter().enumerate() {
            for (j_old, _) in a.row(old) {
                let j = inv[j_old];
                if j < first[i] {
                    first[i] = j;
                }
            }
        }
        let mut row_start = vec![0usize; n + 1];
        for i in 0..n {
            row_start[i + 1] = row_start[i] + (i - first[i] + 1);
        }
        let mut values = vec![0.0; row_start[n]];
        for (old, &i) in inv.iter().enumerate() {
            for (j_old, v) in a.row(old) {
                let j = inv[j_old];
                if j <= i {
                    values[row_start[i] + j - first[i]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let ri = row_start[i];
            for j in fi..=i {
                let fj = first[j];
                let rj = row_start[j];
                let k0 = fi.max(fj);
                let s: f64 = {
                    let li = &values[ri + (k0 - fi)..ri + (j - fi)];
                    let lj = &values[rj + (k0 - fj)..rj + (j - fj)];
                    li.iter().zip(lj).map(|(x, y)| x * y).sum()
                };
                let aij = values[ri + j - fi];
                if j < i {
                    values[ri + j - fi] = (aij - s) / values[rj + j - fj];
                } else {
                    let d = aij - s;
                    if !(d > PIVOT_TOLERANCE * aij.abs()) || !d.is_finite() {
                        return Err(Error::NotPositiveDefinite {
                            row: perm[i],
                            pivot: d,
                        });
                    }
                    values[ri + i - fi] = d.sqrt();
                }
            }
        }
        Ok(Cholesky {
            n,
            perm,
            first,
            row_start,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let ri = self.row_start[i];
            let s: f64 = self.values[ri..ri + (i - fi)]
                .iter()
                .zip(&y[fi..i])
                .map(|(l, v)| l * v)
                .sum();
            y[i] = (y[i] - s) / self.values[ri + i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let ri = self.row_start[i];
            let xi = y[i] / self.values[ri + i - fi];
            y[i] = xi;
            for (k, l) in (fi..i).zip(&self.values[ri..ri + (i - fi)]) {
                y[k] -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}
