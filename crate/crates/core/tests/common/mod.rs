//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub type P = [f64; 2];

/// Eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations,
/// ascending.
pub fn symmetric_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum();
        if off <= 1e-30 * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Values and gradients of the three P1 hat functions of `tri` at `p`.
pub fn p1_basis(tri: [P; 3], p: P) -> ([f64; 3], [P; 3]) {
    let [a, b, c] = tri;
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let grads = [
        [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
        [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
        [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
    ];
    let mut vals = [0.0; 3];
    // barycentric coordinates from the gradients: λ_k(p) = λ_k(v_k) + ∇λ_k·(p - v_k)
    for k in 0..3 {
        let v = tri[k];
        vals[k] = 1.0 + grads[k][0] * (p[0] - v[0]) + grads[k][1] * (p[1] - v[1]);
    }
    (vals, grads)
}

/// Three-point Gauss-Legendre rule on the segment `p → q`.
pub fn gauss3(p: P, q: P) -> Vec<(P, f64)> {
    let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
    let r = (0.6f64).sqrt();
    [(-r, 5.0 / 9.0), (0.0, 8.0 / 9.0), (r, 5.0 / 9.0)]
        .iter()
        .map(|&(s, w)| {
            let t = 0.5 * (1.0 + s);
            ([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])], 0.5 * w * len)
        })
        .collect()
}

pub fn max_abs_dense(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
}
