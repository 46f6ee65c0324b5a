//! Direct, iterative and spectral linear algebra against dense oracles.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cutfem::cases::case_manufactured;
use cutfem::linalg::{estimate_condition, solve_cg, solve_direct, Preconditioner, SparseSymmetric};
use cutfem::solver::{Discretization, Problem};
use cutfem::{Error, Formulation};

use common::symmetric_eigenvalues;

fn chain() -> SparseSymmetric {
    SparseSymmetric::from_dense(&[vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]])
}

fn random_spd(n: usize, seed: u64) -> SparseSymmetric {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = (0..n).map(|k| g[i][k] * g[j][k]).sum::<f64>();
        }
        a[i][i] += 0.5;
    }
    SparseSymmetric::from_dense(&a)
}

#[test]
fn direct_solves() {
    let x = solve_direct(&chain(), &[1.0, 0.0, 0.0]).unwrap();
    for (v, e) in x.iter().zip([0.75, 0.5, 0.25]) {
        assert!((v - e).abs() < 1e-15);
    }
    let d = SparseSymmetric::from_dense(&[vec![2.0, 0.0], vec![0.0, 4.0]]);
    assert!(solve_direct(&d, &[2.0, 4.0]).unwrap().iter().all(|v| (v - 1.0).abs() < 1e-15));
    let b = [3.0, -1.0, 7.0];
    let x = solve_direct(&SparseSymmetric::identity(3), &b).unwrap();
    assert!(x.iter().zip(b).all(|(v, e)| (v - e).abs() < 1e-15));
}

#[test]
fn indefinite_matrix_is_rejected() {
    let a = SparseSymmetric::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
    assert!(matches!(solve_direct(&a, &[1.0, 1.0]), Err(Error::NotPositiveDefinite { .. })));
}

#[test]
fn cg_terminates_finitely() {
    let out = solve_cg(&SparseSymmetric::identity(5), &[1.0, 2.0, 3.0, 4.0, 5.0], 1e-12, 10, Preconditioner::None).unwrap();
    assert_eq!(out.iterations, 1);
    let out = solve_cg(&chain(), &[1.0, 0.0, 0.0], 1e-12, 10, Preconditioner::None).unwrap();
    assert!(out.iterations <= 3);
    assert!((out.x[0] - 0.75).abs() < 1e-12);
}

#[test]
fn cg_reports_non_convergence_with_history() {
    match solve_cg(&random_spd(30, 1), &vec![1.0; 30], 1e-14, 2, Preconditioner::None) {
        Err(Error::Convergence { iterations, history, .. }) => {
            assert_eq!(iterations, 2);
            assert_eq!(history.len(), 2);
        }
        other => panic!("expected a convergence error, got {other:?}"),
    }
}

#[test]
fn condition_estimate_matches_dense_eigenvalues() {
    assert!((estimate_condition(&SparseSymmetric::identity(4)).unwrap().kappa - 1.0).abs() < 1e-12);
    let d = SparseSymmetric::from_dense(&[vec![1.0, 0.0], vec![0.0, 10.0]]);
    assert!((estimate_condition(&d).unwrap().kappa - 10.0).abs() < 1e-4);

    let a = random_spd(50, 7);
    let ev = symmetric_eigenvalues(&a.to_dense());
    let dense = ev[ev.len() - 1] / ev[0];
    let est = estimate_condition(&a).unwrap().kappa;
    assert!((est - dense).abs() / dense < 0.05, "{est} vs {dense}");
}

#[test]
fn condition_estimate_is_scale_invariant() {
    let a = random_spd(40, 11);
    let base = estimate_condition(&a).unwrap().kappa;
    for c in [1e-6, 1.0, 1e6] {
        let k = estimate_condition(&a.scaled(c)).unwrap().kappa;
        assert!((k - base).abs() / base < 1e-4, "c = {c}: {k} vs {base}");
    }
}

#[test]
fn cg_agrees_with_direct_on_assembled_system() {
    let p = Problem::build(&case_manufactured(), &Discretization::new(11, Formulation::Robust)).unwrap();
    let sys = p.constrained().unwrap();
    let direct = solve_direct(&sys.matrix, &sys.rhs).unwrap();
    for pre in [Preconditioner::None, Preconditioner::Diagonal] {
        let cg = solve_cg(&sys.matrix, &sys.rhs, 1e-10, 100_000, pre).unwrap();
        let diff = cg.x.iter().zip(&direct).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-8, "{pre:?}: {diff}");
    }
}
