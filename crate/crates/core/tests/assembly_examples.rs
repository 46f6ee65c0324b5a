//! Hand-computable values of the individual assembly contributions.

mod common;

use cutfem::assembly::{
    assemble_bulk_stiffness, assemble_ghost_penalty, assemble_interface_stiffness, assemble_load,
    assemble_robust_coupling, assemble_standard_coupling, constant, InterfaceModel, Stabilization,
};
use cutfem::cases::{case_manufactured, CaseSpec};
use cutfem::fem::{Field, P1Element};
use cutfem::geometry::Interface;
use cutfem::linalg::SparseSymmetric;
use cutfem::solver::{Discretization, Problem};
use cutfem::Formulation;

use common::p1_basis;

fn problem(case: &CaseSpec, nx: usize) -> Problem {
    Problem::build(case, &Discretization::new(nx, Formulation::Robust)).unwrap()
}

/// Global vector with `fields[k]` evaluated at the active nodes of field `k`.
fn nodal(p: &Problem, fields: [&dyn Fn([f64; 2]) -> f64; 3]) -> Vec<f64> {
    let mut x = vec![0.0; p.n_dofs()];
    for (field, f) in Field::ALL.into_iter().zip(fields) {
        for (node, dof) in p.spaces.active_nodes(field) {
            x[dof] = f(p.mesh.nodes[node]);
        }
    }
    x
}

fn form(p: &Problem, m: &SparseSymmetric, fields: [&dyn Fn([f64; 2]) -> f64; 3]) -> f64 {
    let x = nodal(p, fields);
    m.bilinear(&x, &x)
}

fn zero(_: [f64; 2]) -> f64 {
    0.0
}

fn one(_: [f64; 2]) -> f64 {
    1.0
}

#[test]
fn unit_triangle_element_matrix() {
    let el = P1Element::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
    for p in 0..3 {
        for q in 0..3 {
            let k = el.area * (el.grads[p][0] * el.grads[q][0] + el.grads[p][1] * el.grads[q][1]);
            assert!((k - expected[p][q]).abs() < 1e-15);
        }
    }
}

#[test]
fn cut_bulk_stiffness_scales_with_area_fraction() {
    // on [0,1]² with one cell, x < x₀ covers x₀²/2 of the lower-right
    // triangle (0,0),(1,0),(1,1) and x₀ - x₀²/2 of the upper-left one
    let x0 = 0.3;
    let mut case = case_manufactured();
    case.interface = Interface::vertical_line(x0);
    let p = problem(&case, 1);
    let k = assemble_bulk_stiffness(&p.context()).unwrap().build();
    let mut expected = vec![vec![0.0; p.n_dofs()]; p.n_dofs()];
    for e in 0..2 {
        let tri = p.mesh.vertices(e);
        let area = 0.5;
        let frac1 = if e == 0 { x0 * x0 / 2.0 } else { x0 - x0 * x0 / 2.0 } / area;
        let (_, g) = p1_basis(tri, tri[0]);
        for (field, frac) in [(Field::Bulk1, frac1), (Field::Bulk2, 1.0 - frac1)] {
            let dofs = p.spaces.element_dofs(&p.mesh, field, e);
            for a in 0..3 {
                for b in 0..3 {
                    expected[dofs[a]][dofs[b]] += frac * area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
        }
    }
    let dense = k.to_dense();
    for i in 0..p.n_dofs() {
        for j in 0..p.n_dofs() {
            assert!((dense[i][j] - expected[i][j]).abs() < 1e-13, "({i},{j})");
        }
    }
}

#[test]
fn bulk_stiffness_annihilates_constants() {
    let p = problem(&case_manufactured(), 11);
    let k = assemble_bulk_stiffness(&p.context()).unwrap().build();
    let r = k.mul_vec(&vec![1.0; p.n_dofs()]);
    assert!(r.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn interface_stiffness_of_tangential_linear() {
    let p = problem(&case_manufactured(), 11);
    let k = assemble_interface_stiffness(&p.context()).unwrap().build();
    let y = |x: [f64; 2]| x[1];
    assert!((form(&p, &k, [&zero, &zero, &y]) - 1.0).abs() < 1e-12);
    assert!(form(&p, &k, [&zero, &zero, &one]).abs() < 1e-13);
    // the normal direction is projected out
    let x = |x: [f64; 2]| x[0];
    assert!(form(&p, &k, [&zero, &zero, &x]).abs() < 1e-13);
}

#[test]
fn interface_stiffness_scales_with_a_gamma() {
    let mut case = case_manufactured();
    case.coeffs.model = InterfaceModel::Direct {
        a_gamma: constant(3.5),
        alpha: 1.0,
        xi: 1.0,
    };
    let p = problem(&case, 11);
    let k = assemble_interface_stiffness(&p.context()).unwrap().build();
    let y = |x: [f64; 2]| x[1];
    assert!((form(&p, &k, [&zero, &zero, &y]) - 3.5).abs() < 1e-11);
}

#[test]
fn standard_coupling_values() {
    let p = problem(&case_manufactured(), 11);
    let b = assemble_standard_coupling(&p.context()).unwrap().build();
    assert!((form(&p, &b, [&one, &zero, &zero]) - 1.0).abs() < 1e-12);
    assert!(form(&p, &b, [&one, &one, &one]).abs() < 1e-13);

    // α = 1, ξ = 3/4: λ₁ = 2 along e₁ = (1, 1)/√2
    let case = case_manufactured().with_coupling(Some(1.0), Some(0.75)).unwrap();
    let p = problem(&case, 11);
    let b = assemble_standard_coupling(&p.context()).unwrap().build();
    let s = |_: [f64; 2]| std::f64::consts::FRAC_1_SQRT_2;
    assert!((form(&p, &b, [&s, &s, &zero]) - 2.0).abs() < 1e-12);
    let t = |_: [f64; 2]| -std::f64::consts::FRAC_1_SQRT_2;
    assert!((form(&p, &b, [&s, &t, &zero]) - 1.0).abs() < 1e-12);
}

#[test]
fn robust_coupling_annihilates_constants() {
    for alpha in [1e-4, 1.0, 1e8] {
        let case = case_manufactured().with_coupling(Some(alpha), Some(1.0)).unwrap();
        let p = problem(&case, 11);
        let m = assemble_robust_coupling(&p.context(), p.h(), 10.0, false).unwrap().build();
        let r = m.mul_vec(&vec![2.5; p.n_dofs()]);
        let scale = m.max_abs();
        assert!(r.iter().all(|v| v.abs() <= 1e-12 * scale), "alpha {alpha}");
    }
}

#[test]
fn face_jump_of_a_kink() {
    // v₁ = max(x - x_k, 0) with x_k on a mesh line has gradient jump (1, 0)
    // across the vertical faces on that line and no jump anywhere else
    let p = problem(&case_manufactured(), 11);
    let stab = Stabilization {
        gamma: 0.7,
        band_normal: false,
        ..Stabilization::default()
    };
    let s = assemble_ghost_penalty(&p.context(), &stab, p.h()).unwrap().build();
    let xk = 5.0 / 11.0;
    let kink = move |x: [f64; 2]| (x[0] - xk).max(0.0);
    let value = form(&p, &s, [&kink, &zero, &zero]);
    let mut expected = 0.0;
    for face in p.decomp.ghost_faces(Field::Bulk1) {
        let a = p.mesh.nodes[face.nodes[0]];
        let b = p.mesh.nodes[face.nodes[1]];
        let on_line = (a[0] - xk).abs() < 1e-12 && (b[0] - xk).abs() < 1e-12;
        if on_line {
            expected += 0.7 * face.length * face.length;
        }
    }
    assert!(expected > 0.0, "kink line should meet ghost faces");
    assert!((value - expected).abs() < 1e-12, "{value} vs {expected}");
}

#[test]
fn ghost_penalty_kernel() {
    let p = problem(&case_manufactured(), 11);
    let all_faces = Stabilization {
        band_jumps: true,
        band_normal: false,
        ..Stabilization::default()
    };
    let s = assemble_ghost_penalty(&p.context(), &all_faces, p.h()).unwrap().build();
    let l1 = |x: [f64; 2]| 1.0 + 2.0 * x[0] - 3.0 * x[1];
    let l2 = |x: [f64; 2]| -0.5 * x[0] + x[1];
    let lg = |x: [f64; 2]| 4.0 * x[0] + 0.25;
    assert!(form(&p, &s, [&l1, &l2, &lg]).abs() < 1e-12);

    // the normal-gradient term only sees ∂ₙv_Γ
    let normal_only = Stabilization {
        bulk_jumps: false,
        ..Stabilization::default()
    };
    let s = assemble_ghost_penalty(&p.context(), &normal_only, p.h()).unwrap().build();
    let y = |x: [f64; 2]| x[1];
    assert!(form(&p, &s, [&zero, &zero, &y]).abs() < 1e-14);
    let x = |x: [f64; 2]| x[0];
    // Σ h² |T∩Γ| over the cut cells with |Γ| = 1
    let expected = p.h() * p.h();
    assert!((form(&p, &s, [&zero, &zero, &x]) - expected).abs() < 1e-12);
}

#[test]
fn load_partition_of_unity() {
    let mut case = case_manufactured();
    case.coeffs.f1 = constant(1.0);
    case.coeffs.f2 = constant(1.0);
    case.interface = Interface::vertical_line(0.37);
    let p = problem(&case, 11);
    let rhs = assemble_load(&p.context()).unwrap();
    let block = |f: Field| -> f64 {
        let o = p.spaces.offset(f);
        rhs[o..o + p.spaces.count(f)].iter().sum()
    };
    assert!((block(Field::Bulk1) - 0.37).abs() < 1e-12);
    assert!((block(Field::Bulk2) - 0.63).abs() < 1e-12);
    assert!((block(Field::Gamma) - 0.5).abs() < 1e-12);

    case.coeffs.f1 = constant(0.0);
    case.coeffs.f2 = constant(0.0);
    case.coeffs.f_gamma = constant(0.0);
    let p = problem(&case, 11);
    assert!(assemble_load(&p.context()).unwrap().iter().all(|&v| v == 0.0));
}
