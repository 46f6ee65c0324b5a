//! End-to-end pipeline: mesh, cut geometry, spaces, assembly, constraints
//! and linear solve.

use std::fmt;

use crate::assembly::{assemble_system, AssembledSystem, AssemblyParams, Context, Formulation, Stabilization};
use crate::cases::{BoundaryValue, CaseSpec};
use crate::error::{Error, Result};
use crate::fem::{ActiveDecomposition, DirichletSpec, Field, SpaceSet};
use crate::linalg::{
    estimate_condition_with, relative_residual, solve_cg, Cholesky, ConditionEstimate, Preconditioner, SparseSymmetric,
    TripletBuilder,
};
use crate::mesh::BackgroundMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolver {
    Direct,
    Cg,
}

impl fmt::Display for LinearSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinearSolver::Direct => "direct",
            LinearSolver::Cg => "cg",
        })
    }
}

impl std::str::FromStr for LinearSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(LinearSolver::Direct),
            "cg" => Ok(LinearSolver::Cg),
            _ => Err(Error::Config(format!("unknown solver '{s}'"))),
        }
    }
}

/// Discretization choices that are independent of the physical problem.
/// `None` fields fall back to the case defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub nx: usize,
    pub ny: Option<usize>,
    pub formulation: Formulation,
    pub beta: Option<f64>,
    pub stabilization: Option<Stabilization>,
    pub refined_tau: bool,
    pub solver: LinearSolver,
    pub cg_tol: f64,
    pub cg_max_iters: usize,
}

impl Discretization {
    pub fn new(nx: usize, formulation: Formulation) -> Self {
        Discretization {
            nx,
            ny: None,
            formulation,
            beta: None,
            stabilization: None,
            refined_tau: false,
            solver: LinearSolver::Direct,
            cg_tol: 1e-12,
            cg_max_iters: 100_000,
        }
    }

    pub fn with_nx(self, nx: usize) -> Self {
        Discretization { nx, ny: None, ..self }
    }
}

/// Everything needed to solve one discrete problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub case: CaseSpec,
    pub disc: Discretization,
    pub mesh: BackgroundMesh,
    pub decomp: ActiveDecomposition,
    pub spaces: SpaceSet,
    /// Unconstrained system.
    pub system: AssembledSystem,
    pub dirichlet: DirichletSpec,
    pub params: AssemblyParams,
}

fn constrain_field(
    spec: &mut DirichletSpec,
    mesh: &BackgroundMesh,
    spaces: &SpaceSet,
    field: Field,
    values: &[BoundaryValue],
) -> Result<()> {
    for (node, dof) in spaces.active_nodes(field) {
        for bv in values {
            if mesh.on_side(node, bv.side) {
                spec.constrain(dof, (bv.value)(mesh.nodes[node]))?;
            }
        }
    }
    Ok(())
}

impl Problem {
    pub fn build(case: &CaseSpec, disc: &Discretization) -> Result<Problem> {
        let ny = disc.ny.unwrap_or_else(|| case.ny_for(disc.nx));
        let mesh = BackgroundMesh::build(disc.nx, ny, case.bbox)?;
        let decomp = ActiveDecomposition::build(&mesh, &case.interface)?;
        let spaces = SpaceSet::build(&decomp, &mesh);
        let params = AssemblyParams {
            formulation: disc.formulation,
            beta: disc.beta.unwrap_or(case.beta),
            stabilization: disc.stabilization.unwrap_or(case.stabilization),
            refined_tau: disc.refined_tau,
        };
        let system = assemble_system(
            &Context {
                mesh: &mesh,
                interface: &case.interface,
                decomp: &decomp,
                spaces: &spaces,
                coeffs: &case.coeffs,
            },
            &params,
        )?;
        let mut dirichlet = DirichletSpec::new();
        for field in [Field::Bulk1, Field::Bulk2] {
            constrain_field(&mut dirichlet, &mesh, &spaces, field, &case.bulk_dirichlet)?;
        }
        constrain_field(&mut dirichlet, &mesh, &spaces, Field::Gamma, &case.band_dirichlet)?;
        Ok(Problem {
            case: case.clone(),
            disc: *disc,
            mesh,
            decomp,
            spaces,
            system,
            dirichlet,
            params,
        })
    }

    pub fn context(&self) -> Context<'_> {
        Context {
            mesh: &self.mesh,
            interface: &self.case.interface,
            decomp: &self.decomp,
            spaces: &self.spaces,
            coeffs: &self.case.coeffs,
        }
    }

    pub fn h(&self) -> f64 {
        self.mesh.h
    }

    pub fn n_dofs(&self) -> usize {
        self.spaces.n_dofs()
    }

    pub fn constrained(&self) -> Result<AssembledSystem> {
        self.system.with_dirichlet(&self.dirichlet)
    }

    /// Global indices of the unconstrained DOFs, ascending.
    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&d| self.dirichlet.get(d).is_none()).collect()
    }

    /// The system matrix restricted to the unconstrained DOFs.
    pub fn reduced_matrix(&self) -> SparseSymmetric {
        submatrix(&self.system.matrix, &self.free_dofs())
    }

    /// Spectral condition number of the constrained matrix.
    pub fn condition_number(&self) -> Result<ConditionEstimate> {
        let a = self.constrained()?.matrix;
        let factor = Cholesky::factor(&a)?;
        estimate_condition_with(&a, &factor)
    }

    /// Spectral condition number of `D^{-1/2} A D^{-1/2}` for the constrained
    /// matrix `A` with diagonal `D`.
    pub fn jacobi_condition_number(&self) -> Result<ConditionEstimate> {
        let a = self.constrained()?.matrix.jacobi_scaled();
        let factor = Cholesky::factor(&a)?;
        estimate_condition_with(&a, &factor)
    }

    pub fn solve(self) -> Result<Solution> {
        let constrained = self.constrained()?;
        let (values, iterations) = match self.disc.solver {
            LinearSolver::Direct => {
                let factor = Cholesky::factor(&constrained.matrix)?;
                (factor.solve(&constrained.rhs), None)
            }
            LinearSolver::Cg => {
                let out = solve_cg(
                    &constrained.matrix,
                    &constrained.rhs,
                    self.disc.cg_tol,
                    self.disc.cg_max_iters,
                    Preconditioner::Diagonal,
                )?;
                (out.x, Some(out.iterations))
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Solver("solution contains non-finite values".into()));
        }
        let residual = relative_residual(&constrained.matrix, &values, &constrained.rhs);
        Ok(Solution {
            problem: self,
            values,
            iterations,
            residual,
        })
    }
}

/// `A[keep, keep]`, renumbered in the order of `keep`.
pub fn submatrix(a: &SparseSymmetric, keep: &[usize]) -> SparseSymmetric {
    let mut map = vec![usize::MAX; a.dim()];
    for (new, &old) in keep.iter().enumerate() {
        map[old] = new;
    }
    let mut b = TripletBuilder::new(keep.len());
    for (new, &old) in keep.iter().enumerate() {
        for (j, v) in a.row(old) {
            if map[j] != usize::MAX {
                b.add(new, map[j], v);
            }
        }
    }
    b.build()
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub problem: Problem,
    /// Global coefficient vector in block order `(u₁, u₂, u_Γ)`.
    pub values: Vec<f64>,
    /// CG iterations, if the iterative solver was used.
    pub iterations: Option<usize>,
    pub residual: f64,
}

impl Solution {
    pub fn nodal(&self, field: Field) -> Vec<Option<f64>> {
        self.problem.spaces.nodal_values(field, &self.values)
    }

    pub fn field_values(&self, field: Field) -> &[f64] {
        let s = &self.problem.spaces;
        &self.values[s.offset(field)..s.offset(field) + s.count(field)]
    }
}

pub fn solve(case: &CaseSpec, disc: &Discretization) -> Result<Solution> {
    Problem::build(case, disc)?.solve()
}
