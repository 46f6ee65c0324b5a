//! Error norms, convergence and conditioning studies, and solution
//! diagnostics.

use rayon::prelude::*;

use crate::assembly::{bulk_rule, penalty_at, segment_rule, Formulation};
use crate::cases::{CaseSpec, ExactSolution};
use crate::error::{Error, Result};
use crate::fem::{Field, P1Element};
use crate::geometry::vec2::{self, Point};
use crate::solver::{Discretization, Problem, Solution};

/// Squared contributions of the discrete energy norm of the error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyParts {
    /// `Σ ‖A_i^{1/2} ∇e_i‖²_{Ω_i}`.
    pub bulk: f64,
    /// `‖A_Γ^{1/2} ∇_Γ e_Γ‖²_Γ`.
    pub gamma: f64,
    /// `h Σ ‖A_i^{1/2} ∇e_i‖²_Γ`.
    pub flux: f64,
    /// `(τ J(e), J(e))_Γ`.
    pub jump: f64,
    /// `s_h(I_h u - u_h, I_h u - u_h)`.
    pub stabilization: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        (self.bulk + self.gamma + self.flux + self.jump + self.stabilization).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub err_l2_bulk: f64,
    pub err_h1semi_bulk: f64,
    pub err_l2_gamma: f64,
    pub err_h1semi_gamma: f64,
    pub energy_err: f64,
    pub energy_parts: EnergyParts,
    pub ndof: usize,
    pub h: f64,
}

impl ErrorReport {
    pub fn err_h1_bulk(&self) -> f64 {
        self.err_l2_bulk.hypot(self.err_h1semi_bulk)
    }

    pub fn err_h1_gamma(&self) -> f64 {
        self.err_l2_gamma.hypot(self.err_h1semi_gamma)
    }
}

fn local_values(problem: &Problem, field: Field, element: usize, x: &[f64]) -> [f64; 3] {
    problem
        .spaces
        .element_dofs(&problem.mesh, field, element)
        .map(|d| x[d])
}

/// Nodal interpolant of the exact fields on all active nodes.
pub fn interpolate_exact(problem: &Problem, exact: &ExactSolution) -> Vec<f64> {
    let mut out = vec![0.0; problem.n_dofs()];
    for field in Field::ALL {
        for (node, dof) in problem.spaces.active_nodes(field) {
            let p = problem.mesh.nodes[node];
            out[dof] = match field {
                Field::Bulk1 => (exact.u1)(p),
                Field::Bulk2 => (exact.u2)(p),
                Field::Gamma => (exact.u_gamma)(p),
            };
        }
    }
    out
}

/// Errors of a coefficient vector `x` on `problem` against `exact`.
pub fn error_norms_of(problem: &Problem, x: &[f64], exact: &ExactSolution) -> Result<ErrorReport> {
    let ctx = problem.context();
    let coeffs = &problem.case.coeffs;
    let h = problem.h();
    let mut l2_bulk = 0.0;
    let mut h1_bulk = 0.0;
    let mut parts = EnergyParts::default();
    for (side, field) in [(1usize, Field::Bulk1), (2, Field::Bulk2)] {
        for &e in problem.decomp.elements(field) {
            let el = P1Element::of(&problem.mesh, e);
            let u = local_values(problem, field, e, x);
            let grad_h = el.gradient(u);
            for (p, w) in bulk_rule(&ctx, field, e)?.iter() {
                let err = exact.bulk(side, p) - el.interpolate(u, p);
                let ge = vec2::sub(exact.bulk_gradient(side, p), grad_h);
                l2_bulk += w * err * err;
                h1_bulk += w * vec2::dot(ge, ge);
                parts.bulk += w * vec2::dot(ge, vec2::mat_vec(&coeffs.a_bulk(side, p), ge));
            }
        }
    }
    let mut l2_gamma = 0.0;
    let mut h1_gamma = 0.0;
    for cell in &problem.decomp.cut_cells {
        let el = P1Element::of(&problem.mesh, cell.element);
        let ug = local_values(problem, Field::Gamma, cell.element, x);
        let u1 = local_values(problem, Field::Bulk1, cell.element, x);
        let u2 = local_values(problem, Field::Bulk2, cell.element, x);
        let grads = [el.gradient(u1), el.gradient(u2)];
        let grad_g = el.gradient(ug);
        for (p, w) in segment_rule(cell)?.iter() {
            let t = problem.case.interface.tangent(p);
            let eg = (exact.u_gamma)(p) - el.interpolate(ug, p);
            let tg = vec2::dot(vec2::sub((exact.grad_gamma)(p), grad_g), t);
            l2_gamma += w * eg * eg;
            h1_gamma += w * tg * tg;
            parts.gamma += w * coeffs.a_gamma(p) * tg * tg;
            let mut jump = [0.0; 2];
            for side in [1usize, 2] {
                let ge = vec2::sub(exact.bulk_gradient(side, p), grads[side - 1]);
                parts.flux += h * w * vec2::dot(ge, vec2::mat_vec(&coeffs.a_bulk(side, p), ge));
                let uh = el.interpolate(if side == 1 { u1 } else { u2 }, p);
                jump[side - 1] = (exact.bulk(side, p) - uh) - eg;
            }
            let tau = penalty_at(&ctx, p, h, problem.params.beta, None)?.tau();
            parts.jump += w * vec2::dot(jump, vec2::mat_vec(&tau, jump));
        }
    }
    let interp = interpolate_exact(problem, exact);
    let diff: Vec<f64> = interp.iter().zip(x).map(|(a, b)| a - b).collect();
    parts.stabilization = problem.system.stabilization.bilinear(&diff, &diff).max(0.0);
    Ok(ErrorReport {
        err_l2_bulk: l2_bulk.sqrt(),
        err_h1semi_bulk: h1_bulk.sqrt(),
        err_l2_gamma: l2_gamma.sqrt(),
        err_h1semi_gamma: h1_gamma.sqrt(),
        energy_err: parts.total(),
        energy_parts: parts,
        ndof: problem.n_dofs(),
        h,
    })
}

pub fn error_norms(solution: &Solution) -> Result<ErrorReport> {
    let exact = solution
        .problem
        .case
        .exact
        .as_ref()
        .ok_or_else(|| Error::Config(format!("case '{}' has no exact solution", solution.problem.case.name)))?;
    error_norms_of(&solution.problem, &solution.values, exact)
}

/// Least-squares slope of `log e` against `log h`. `None` for fewer than two
/// usable points or a degenerate `h` range.
pub fn fit_rate(h: &[f64], e: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(e)
        .filter(|(h, e)| **h > 0.0 && **e > 0.0)
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

/// Rates between consecutive levels.
pub fn pair_rates(h: &[f64], e: &[f64]) -> Vec<Option<f64>> {
    h.windows(2)
        .zip(e.windows(2))
        .map(|(h, e)| fit_rate(h, e))
        .collect()
}

/// `nx` of refinement level `level`, halving `h` each time while keeping
/// `nx` odd when `nx0` is.
pub fn level_nx(nx0: usize, level: usize) -> usize {
    (nx0 + 1) * (1usize << level) - 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub nx: usize,
    pub report: ErrorReport,
    pub cond: Option<f64>,
}

/// Fitted rates, one per error column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub l2_bulk: f64,
    pub h1semi_bulk: f64,
    pub l2_gamma: f64,
    pub h1semi_gamma: f64,
    pub energy: f64,
    pub cond: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Message of the solver failure that cut the study short, if any.
    pub failure: Option<String>,
}

impl ConvergenceTable {
    pub fn h(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.report.h).collect()
    }

    pub fn column(&self, f: impl Fn(&ErrorReport) -> f64) -> Vec<f64> {
        self.rows.iter().map(|r| f(&r.report)).collect()
    }

    /// Least-squares rates; `None` with fewer than two rows.
    pub fn rates(&self) -> Option<Rates> {
        let h = self.h();
        let fit = |f: fn(&ErrorReport) -> f64| fit_rate(&h, &self.column(f));
        let cond: Option<Vec<f64>> = self.rows.iter().map(|r| r.cond).collect();
        Some(Rates {
            l2_bulk: fit(|r| r.err_l2_bulk)?,
            h1semi_bulk: fit(|r| r.err_h1semi_bulk)?,
            l2_gamma: fit(|r| r.err_l2_gamma)?,
            h1semi_gamma: fit(|r| r.err_h1semi_gamma)?,
            energy: fit(|r| r.energy_err)?,
            cond: cond.and_then(|c| fit_rate(&h, &c)),
        })
    }
}

/// Solve `case` on `levels` refinements of `disc.nx` and tabulate errors.
/// Levels run concurrently; rows stay in level order. A failing level ends
/// the table there.
pub fn convergence_study(
    case: &CaseSpec,
    disc: &Discretization,
    levels: usize,
    with_condition: bool,
) -> Result<ConvergenceTable> {
    if levels == 0 {
        return Err(Error::Config("at least one level is required".into()));
    }
    if case.exact.is_none() {
        return Err(Error::Config(format!("case '{}' has no exact solution", case.name)));
    }
    let results: Vec<Result<ConvergenceRow>> = (0..levels)
        .into_par_iter()
        .map(|level| {
            let nx = level_nx(disc.nx, level);
            let problem = Problem::build(case, &disc.with_nx(nx))?;
            let cond = if with_condition {
                Some(problem.condition_number()?.kappa)
            } else {
                None
            };
            let solution = problem.solve()?;
            Ok(ConvergenceRow {
                level,
                nx,
                report: error_norms(&solution)?,
                cond,
            })
        })
        .collect();
    let mut table = ConvergenceTable {
        rows: Vec::with_capacity(levels),
        failure: None,
    };
    for r in results {
        match r {
            Ok(row) => table.rows.push(row),
            Err(e) => {
                table.failure = Some(e.to_string());
                break;
            }
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    H,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionRow {
    /// Mesh size for an h-sweep, `α` for an α-sweep.
    pub parameter: f64,
    pub h: f64,
    pub ndof: usize,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionTable {
    pub sweep: Sweep,
    pub formulation: Formulation,
    pub rows: Vec<ConditionRow>,
}

impl ConditionTable {
    /// Least-squares slope of `log κ` against the log of the swept parameter.
    pub fn slope(&self) -> Option<f64> {
        let p: Vec<f64> = self.rows.iter().map(|r| r.parameter).collect();
        let k: Vec<f64> = self.rows.iter().map(|r| r.kappa).collect();
        fit_rate(&p, &k)
    }

    /// `κ(last) / κ(first)`.
    pub fn growth(&self) -> Option<f64> {
        Some(self.rows.last()?.kappa / self.rows.first()?.kappa)
    }
}

pub const DEFAULT_ALPHAS: [f64; 4] = [1.0, 1e2, 1e4, 1e6];

/// κ of the constrained system over mesh levels (`Sweep::H`) or over
/// `alphas` at fixed `disc.nx` (`Sweep::Alpha`).
pub fn condition_study(
    case: &CaseSpec,
    disc: &Discretization,
    sweep: Sweep,
    levels: usize,
    alphas: &[f64],
) -> Result<ConditionTable> {
    let jobs: Vec<(f64, CaseSpec, Discretization)> = match sweep {
        Sweep::H => (0..levels)
            .map(|l| (f64::NAN, case.clone(), disc.with_nx(level_nx(disc.nx, l))))
            .collect(),
        Sweep::Alpha => alphas
            .iter()
            .map(|&a| Ok((a, case.clone().with_coupling(Some(a), None)?, *disc)))
            .collect::<Result<_>>()?,
    };
    if jobs.is_empty() {
        return Err(Error::Config("empty condition sweep".into()));
    }
    let rows = jobs
        .into_par_iter()
        .map(|(param, case, disc)| {
            let problem = Problem::build(&case, &disc)?;
            let est = problem.condition_number()?;
            let h = problem.h();
            Ok(ConditionRow {
                parameter: if sweep == Sweep::H { h } else { param },
                h,
                ndof: problem.n_dofs(),
                kappa: est.kappa,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionTable {
        sweep,
        formulation: disc.formulation,
        rows,
    })
}

/// `u_Γ` at the end points of every interface segment, ordered along the
/// curve with duplicates merged.
pub fn gamma_trace(solution: &Solution) -> Vec<(f64, f64)> {
    let p = &solution.problem;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for cell in &p.decomp.cut_cells {
        let el = P1Element::of(&p.mesh, cell.element);
        let u = local_values(p, Field::Gamma, cell.element, &solution.values);
        for q in cell.segment {
            samples.push((p.case.interface.curve_parameter(q), el.interpolate(u, q)));
        }
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tol = 1e-9 * p.h();
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    for (s, v) in samples {
        match out.last_mut() {
            Some(last) if (s - last.0).abs() <= tol => last.1 = 0.5 * (last.1 + v),
            _ => out.push((s, v)),
        }
    }
    out
}

/// Total variation of a sequence minus that of its monotone rearrangement.
pub fn oscillation(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let tv: f64 = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    (tv - (max - min)).max(0.0)
}

pub fn gamma_oscillation(solution: &Solution) -> f64 {
    let v: Vec<f64> = gamma_trace(solution).into_iter().map(|(_, v)| v).collect();
    oscillation(&v)
}

/// `max |u₁ - u₂|` over the interface quadrature points.
pub fn max_bulk_jump(solution: &Solution) -> Result<f64> {
    let p = &solution.problem;
    let mut worst = 0.0f64;
    for cell in &p.decomp.cut_cells {
        let el = P1Element::of(&p.mesh, cell.element);
        let u1 = local_values(p, Field::Bulk1, cell.element, &solution.values);
        let u2 = local_values(p, Field::Bulk2, cell.element, &solution.values);
        for (x, _) in segment_rule(cell)?.iter() {
            worst = worst.max((el.interpolate(u1, x) - el.interpolate(u2, x)).abs());
        }
    }
    Ok(worst)
}

/// Smallest and largest nodal value over all fields.
pub fn value_range(solution: &Solution) -> (f64, f64) {
    solution
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Interface points at which `u_Γ` is sampled for plotting.
pub fn interface_points(solution: &Solution) -> Vec<Point> {
    solution
        .problem
        .decomp
        .cut_cells
        .iter()
        .flat_map(|c| c.segment)
        .collect()
}
