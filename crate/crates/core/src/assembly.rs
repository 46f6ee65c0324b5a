//! Assembly of the bulk, fracture, coupling and stabilization terms.

use std::fmt;
use std::sync::Arc;

use crate::coupling::{self, InterfaceCoupling, RobustPenalty};
use crate::error::{Error, Result};
use crate::fem::{apply_dirichlet, ActiveDecomposition, DirichletSpec, Field, P1Element, SpaceSet};
use crate::geometry::vec2::{self, Mat2, Point};
use crate::geometry::{polygon_quadrature, segment_quadrature, triangle_quadrature, CutCell, Interface, QuadratureRule};
use crate::linalg::{SparseSymmetric, TripletBuilder};
use crate::mesh::{BackgroundMesh, FaceRecord};

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type TensorFn = Arc<dyn Fn(Point) -> Mat2 + Send + Sync>;

pub fn constant(v: f64) -> ScalarFn {
    Arc::new(move |_| v)
}

pub fn isotropic(v: f64) -> TensorFn {
    Arc::new(move |_| vec2::mat_scale(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// Robin coupling `(B(u - u_Γ), v - v_Γ)_Γ`.
    Standard,
    /// Nitsche-type coupling with penalty `τ`, robust in the eigenvalues of `B`.
    Robust,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Standard => "standard",
            Formulation::Robust => "robust",
        })
    }
}

impl std::str::FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Formulation::Standard),
            "robust" => Ok(Formulation::Robust),
            _ => Err(Error::Config(format!("unknown formulation '{s}'"))),
        }
    }
}

/// How the interface permeability enters the fracture equation and `B`.
#[derive(Clone)]
pub enum InterfaceModel {
    /// Tangential coefficient `A_Γ` and a constant coupling `(α, ξ)`.
    Direct { a_gamma: ScalarFn, alpha: f64, xi: f64 },
    /// Fracture of thickness `d` and permeability `a_Γ`:
    /// `A_Γ = a_Γ d` and `α = 2 a_Γ / d` pointwise. With `scale_source` the
    /// fracture source is multiplied by `d`.
    Thickness {
        permeability: ScalarFn,
        d: f64,
        xi: f64,
        scale_source: bool,
    },
}

impl fmt::Debug for InterfaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterfaceModel::Direct { alpha, xi, .. } => {
                write!(f, "Direct {{ alpha: {alpha}, xi: {xi} }}")
            }
            InterfaceModel::Thickness {
                d, xi, scale_source, ..
            } => write!(f, "Thickness {{ d: {d}, xi: {xi}, scale_source: {scale_source} }}"),
        }
    }
}

/// Material data and sources.
#[derive(Clone)]
pub struct Coefficients {
    pub a1: TensorFn,
    pub a2: TensorFn,
    pub f1: ScalarFn,
    pub f2: ScalarFn,
    pub f_gamma: ScalarFn,
    pub model: InterfaceModel,
}

impl fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficients").field("model", &self.model).finish_non_exhaustive()
    }
}

impl Coefficients {
    pub fn a_bulk(&self, side: usize, x: Point) -> Mat2 {
        if side == 1 {
            (self.a1)(x)
        } else {
            (self.a2)(x)
        }
    }

    pub fn f_bulk(&self, side: usize, x: Point) -> f64 {
        if side == 1 {
            (self.f1)(x)
        } else {
            (self.f2)(x)
        }
    }

    /// Effective tangential coefficient `A_Γ` (isotropic on the tangent line).
    pub fn a_gamma(&self, x: Point) -> f64 {
        match &self.model {
            InterfaceModel::Direct { a_gamma, .. } => a_gamma(x),
            InterfaceModel::Thickness { permeability, d, .. } => permeability(x) * d,
        }
    }

    pub fn source_gamma(&self, x: Point) -> f64 {
        match &self.model {
            InterfaceModel::Thickness {
                d,
                scale_source: true,
                ..
            } => d * (self.f_gamma)(x),
            _ => (self.f_gamma)(x),
        }
    }

    pub fn coupling_at(&self, x: Point) -> Result<InterfaceCoupling> {
        match &self.model {
            InterfaceModel::Direct { alpha, xi, .. } => InterfaceCoupling::from_alpha_xi(*alpha, *xi),
            InterfaceModel::Thickness {
                permeability, d, xi, ..
            } => InterfaceCoupling::from_thickness(permeability(x), *d, *xi),
        }
    }
}

/// Ghost-penalty toggles and scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stabilization {
    /// Scale `γ` of the face-jump terms.
    pub gamma: f64,
    /// Face gradient jumps for the bulk fields.
    pub bulk_jumps: bool,
    /// Face gradient jumps for the fracture field on the band.
    pub band_jumps: bool,
    /// Normal-gradient penalty of the fracture field on `T ∩ Γ`.
    pub band_normal: bool,
    /// Scale of the normal-gradient term, independent of `γ`: without it the
    /// fracture field is undetermined across the band.
    pub band_normal_scale: f64,
}

impl Default for Stabilization {
    fn default() -> Self {
        Stabilization {
            gamma: 1.0,
            bulk_jumps: true,
            band_jumps: false,
            band_normal: true,
            band_normal_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyParams {
    pub formulation: Formulation,
    pub beta: f64,
    pub stabilization: Stabilization,
    pub refined_tau: bool,
}

impl Default for AssemblyParams {
    fn default() -> Self {
        AssemblyParams {
            formulation: Formulation::Robust,
            beta: 10.0,
            stabilization: Stabilization::default(),
            refined_tau: false,
        }
    }
}

/// Discrete problem `K u = F` over the blocks `(V_{h,1}, V_{h,2}, V_{h,Γ})`.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: SparseSymmetric,
    pub rhs: Vec<f64>,
    /// The stabilization part `s_h` of `matrix`, kept for norm evaluation.
    pub stabilization: SparseSymmetric,
    pub block_sizes: [usize; 3],
    pub formulation: Formulation,
    pub h: f64,
    pub beta: f64,
    pub gamma: f64,
    pub constrained: bool,
}

impl AssembledSystem {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn with_dirichlet(&self, spec: &DirichletSpec) -> Result<AssembledSystem> {
        let (matrix, rhs) = apply_dirichlet(&self.matrix, &self.rhs, spec)?;
        Ok(AssembledSystem {
            matrix,
            rhs,
            constrained: true,
            ..self.clone()
        })
    }
}

/// Common references used by every assembly routine.
#[derive(Clone, Copy)]
pub struct Context<'a> {
    pub mesh: &'a BackgroundMesh,
    pub interface: &'a Interface,
    pub decomp: &'a ActiveDecomposition,
    pub spaces: &'a SpaceSet,
    pub coeffs: &'a Coefficients,
}

fn side_of(field: Field) -> usize {
    match field {
        Field::Bulk1 => 1,
        Field::Bulk2 => 2,
        Field::Gamma => unreachable!("the fracture field has no bulk side"),
    }
}

/// Quadrature over the part of `element` that belongs to bulk `field`.
pub fn bulk_rule(ctx: &Context, field: Field, element: usize) -> Result<QuadratureRule> {
    match ctx.decomp.cut_cell(element) {
        Some(cell) => polygon_quadrature(cell.polygon(side_of(field))),
        None => Ok(triangle_quadrature(ctx.mesh.vertices(element))),
    }
}

pub fn segment_rule(cell: &CutCell) -> Result<QuadratureRule> {
    segment_quadrature(cell.segment[0], cell.segment[1])
}

fn zeros(n: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; n]; n]
}

/// `(A_i ∇u_i, ∇v_i)_{Ω_i}` for both bulk fields.
pub fn assemble_bulk_stiffness(ctx: &Context) -> Result<TripletBuilder> {
    let mut out = TripletBuilder::new(ctx.spaces.n_dofs());
    for field in [Field::Bulk1, Field::Bulk2] {
        let side = side_of(field);
        for &e in ctx.decomp.elements(field) {
            let el = P1Element::of(ctx.mesh, e);
            let rule = bulk_rule(ctx, field, e)?;
            let mut k = zeros(3);
            for (x, w) in rule.iter() {
                let a = ctx.coeffs.a_bulk(side, x);
                for p in 0..3 {
                    let ag = vec2::mat_vec(&a, el.grads[p]);
                    for q in p..3 {
                        k[p][q] += w * vec2::dot(ag, el.grads[q]);
                    }
                }
            }
            out.add_symmetric_block(&ctx.spaces.element_dofs(ctx.mesh, field, e), &k);
        }
    }
    Ok(out)
}

/// `(A_Γ ∇_Γ u_Γ, ∇_Γ v_Γ)_Γ` with `∇_Γ = (I - n_Γ ⊗ n_Γ) ∇`.
pub fn assemble_interface_stiffness(ctx: &Context) -> Result<TripletBuilder> {
    let mut out = TripletBuilder::new(ctx.spaces.n_dofs());
    for cell in &ctx.decomp.cut_cells {
        let el = P1Element::of(ctx.mesh, cell.element);
        let mut k = zeros(3);
        for (x, w) in segment_rule(cell)?.iter() {
            let t = ctx.interface.tangent(x);
            let a = ctx.coeffs.a_gamma(x);
            // P g = (g·t) t for a curve
            let tg = el.grads.map(|g| vec2::dot(g, t));
            for p in 0..3 {
                for q in p..3 {
                    k[p][q] += w * a * tg[p] * tg[q];
                }
            }
        }
        out.add_symmetric_block(&ctx.spaces.element_dofs(ctx.mesh, Field::Gamma, cell.element), &k);
    }
    Ok(out)
}

/// Local DOFs on a cut element, ordered `[u₁ (3), u₂ (3), u_Γ (3)]`.
fn coupled_dofs(ctx: &Context, element: usize) -> Vec<usize> {
    Field::ALL
        .iter()
        .flat_map(|&f| ctx.spaces.element_dofs(ctx.mesh, f, element))
        .collect()
}

/// Flux and jump functionals at `x` as 9-vectors over [`coupled_dofs`].
struct Functionals {
    flux: [[f64; 9]; 2],
    jump: [[f64; 9]; 2],
}

fn functionals(ctx: &Context, el: &P1Element, x: Point) -> Functionals {
    let n = ctx.interface.normal(x);
    let phi = el.values(x);
    let a1n = vec2::mat_vec(&ctx.coeffs.a_bulk(1, x), n);
    let a2n = vec2::mat_vec(&ctx.coeffs.a_bulk(2, x), n);
    let mut f = Functionals {
        flux: [[0.0; 9]; 2],
        jump: [[0.0; 9]; 2],
    };
    for k in 0..3 {
        // n₁ = n_Γ, n₂ = -n_Γ
        f.flux[0][k] = vec2::dot(a1n, el.grads[k]);
        f.flux[1][3 + k] = -vec2::dot(a2n, el.grads[k]);
        f.jump[0][k] = phi[k];
        f.jump[0][6 + k] = -phi[k];
        f.jump[1][3 + k] = phi[k];
        f.jump[1][6 + k] = -phi[k];
    }
    f
}

/// Add `w Σ_ab m[a][b] (x_a ⊗ y_b)` and, if `mirror`, its transpose.
fn add_outer(k: &mut [Vec<f64>], w: f64, m: &Mat2, x: &[[f64; 9]; 2], y: &[[f64; 9]; 2], mirror: bool) {
    for a in 0..2 {
        for b in 0..2 {
            let c = w * m[a][b];
            if c == 0.0 {
                continue;
            }
            for p in 0..9 {
                if x[a][p] == 0.0 && (!mirror || y[b][p] == 0.0) {
                    continue;
                }
                for q in 0..9 {
                    k[p][q] += c * x[a][p] * y[b][q];
                    if mirror {
                        k[p][q] += c * y[b][p] * x[a][q];
                    }
                }
            }
        }
    }
}

/// Upper triangle of a symmetric local matrix, as expected by
/// [`TripletBuilder::add_symmetric_block`].
fn upper(k: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = k.len();
    let mut u = zeros(n);
    for p in 0..n {
        for q in p..n {
            u[p][q] = 0.5 * (k[p][q] + k[q][p]);
        }
    }
    u
}

/// `(B(u - u_Γ), v - v_Γ)_Γ`.
pub fn assemble_standard_coupling(ctx: &Context) -> Result<TripletBuilder> {
    let mut out = TripletBuilder::new(ctx.spaces.n_dofs());
    for cell in &ctx.decomp.cut_cells {
        let el = P1Element::of(ctx.mesh, cell.element);
        let mut k = zeros(9);
        for (x, w) in segment_rule(cell)?.iter() {
            let b = ctx.coeffs.coupling_at(x)?.b;
            let f = functionals(ctx, &el, x);
            add_outer(&mut k, w, &b, &f.jump, &f.jump, false);
        }
        out.add_symmetric_block(&coupled_dofs(ctx, cell.element), &upper(k));
    }
    Ok(out)
}

/// Sampled interface points and normals (segment quadrature points).
pub fn interface_samples(ctx: &Context) -> Result<Vec<(Point, Point)>> {
    let mut samples = Vec::new();
    for cell in &ctx.decomp.cut_cells {
        for (x, _) in segment_rule(cell)?.iter() {
            samples.push((x, ctx.interface.normal(x)));
        }
    }
    Ok(samples)
}

/// Penalty at `x` for the robust form.
pub fn penalty_at(ctx: &Context, x: Point, h: f64, beta: f64, betas: Option<[f64; 2]>) -> Result<RobustPenalty> {
    let c = ctx.coeffs.coupling_at(x)?;
    match betas {
        Some(b) => RobustPenalty::with_betas(&c, h, beta, b),
        None => RobustPenalty::new(&c, h, beta),
    }
}

/// Per-direction penalty scales for the refined `τ`.
pub fn refined_betas(ctx: &Context, beta: f64) -> Result<[f64; 2]> {
    let samples = interface_samples(ctx)?;
    let a1 = ctx.coeffs.a1.clone();
    let a2 = ctx.coeffs.a2.clone();
    let norms = coupling::flux_norms(|x| a1(x), |x| a2(x), &samples);
    Ok(coupling::refined_betas(beta, norms))
}

/// Interface terms of the robust form:
/// `Fᵀ M_FF F + Fᵀ M_FJ J + F̃ᵀ M_FJ J̃ + Jᵀ τ J` with flux `F` and jump `J`.
pub fn assemble_robust_coupling(ctx: &Context, h: f64, beta: f64, refined_tau: bool) -> Result<TripletBuilder> {
    let betas = if refined_tau {
        Some(refined_betas(ctx, beta)?)
    } else {
        None
    };
    let mut out = TripletBuilder::new(ctx.spaces.n_dofs());
    for cell in &ctx.decomp.cut_cells {
        let el = P1Element::of(ctx.mesh, cell.element);
        let mut k = zeros(9);
        for (x, w) in segment_rule(cell)?.iter() {
            let p = penalty_at(ctx, x, h, beta, betas)?;
            let f = functionals(ctx, &el, x);
            add_outer(&mut k, w, &p.m_ff(), &f.flux, &f.flux, false);
            add_outer(&mut k, w, &p.m_fj(), &f.flux, &f.jump, true);
            add_outer(&mut k, w, &p.m_jj(), &f.jump, &f.jump, false);
        }
        out.add_symmetric_block(&coupled_dofs(ctx, cell.element), &upper(k));
    }
    Ok(out)
}

/// Jump of the normal derivative across `face` as coefficients on the
/// union of the two elements' nodes.
fn face_jump(mesh: &BackgroundMesh, face: &FaceRecord) -> Vec<(usize, f64)> {
    let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(4);
    for (s, &e) in [1.0, -1.0].iter().zip(face.elements.iter()) {
        let el = P1Element::of(mesh, e);
        for (k, &node) in mesh.triangles[e].iter().enumerate() {
            let c = s * vec2::dot(face.normal, el.grads[k]);
            match coeffs.iter_mut().find(|(n, _)| *n == node) {
                Some(entry) => entry.1 += c,
                None => coeffs.push((node, c)),
            }
        }
    }
    coeffs
}

fn add_face_penalty(out: &mut TripletBuilder, ctx: &Context, field: Field, face: &FaceRecord, scale: f64) {
    let jump = face_jump(ctx.mesh, face);
    let dofs: Vec<usize> = jump
        .iter()
        .map(|(n, _)| ctx.spaces.dof(field, *n).expect("ghost face node must be active"))
        .collect();
    let mut k = zeros(dofs.len());
    for p in 0..dofs.len() {
        for q in p..dofs.len() {
            k[p][q] = scale * jump[p].1 * jump[q].1;
        }
    }
    out.add_symmetric_block(&dofs, &k);
}

/// Ghost-penalty stabilization `s_h = s_{h,1} + s_{h,2} + s_{h,Γ}`.
pub fn assemble_ghost_penalty(ctx: &Context, stab: &Stabilization, h: f64) -> Result<TripletBuilder> {
    let mut out = TripletBuilder::new(ctx.spaces.n_dofs());
    if stab.bulk_jumps && stab.gamma != 0.0 {
        for field in [Field::Bulk1, Field::Bulk2] {
            let side = side_of(field);
            for face in ctx.decomp.ghost_faces(field) {
                let p = ctx.mesh.nodes[face.nodes[0]];
                let q = ctx.mesh.nodes[face.nodes[1]];
                let zeta = segment_quadrature(p, q)?
                    .points
                    .iter()
                    .map(|&x| vec2::max_eigenvalue(&ctx.coeffs.a_bulk(side, x)))
                    .fold(0.0, f64::max);
                // h_F ζ (⟦∂ₙv⟧, ⟦∂ₙw⟧)_F with constant jumps
                let scale = stab.gamma * face.length * zeta * face.length;
                add_face_penalty(&mut out, ctx, field, face, scale);
            }
        }
    }
    let zeta_on = |cell: &CutCell| -> Result<f64> {
        Ok(segment_rule(cell)?
            .points
            .iter()
            .map(|&x| ctx.coeffs.a_gamma(x))
            .fold(0.0, f64::max))
    };
    if stab.band_jumps && stab.gamma != 0.0 {
        for face in &ctx.decomp.f_gamma {
            let mut zeta = 0.0f64;
            for &e in &face.elements {
                if let Some(cell) = ctx.decomp.cut_cell(e) {
                    zeta = zeta.max(zeta_on(cell)?);
                }
            }
            let scale = stab.gamma * face.length * zeta * face.length;
            add_face_penalty(&mut out, ctx, Field::Gamma, face, scale);
        }
    }
    let normal_scale = stab.band_normal_scale;
    if stab.band_normal && normal_scale != 0.0 {
        for cell in &ctx.decomp.cut_cells {
            let el = P1Element::of(ctx.mesh, cell.element);
            let zeta = zeta_on(cell)?;
            let mut k = zeros(3);
            for (x, w) in segment_rule(cell)?.iter() {
                let n = ctx.interface.normal(x);
                let ng = el.grads.map(|g| vec2::dot(n, g));
                for p in 0..3 {
                    for q in p..3 {
                        k[p][q] += normal_scale * h * h * zeta * w * ng[p] * ng[q];
                    }
                }
            }
            out.add_symmetric_block(&ctx.spaces.element_dofs(ctx.mesh, Field::Gamma, cell.element), &k);
        }
    }
    Ok(out)
}

/// `L(v) = Σ (f_i, v_i)_{Ω_i} + (f_Γ, v_Γ)_Γ`.
pub fn assemble_load(ctx: &Context) -> Result<Vec<f64>> {
    let mut rhs = vec![0.0; ctx.spaces.n_dofs()];
    for field in [Field::Bulk1, Field::Bulk2] {
        let side = side_of(field);
        for &e in ctx.decomp.elements(field) {
            let el = P1Element::of(ctx.mesh, e);
            let dofs = ctx.spaces.element_dofs(ctx.mesh, field, e);
            for (x, w) in bulk_rule(ctx, field, e)?.iter() {
                let f = ctx.coeffs.f_bulk(side, x);
                let phi = el.values(x);
                for k in 0..3 {
                    rhs[dofs[k]] += w * f * phi[k];
                }
            }
        }
    }
    for cell in &ctx.decomp.cut_cells {
        let el = P1Element::of(ctx.mesh, cell.element);
        let dofs = ctx.spaces.element_dofs(ctx.mesh, Field::Gamma, cell.element);
        for (x, w) in segment_rule(cell)?.iter() {
            let f = ctx.coeffs.source_gamma(x);
            let phi = el.values(x);
            for k in 0..3 {
                rhs[dofs[k]] += w * f * phi[k];
            }
        }
    }
    Ok(rhs)
}

/// Full unconstrained system for the chosen formulation.
pub fn assemble_system(ctx: &Context, params: &AssemblyParams) -> Result<AssembledSystem> {
    if !(params.beta > 0.0) {
        return Err(Error::Config(format!("beta must be positive, got {}", params.beta)));
    }
    let stab = &params.stabilization;
    if !(stab.gamma >= 0.0) || !(stab.band_normal_scale >= 0.0) {
        return Err(Error::Config(format!(
            "stabilization scales must be non-negative, got gamma {} and band normal scale {}",
            stab.gamma, stab.band_normal_scale
        )));
    }
    let h = ctx.mesh.h;
    let mut k = assemble_bulk_stiffness(ctx)?;
    k.append(assemble_interface_stiffness(ctx)?);
    match params.formulation {
        Formulation::Standard => k.append(assemble_standard_coupling(ctx)?),
        Formulation::Robust => k.append(assemble_robust_coupling(ctx, h, params.beta, params.refined_tau)?),
    }
    let stab = assemble_ghost_penalty(ctx, &params.stabilization, h)?;
    let stabilization = stab.clone().build();
    k.append(stab);
    Ok(AssembledSystem {
        matrix: k.build(),
        rhs: assemble_load(ctx)?,
        stabilization,
        block_sizes: Field::ALL.map(|f| ctx.spaces.count(f)),
        formulation: params.formulation,
        h,
        beta: params.beta,
        gamma: params.stabilization.gamma,
        constrained: false,
    })
}
