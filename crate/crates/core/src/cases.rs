//! Reference problems: a manufactured solution, a crack with a low-permeability
//! section, and a curved crack separating two materials.

use std::fmt;
use std::sync::Arc;

use crate::assembly::{constant, isotropic, Coefficients, InterfaceModel, ScalarFn, Stabilization};
use crate::error::{Error, Result};
use crate::geometry::vec2::{self, Point};
use crate::geometry::Interface;
use crate::mesh::{BoundingBox, Side};

pub type VectorFn = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// Prescribed value on one side of the bounding box.
#[derive(Clone)]
pub struct BoundaryValue {
    pub side: Side,
    pub value: ScalarFn,
}

impl BoundaryValue {
    pub fn new(side: Side, value: ScalarFn) -> Self {
        BoundaryValue { side, value }
    }
}

impl fmt::Debug for BoundaryValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundaryValue({:?})", self.side)
    }
}

/// Exact fields. `grad_gamma` is the gradient of an extension of `u_Γ`;
/// only its tangential part is used.
#[derive(Clone)]
pub struct ExactSolution {
    pub u1: ScalarFn,
    pub u2: ScalarFn,
    pub grad1: VectorFn,
    pub grad2: VectorFn,
    pub u_gamma: ScalarFn,
    pub grad_gamma: VectorFn,
}

impl ExactSolution {
    pub fn bulk(&self, side: usize, x: Point) -> f64 {
        if side == 1 {
            (self.u1)(x)
        } else {
            (self.u2)(x)
        }
    }

    pub fn bulk_gradient(&self, side: usize, x: Point) -> Point {
        if side == 1 {
            (self.grad1)(x)
        } else {
            (self.grad2)(x)
        }
    }
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ExactSolution")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseId {
    Manufactured,
    LowPermeabilityCrack,
    QuarterCircle,
}

impl CaseId {
    pub fn number(self) -> u8 {
        match self {
            CaseId::Manufactured => 1,
            CaseId::LowPermeabilityCrack => 2,
            CaseId::QuarterCircle => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(CaseId::Manufactured),
            2 => Ok(CaseId::LowPermeabilityCrack),
            3 => Ok(CaseId::QuarterCircle),
            _ => Err(Error::Config(format!("unknown case {n}, expected 1, 2 or 3"))),
        }
    }
}

/// Complete declarative description of a problem.
#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub id: CaseId,
    pub name: String,
    pub bbox: BoundingBox,
    pub interface: Interface,
    pub coeffs: Coefficients,
    pub bulk_dirichlet: Vec<BoundaryValue>,
    /// Values for fracture nodes on `∂Ω`.
    pub band_dirichlet: Vec<BoundaryValue>,
    pub stabilization: Stabilization,
    pub beta: f64,
    pub exact: Option<ExactSolution>,
    /// Default mesh resolution along x.
    pub default_nx: usize,
    /// Geometric choices not fixed by the problem statement.
    pub assumptions: Vec<String>,
}

fn manufactured_u(p: Point) -> f64 {
    let [x, y] = p;
    x * (1.0 - x) * y * (1.0 - y)
}

fn manufactured_grad(p: Point) -> Point {
    let [x, y] = p;
    [(1.0 - 2.0 * x) * y * (1.0 - y), x * (1.0 - x) * (1.0 - 2.0 * y)]
}

/// Unit square cut at `x = 1/2` with exact solution `u = x(1-x)y(1-y)` in
/// both subdomains and `u_Γ = y(1-y)/4`, independent of the coupling.
pub fn case_manufactured() -> CaseSpec {
    let zero = constant(0.0);
    let f: ScalarFn = Arc::new(|[x, y]: Point| 2.0 * x * (1.0 - x) + 2.0 * y * (1.0 - y));
    let all_sides = |v: &ScalarFn| Side::ALL.iter().map(|&s| BoundaryValue::new(s, v.clone())).collect::<Vec<_>>();
    CaseSpec {
        id: CaseId::Manufactured,
        name: "manufactured".into(),
        bbox: BoundingBox::unit_square(),
        interface: Interface::vertical_line(0.5),
        coeffs: Coefficients {
            a1: isotropic(1.0),
            a2: isotropic(1.0),
            f1: f.clone(),
            f2: f,
            f_gamma: constant(0.5),
            model: InterfaceModel::Direct {
                a_gamma: constant(1.0),
                alpha: 1.0,
                xi: 1.0,
            },
        },
        bulk_dirichlet: all_sides(&zero),
        band_dirichlet: all_sides(&zero),
        stabilization: Stabilization::default(),
        beta: 10.0,
        exact: Some(ExactSolution {
            u1: Arc::new(manufactured_u),
            u2: Arc::new(manufactured_u),
            grad1: Arc::new(manufactured_grad),
            grad2: Arc::new(manufactured_grad),
            u_gamma: Arc::new(|[_, y]: Point| y * (1.0 - y) / 4.0),
            grad_gamma: Arc::new(|[_, y]: Point| [0.0, (1.0 - 2.0 * y) / 4.0]),
        }),
        default_nx: 23,
        assumptions: Vec::new(),
    }
}

pub const MJR_THICKNESS: f64 = 0.01;
pub const MJR_LOW_PERMEABILITY: f64 = 2e-3;

/// Fracture permeability of the low-permeability crack case.
pub fn mjr_permeability(p: Point) -> f64 {
    if p[1] > 0.25 && p[1] < 0.75 {
        MJR_LOW_PERMEABILITY
    } else {
        1.0
    }
}

/// `(0,2)×(0,1)` with a vertical crack whose middle half has low
/// permeability; pressure 0 on the left, 1 on the right.
pub fn case_mjr(gamma: f64) -> Result<CaseSpec> {
    case_mjr_at(gamma, 1.0)
}

pub fn case_mjr_at(gamma: f64, crack_x: f64) -> Result<CaseSpec> {
    if !(gamma >= 0.0) {
        return Err(Error::Config(format!("gamma must be non-negative, got {gamma}")));
    }
    if !(crack_x > 0.0 && crack_x < 2.0) {
        return Err(Error::Config(format!("crack_x must lie in (0, 2), got {crack_x}")));
    }
    Ok(CaseSpec {
        id: CaseId::LowPermeabilityCrack,
        name: "low-permeability crack".into(),
        bbox: BoundingBox::new(0.0, 0.0, 2.0, 1.0),
        interface: Interface::vertical_line(crack_x),
        coeffs: Coefficients {
            a1: isotropic(1.0),
            a2: isotropic(1.0),
            f1: constant(0.0),
            f2: constant(0.0),
            f_gamma: constant(0.0),
            model: InterfaceModel::Thickness {
                permeability: Arc::new(mjr_permeability),
                d: MJR_THICKNESS,
                xi: 1.0,
                scale_source: true,
            },
        },
        bulk_dirichlet: vec![
            BoundaryValue::new(Side::Left, constant(0.0)),
            BoundaryValue::new(Side::Right, constant(1.0)),
        ],
        band_dirichlet: Vec::new(),
        stabilization: Stabilization {
            gamma,
            ..Stabilization::default()
        },
        beta: 10.0,
        exact: None,
        default_nx: 41,
        assumptions: vec![format!("crack at x = {crack_x}"), "xi = 1".into()],
    })
}

pub const ARC_PERMEABILITY: f64 = 0.1;

/// Unit square with a quarter-circle crack around the origin; the inner
/// material is five times more permeable. Pressure 1 at `x = 1`, 0 at `x = 0`.
pub fn case_quarter_circle(d: f64) -> Result<CaseSpec> {
    case_quarter_circle_with(d, [0.0, 0.0], 0.75)
}

pub fn case_quarter_circle_with(d: f64, center: Point, radius: f64) -> Result<CaseSpec> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Config(format!("crack thickness d must be positive, got {d}")));
    }
    if !(radius > 0.0) {
        return Err(Error::Config(format!("arc radius must be positive, got {radius}")));
    }
    let one = constant(1.0);
    let zero = constant(0.0);
    let dirichlet = vec![
        BoundaryValue::new(Side::Right, one),
        BoundaryValue::new(Side::Left, zero),
    ];
    Ok(CaseSpec {
        id: CaseId::QuarterCircle,
        name: "quarter circle".into(),
        bbox: BoundingBox::unit_square(),
        interface: Interface::circle(center, radius),
        coeffs: Coefficients {
            a1: isotropic(5.0),
            a2: isotropic(1.0),
            f1: constant(0.0),
            f2: constant(0.0),
            f_gamma: constant(0.0),
            model: InterfaceModel::Thickness {
                permeability: constant(ARC_PERMEABILITY),
                d,
                xi: 1.0,
                scale_source: true,
            },
        },
        bulk_dirichlet: dirichlet.clone(),
        band_dirichlet: dirichlet,
        stabilization: Stabilization::default(),
        beta: 10.0,
        exact: None,
        default_nx: 41,
        assumptions: vec![
            format!("arc center ({}, {}), radius {radius}", center[0], center[1]),
            "xi = 1".into(),
        ],
    })
}

pub fn case_by_id(id: CaseId) -> Result<CaseSpec> {
    match id {
        CaseId::Manufactured => Ok(case_manufactured()),
        CaseId::LowPermeabilityCrack => case_mjr(1.0),
        CaseId::QuarterCircle => case_quarter_circle(MJR_THICKNESS),
    }
}

impl CaseSpec {
    /// Replace a constant coupling `(α, ξ)`. Thickness-driven cases only
    /// accept a new `ξ`.
    pub fn with_coupling(mut self, alpha: Option<f64>, xi: Option<f64>) -> Result<Self> {
        match &mut self.coeffs.model {
            InterfaceModel::Direct { alpha: a, xi: x, .. } => {
                if let Some(v) = alpha {
                    *a = v;
                }
                if let Some(v) = xi {
                    *x = v;
                }
            }
            InterfaceModel::Thickness { xi: x, .. } => {
                if alpha.is_some() {
                    return Err(Error::Config(
                        "alpha is derived from the crack thickness in this case; set d instead".into(),
                    ));
                }
                if let Some(v) = xi {
                    *x = v;
                }
            }
        }
        // validate eagerly
        self.coeffs.coupling_at(self.bbox_center())?;
        Ok(self)
    }

    pub fn with_thickness(mut self, d: f64) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Config(format!("crack thickness d must be positive, got {d}")));
        }
        match &mut self.coeffs.model {
            InterfaceModel::Thickness { d: t, .. } => {
                *t = d;
                Ok(self)
            }
            InterfaceModel::Direct { .. } => Err(Error::Config(
                "this case has no crack thickness; set alpha and xi instead".into(),
            )),
        }
    }

    pub fn thickness(&self) -> Option<f64> {
        match self.coeffs.model {
            InterfaceModel::Thickness { d, .. } => Some(d),
            InterfaceModel::Direct { .. } => None,
        }
    }

    fn bbox_center(&self) -> Point {
        [
            0.5 * (self.bbox.xmin + self.bbox.xmax),
            0.5 * (self.bbox.ymin + self.bbox.ymax),
        ]
    }

    /// Number of cells along y giving roughly square cells for `nx`.
    pub fn ny_for(&self, nx: usize) -> usize {
        ((nx as f64) * self.bbox.height() / self.bbox.width()).round().max(1.0) as usize
    }

    /// Largest strong-form residual of the exact fields, over `n` points per
    /// equation. Second derivatives are taken by central differences.
    pub fn exact_residual(&self, n: usize) -> Option<f64> {
        let exact = self.exact.as_ref()?;
        let step = 1e-3 * self.bbox.width().min(self.bbox.height());
        let mut worst = 0.0f64;
        for k in 0..n {
            let p = halton(k + 1);
            let x = [
                self.bbox.xmin + p[0] * self.bbox.width(),
                self.bbox.ymin + p[1] * self.bbox.height(),
            ];
            let side = if self.interface.level_set(x) < 0.0 { 1 } else { 2 };
            let div = divergence(
                |q| vec2::mat_vec(&self.coeffs.a_bulk(side, q), exact.bulk_gradient(side, q)),
                x,
                step,
            );
            worst = worst.max((-div - self.coeffs.f_bulk(side, x)).abs());
        }
        for s in curve_samples(&self.interface, &self.bbox, n) {
            let n_gamma = self.interface.normal(s);
            let t = self.interface.tangent(s);
            let flux_t = |q: Point| {
                let g = (exact.grad_gamma)(q);
                self.coeffs.a_gamma(q) * vec2::dot(g, self.interface.tangent(q))
            };
            // -d/ds (A_Γ ∂ₛu_Γ) for curves parametrised by arc length
            let along = |sgn: f64| {
                let q = vec2::add(s, vec2::scale(t, sgn * step));
                let r = project(&self.interface, q);
                flux_t(r)
            };
            let lap = (along(1.0) - along(-1.0)) / (2.0 * step);
            let flux1 = vec2::dot(n_gamma, vec2::mat_vec(&self.coeffs.a_bulk(1, s), exact.bulk_gradient(1, s)));
            let flux2 = -vec2::dot(n_gamma, vec2::mat_vec(&self.coeffs.a_bulk(2, s), exact.bulk_gradient(2, s)));
            let fracture = -lap + flux1 + flux2 - self.coeffs.source_gamma(s);
            worst = worst.max(fracture.abs());
            let c = self.coeffs.coupling_at(s).ok()?;
            let jump = [
                exact.bulk(1, s) - (exact.u_gamma)(s),
                exact.bulk(2, s) - (exact.u_gamma)(s),
            ];
            let bj = vec2::mat_vec(&c.b, jump);
            worst = worst.max((flux1 + bj[0]).abs()).max((flux2 + bj[1]).abs());
        }
        Some(worst)
    }
}

fn divergence(field: impl Fn(Point) -> Point, x: Point, step: f64) -> f64 {
    let dx = (field([x[0] + step, x[1]])[0] - field([x[0] - step, x[1]])[0]) / (2.0 * step);
    let dy = (field([x[0], x[1] + step])[1] - field([x[0], x[1] - step])[1]) / (2.0 * step);
    dx + dy
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Low-discrepancy point in the unit square.
fn halton(i: usize) -> Point {
    [radical_inverse(i, 2), radical_inverse(i, 3)]
}

fn project(interface: &Interface, q: Point) -> Point {
    let phi = interface.level_set(q);
    vec2::sub(q, vec2::scale(interface.normal(q), phi))
}

/// Points on the interface strictly inside the box.
fn curve_samples(interface: &Interface, bbox: &BoundingBox, n: usize) -> Vec<Point> {
    use crate::geometry::InterfaceShape;
    let margin = 0.05;
    (0..n)
        .map(|k| {
            let t = margin + (1.0 - 2.0 * margin) * radical_inverse(k + 1, 2);
            match interface.shape {
                InterfaceShape::VerticalLine { x0, .. } => [x0, bbox.ymin + t * bbox.height()],
                InterfaceShape::Circle { center, radius } => {
                    let theta = t * std::f64::consts::FRAC_PI_2;
                    [center[0] + radius * theta.cos(), center[1] + radius * theta.sin()]
                }
            }
        })
        .collect()
}
