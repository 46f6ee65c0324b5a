//! Active meshes, restricted P1 spaces, basis evaluation and Dirichlet
//! constraints.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::vec2::{self, Point};
use crate::geometry::{classify_element, cut_triangle, CutCell, ElementClass, Interface};
use crate::linalg::{SparseSymmetric, TripletBuilder};
use crate::mesh::{BackgroundMesh, FaceRecord};

/// The three discrete fields, in block order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Bulk1,
    Bulk2,
    Gamma,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::Bulk1, Field::Bulk2, Field::Gamma];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::Bulk1 => "u1",
            Field::Bulk2 => "u2",
            Field::Gamma => "uGamma",
        }
    }
}

/// Element and face sets induced by the interface on the background mesh.
#[derive(Debug, Clone)]
pub struct ActiveDecomposition {
    /// Per-element class after degenerate cuts were resolved.
    pub classes: Vec<ElementClass>,
    pub t1: Vec<usize>,
    pub t2: Vec<usize>,
    pub t_gamma: Vec<usize>,
    /// Cut geometry, one per element of `t_gamma` and in the same order.
    pub cut_cells: Vec<CutCell>,
    cut_index: Vec<Option<usize>>,
    /// Interior faces of `T_{h,1}` next to a cut element.
    pub f1: Vec<FaceRecord>,
    /// Interior faces of `T_{h,2}` next to a cut element.
    pub f2: Vec<FaceRecord>,
    /// Interior faces of `T_{h,Γ}`.
    pub f_gamma: Vec<FaceRecord>,
}

impl ActiveDecomposition {
    pub fn build(mesh: &BackgroundMesh, interface: &Interface) -> Result<Self> {
        let h = mesh.h;
        let n = mesh.n_elements();
        let mut classes = Vec::with_capacity(n);
        let mut cut_cells = Vec::new();
        let mut cut_index = vec![None; n];
        for e in 0..n {
            let tri = mesh.vertices(e);
            let mut class = classify_element(interface, &tri, h);
            if class == ElementClass::Cut {
                match cut_triangle(interface, e, &tri, h)? {
                    Some(cell) => {
                        cut_index[e] = Some(cut_cells.len());
                        cut_cells.push(cell);
                    }
                    None => {
                        // touches Γ in a single point: side of the other vertices
                        let any_side1 = tri.iter().any(|&p| {
                            crate::geometry::cut::snap(interface.level_set(p), h) < 0.0
                        });
                        class = if any_side1 {
                            ElementClass::Inside1
                        } else {
                            ElementClass::Inside2
                        };
                    }
                }
            }
            classes.push(class);
        }
        if cut_cells.is_empty() {
            return Err(Error::Geometry(format!(
                "interface {} does not cut the mesh",
                interface.describe()
            )));
        }

        let pick = |f: &dyn Fn(ElementClass) -> bool| -> Vec<usize> {
            (0..n).filter(|&e| f(classes[e])).collect()
        };
        let t1 = pick(&|c| c != ElementClass::Inside2);
        let t2 = pick(&|c| c != ElementClass::Inside1);
        let t_gamma = pick(&|c| c == ElementClass::Cut);

        let in1 = |e: usize| classes[e] != ElementClass::Inside2;
        let in2 = |e: usize| classes[e] != ElementClass::Inside1;
        let cut = |e: usize| classes[e] == ElementClass::Cut;
        let mut f1 = Vec::new();
        let mut f2 = Vec::new();
        let mut f_gamma = Vec::new();
        for rec in mesh.interior_faces() {
            let [a, b] = rec.elements;
            let touches_cut = cut(a) || cut(b);
            if touches_cut && in1(a) && in1(b) {
                f1.push(rec);
            }
            if touches_cut && in2(a) && in2(b) {
                f2.push(rec);
            }
            if cut(a) && cut(b) {
                f_gamma.push(rec);
            }
        }

        Ok(ActiveDecomposition {
            classes,
            t1,
            t2,
            t_gamma,
            cut_cells,
            cut_index,
            f1,
            f2,
            f_gamma,
        })
    }

    pub fn cut_cell(&self, element: usize) -> Option<&CutCell> {
        self.cut_index[element].map(|k| &self.cut_cells[k])
    }

    pub fn elements(&self, field: Field) -> &[usize] {
        match field {
            Field::Bulk1 => &self.t1,
            Field::Bulk2 => &self.t2,
            Field::Gamma => &self.t_gamma,
        }
    }

    pub fn ghost_faces(&self, field: Field) -> &[FaceRecord] {
        match field {
            Field::Bulk1 => &self.f1,
            Field::Bulk2 => &self.f2,
            Field::Gamma => &self.f_gamma,
        }
    }

    /// Total chord length of the discrete interface.
    pub fn interface_length(&self) -> f64 {
        self.cut_cells.iter().map(|c| c.segment_length()).sum()
    }

    /// Area of the discrete subdomain `Ω₁` (`side = 1`) or `Ω₂` (`side = 2`).
    pub fn subdomain_area(&self, mesh: &BackgroundMesh, side: usize) -> f64 {
        let whole = if side == 1 {
            ElementClass::Inside1
        } else {
            ElementClass::Inside2
        };
        let mut area = 0.0;
        for (e, &c) in self.classes.iter().enumerate() {
            if c == whole {
                area += mesh.area(e);
            } else if let Some(cell) = self.cut_cell(e) {
                area += vec2::polygon_area(cell.polygon(side));
            }
        }
        area
    }
}

/// Degree-of-freedom layout for `V_{h,1} ⊕ V_{h,2} ⊕ V_{h,Γ}`.
#[derive(Debug, Clone)]
pub struct SpaceSet {
    dof_maps: [Vec<Option<usize>>; 3],
    counts: [usize; 3],
    offsets: [usize; 3],
}

impl SpaceSet {
    pub fn build(decomp: &ActiveDecomposition, mesh: &BackgroundMesh) -> Self {
        let mut dof_maps: [Vec<Option<usize>>; 3] = Default::default();
        let mut counts = [0usize; 3];
        let mut offsets = [0usize; 3];
        let mut next = 0usize;
        for field in Field::ALL {
            let mut active = vec![false; mesh.n_nodes()];
            for &e in decomp.elements(field) {
                for n in mesh.triangles[e] {
                    active[n] = true;
                }
            }
            offsets[field.index()] = next;
            let map: Vec<Option<usize>> = active
                .iter()
                .map(|&a| {
                    if a {
                        next += 1;
                        Some(next - 1)
                    } else {
                        None
                    }
                })
                .collect();
            counts[field.index()] = next - offsets[field.index()];
            dof_maps[field.index()] = map;
        }
        SpaceSet {
            dof_maps,
            counts,
            offsets,
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn count(&self, field: Field) -> usize {
        self.counts[field.index()]
    }

    pub fn offset(&self, field: Field) -> usize {
        self.offsets[field.index()]
    }

    pub fn dof(&self, field: Field, node: usize) -> Option<usize> {
        self.dof_maps[field.index()][node]
    }

    /// Global DOFs of the three vertices of an element active for `field`.
    pub fn element_dofs(&self, mesh: &BackgroundMesh, field: Field, element: usize) -> [usize; 3] {
        mesh.triangles[element].map(|n| {
            self.dof(field, n)
                .unwrap_or_else(|| panic!("node {n} not active for {field:?}"))
        })
    }

    /// `(node, dof)` pairs of the active nodes of `field`, in node order.
    pub fn active_nodes(&self, field: Field) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.dof_maps[field.index()]
            .iter()
            .enumerate()
            .filter_map(|(n, d)| d.map(|d| (n, d)))
    }

    /// Nodal values of `field` from a global vector, `None` for inactive nodes.
    pub fn nodal_values(&self, field: Field, x: &[f64]) -> Vec<Option<f64>> {
        self.dof_maps[field.index()]
            .iter()
            .map(|d| d.map(|d| x[d]))
            .collect()
    }
}

/// Linear Lagrange element on one background triangle.
#[derive(Debug, Clone, Copy)]
pub struct P1Element {
    pub vertices: [Point; 3],
    pub area: f64,
    /// Constant gradients of the three barycentric basis functions.
    pub grads: [Point; 3],
}

impl P1Element {
    pub fn new(vertices: [Point; 3]) -> Self {
        let [a, b, c] = vertices;
        let area = vec2::signed_area(a, b, c);
        let inv = 1.0 / (2.0 * area);
        // ∇λ_k is the inward normal of the opposite edge scaled by its length
        let grad = |p: Point, q: Point| [(p[1] - q[1]) * inv, (q[0] - p[0]) * inv];
        P1Element {
            vertices,
            area,
            grads: [grad(b, c), grad(c, a), grad(a, b)],
        }
    }

    pub fn of(mesh: &BackgroundMesh, element: usize) -> Self {
        Self::new(mesh.vertices(element))
    }

    pub fn values(&self, p: Point) -> [f64; 3] {
        let [a, b, c] = self.vertices;
        let l0 = vec2::signed_area(p, b, c) / self.area;
        let l1 = vec2::signed_area(a, p, c) / self.area;
        [l0, l1, 1.0 - l0 - l1]
    }

    /// Gradient of the interpolant with nodal values `u`.
    pub fn gradient(&self, u: [f64; 3]) -> Point {
        let mut g = [0.0; 2];
        for k in 0..3 {
            g = vec2::add(g, vec2::scale(self.grads[k], u[k]));
        }
        g
    }

    pub fn interpolate(&self, u: [f64; 3], p: Point) -> f64 {
        let v = self.values(p);
        v[0] * u[0] + v[1] * u[1] + v[2] * u[2]
    }
}

/// Basis values and gradients of `element` at `point`.
pub fn eval_basis(
    mesh: &BackgroundMesh,
    element: usize,
    point: Point,
) -> Result<([f64; 3], [Point; 3])> {
    let el = P1Element::of(mesh, element);
    let values = el.values(point);
    if values.iter().any(|&v| v < -1e-10) {
        return Err(Error::Geometry(format!(
            "point {point:?} lies outside element {element}"
        )));
    }
    Ok((values, el.grads))
}

/// Prescribed values on a set of global DOFs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirichletSpec {
    values: BTreeMap<usize, f64>,
}

impl DirichletSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constrain(&mut self, dof: usize, value: f64) -> Result<()> {
        if let Some(&old) = self.values.get(&dof) {
            if old != value {
                return Err(Error::Config(format!(
                    "dof {dof} constrained to both {old} and {value}"
                )));
            }
        }
        self.values.insert(dof, value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, dof: usize) -> Option<f64> {
        self.values.get(&dof).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&d, &v)| (d, v))
    }
}

/// Symmetric elimination of constrained DOFs: their couplings are moved to
/// the right-hand side and their rows/columns replaced by the identity.
pub fn apply_dirichlet(
    matrix: &SparseSymmetric,
    rhs: &[f64],
    spec: &DirichletSpec,
) -> Result<(SparseSymmetric, Vec<f64>)> {
    let n = matrix.dim();
    if let Some((d, _)) = spec.iter().find(|&(d, _)| d >= n) {
        return Err(Error::Config(format!("constrained dof {d} out of range {n}")));
    }
    let mut fixed = vec![None; n];
    for (d, v) in spec.iter() {
        fixed[d] = Some(v);
    }
    let mut b = TripletBuilder::new(n);
    let mut out_rhs = rhs.to_vec();
    for i in 0..n {
        if let Some(g) = fixed[i] {
            b.add(i, i, 1.0);
            out_rhs[i] = g;
            continue;
        }
        for (j, v) in matrix.row(i) {
            match fixed[j] {
                Some(g) => out_rhs[i] -= v * g,
                None => b.add(i, j, v),
            }
        }
    }
    Ok((b.build(), out_rhs))
}
