//! Structured triangular background mesh.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::vec2::{self, Point};

/// Axis-aligned rectangle `(xmin, ymin, xmax, ymax)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl BoundingBox {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        BoundingBox {
            xmin,
            ymin,
            xmax,
            ymax,
        }
    }

    pub fn unit_square() -> Self {
        Self::new(0.0, 0.0, 1.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    fn is_valid(&self) -> bool {
        [self.xmin, self.ymin, self.xmax, self.ymax]
            .iter()
            .all(|v| v.is_finite())
            && self.width() > 0.0
            && self.height() > 0.0
    }
}

/// Side of the bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];
}

/// An edge of the triangulation with one (boundary) or two (interior)
/// adjacent triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Node indices, lower index first.
    pub nodes: [usize; 2],
    /// Adjacent triangles, lower index first.
    pub elements: [usize; 2],
    pub n_elements: usize,
}

impl Face {
    pub fn is_interior(&self) -> bool {
        self.n_elements == 2
    }
}

/// Interior face data used by the face-jump stabilization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceRecord {
    pub index: usize,
    pub length: f64,
    /// Unit normal pointing from `elements[0]` into `elements[1]`.
    pub normal: Point,
    /// Adjacent elements, lower index first.
    pub elements: [usize; 2],
    pub nodes: [usize; 2],
}

/// Structured background triangulation of a rectangle.
///
/// Each of the `nx × ny` grid cells is split into two triangles by the
/// diagonal from its lower-left to its upper-right corner. Node `(i, j)` has
/// index `j * (nx + 1) + i`; cell `(i, j)` owns triangles `2 * (j * nx + i)`
/// (lower-right) and `2 * (j * nx + i) + 1` (upper-left).
#[derive(Debug, Clone)]
pub struct BackgroundMesh {
    pub nodes: Vec<Point>,
    /// Counter-clockwise node triples.
    pub triangles: Vec<[usize; 3]>,
    pub faces: Vec<Face>,
    pub bbox: BoundingBox,
    pub nx: usize,
    pub ny: usize,
    /// Longest edge length.
    pub h: f64,
    element_faces: Vec<[usize; 3]>,
}

impl BackgroundMesh {
    pub fn build(nx: usize, ny: usize, bbox: BoundingBox) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Config(format!(
                "mesh needs at least one cell per direction, got nx={nx}, ny={ny}"
            )));
        }
        if !bbox.is_valid() {
            return Err(Error::Config(format!("degenerate bounding box {bbox:?}")));
        }
        let dx = bbox.width() / nx as f64;
        let dy = bbox.height() / ny as f64;

        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            // pin the last row/column to the box to avoid drift
            let y = if j == ny { bbox.ymax } else { bbox.ymin + j as f64 * dy };
            for i in 0..=nx {
                let x = if i == nx { bbox.xmax } else { bbox.xmin + i as f64 * dx };
                nodes.push([x, y]);
            }
        }

        let node = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let a = node(i, j);
                let b = node(i + 1, j);
                let c = node(i + 1, j + 1);
                let d = node(i, j + 1);
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut element_faces = vec![[0usize; 3]; triangles.len()];
        for (e, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (p, q) = (tri[k], tri[(k + 1) % 3]);
                let key = (p.min(q), p.max(q));
                let f = *lookup.entry(key).or_insert_with(|| {
                    faces.push(Face {
                        nodes: [key.0, key.1],
                        elements: [e, usize::MAX],
                        n_elements: 0,
                    });
                    faces.len() - 1
                });
                let face = &mut faces[f];
                face.elements[face.n_elements] = e;
                face.n_elements += 1;
                element_faces[e][k] = f;
            }
        }

        let h = triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(p, q)| vec2::dist(nodes[p], nodes[q]))
            .fold(0.0, f64::max);

        Ok(BackgroundMesh {
            nodes,
            triangles,
            faces,
            bbox,
            nx,
            ny,
            h,
            element_faces,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self, element: usize) -> [Point; 3] {
        let t = self.triangles[element];
        [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]]
    }

    /// Faces of `element`, face `k` joining local vertices `k` and `k + 1`.
    pub fn element_faces(&self, element: usize) -> [usize; 3] {
        self.element_faces[element]
    }

    pub fn area(&self, element: usize) -> f64 {
        let [a, b, c] = self.vertices(element);
        vec2::signed_area(a, b, c)
    }

    /// Interior faces with length, unit normal and adjacent elements.
    pub fn interior_faces(&self) -> Vec<FaceRecord> {
        self.faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_interior())
            .map(|(index, f)| self.face_record(index, f))
            .collect()
    }

    pub fn face_record(&self, index: usize, face: &Face) -> FaceRecord {
        let p = self.nodes[face.nodes[0]];
        let q = self.nodes[face.nodes[1]];
        let length = vec2::dist(p, q);
        let t = vec2::scale(vec2::sub(q, p), 1.0 / length);
        let mut normal = [t[1], -t[0]];
        // orient from the first element towards the second
        let c0 = self.centroid(face.elements[0]);
        if vec2::dot(normal, vec2::sub(p, c0)) < 0.0 {
            normal = vec2::scale(normal, -1.0);
        }
        FaceRecord {
            index,
            length,
            normal,
            elements: face.elements,
            nodes: face.nodes,
        }
    }

    pub fn centroid(&self, element: usize) -> Point {
        let [a, b, c] = self.vertices(element);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn boundary_face_count(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_interior()).count()
    }

    /// Longest over shortest edge length.
    pub fn quasi_uniformity(&self) -> f64 {
        let mut min = f64::INFINITY;
        for f in &self.faces {
            min = min.min(vec2::dist(self.nodes[f.nodes[0]], self.nodes[f.nodes[1]]));
        }
        self.h / min
    }

    /// Whether node `n` lies on the given side of the box.
    pub fn on_side(&self, n: usize, side: Side) -> bool {
        let nx = self.nx + 1;
        let (i, j) = (n % nx, n / nx);
        match side {
            Side::Left => i == 0,
            Side::Right => i == self.nx,
            Side::Bottom => j == 0,
            Side::Top => j == self.ny,
        }
    }

    pub fn on_boundary(&self, n: usize) -> bool {
        Side::ALL.iter().any(|&s| self.on_side(n, s))
    }
}
