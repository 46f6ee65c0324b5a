//! Quadrature on triangles, cut polygons and interface chords.

use super::vec2::{self, Point};
use crate::error::{Error, Result};

/// Polynomial degree integrated exactly by [`polygon_quadrature`].
pub const POLYGON_DEGREE: usize = 4;
/// Polynomial degree integrated exactly by [`segment_quadrature`].
pub const SEGMENT_DEGREE: usize = 5;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.iter().map(|(p, w)| w * f(p)).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

// Symmetric 6-point rule of degree 4 (barycentric coordinate, weight),
// digits as tabulated.
#[allow(clippy::excessive_precision)]
const TRI_A1: f64 = 0.445_948_490_915_964_886;
#[allow(clippy::excessive_precision)]
const TRI_W1: f64 = 0.223_381_589_678_011_466;
#[allow(clippy::excessive_precision)]
const TRI_A2: f64 = 0.091_576_213_509_770_743;
#[allow(clippy::excessive_precision)]
const TRI_W2: f64 = 0.109_951_743_655_321_868;

fn push_triangle(rule: &mut QuadratureRule, a: Point, b: Point, c: Point, area: f64) {
    for &(s, w) in &[(TRI_A1, TRI_W1), (TRI_A2, TRI_W2)] {
        let r = 1.0 - 2.0 * s;
        for bary in [[s, s, r], [s, r, s], [r, s, s]] {
            rule.points.push([
                bary[0] * a[0] + bary[1] * b[0] + bary[2] * c[0],
                bary[0] * a[1] + bary[1] * b[1] + bary[2] * c[1],
            ]);
            rule.weights.push(w * area);
        }
    }
}

/// Degree-4 rule on a counter-clockwise triangle.
pub fn triangle_quadrature(vertices: [Point; 3]) -> QuadratureRule {
    let [a, b, c] = vertices;
    let mut rule = QuadratureRule::default();
    push_triangle(&mut rule, a, b, c, vec2::signed_area(a, b, c).abs());
    rule
}

/// Degree-4 rule on a simple counter-clockwise polygon, built by fan
/// triangulation from the first vertex.
///
/// Zero-area fan triangles are skipped, so a polygon that collapsed to a
/// segment yields an empty rule.
pub fn polygon_quadrature(polygon: &[Point]) -> Result<QuadratureRule> {
    let mut rule = QuadratureRule::default();
    if polygon.len() < 3 {
        return Ok(rule);
    }
    let scale = polygon
        .iter()
        .map(|p| vec2::dist(*p, polygon[0]))
        .fold(0.0, f64::max);
    let tol = 1e-14 * scale * scale;
    let p0 = polygon[0];
    for k in 1..polygon.len() - 1 {
        let area = vec2::signed_area(p0, polygon[k], polygon[k + 1]);
        if area < -tol {
            return Err(Error::Geometry(format!(
                "polygon is self-intersecting or clockwise: {polygon:?}"
            )));
        }
        if area > tol {
            push_triangle(&mut rule, p0, polygon[k], polygon[k + 1], area);
        }
    }
    Ok(rule)
}

/// Three-point Gauss–Legendre rule on the segment `[p, q]`.
pub fn segment_quadrature(p: Point, q: Point) -> Result<QuadratureRule> {
    let length = vec2::dist(p, q);
    if !(length > 0.0) {
        return Err(Error::Geometry(format!("zero-length segment at {p:?}")));
    }
    let r = (0.6f64).sqrt();
    let nodes = [-r, 0.0, r];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let mut rule = QuadratureRule::default();
    for (x, w) in nodes.iter().zip(weights.iter()) {
        rule.points.push(vec2::lerp(p, q, 0.5 * (1.0 + x)));
        rule.weights.push(0.5 * w * length);
    }
    Ok(rule)
}
