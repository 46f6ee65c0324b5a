//! Element classification and cutting against the interface level set.

use super::interface::Interface;
use super::vec2::{self, Point};
use crate::error::{Error, Result};

/// Level-set values below `SNAP_FACTOR * h` in magnitude are snapped to zero
/// and treated as lying on side 2.
pub const SNAP_FACTOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementClass {
    Inside1,
    Inside2,
    Cut,
}

/// Geometry of a triangle split by the (linearized) interface.
#[derive(Debug, Clone, PartialEq)]
pub struct CutCell {
    pub element: usize,
    /// `T ∩ Ω₁`, counter-clockwise.
    pub poly1: Vec<Point>,
    /// `T ∩ Ω₂`, counter-clockwise.
    pub poly2: Vec<Point>,
    /// Chord `K` approximating `T ∩ Γ`.
    pub segment: [Point; 2],
    /// Interface normal at the chord midpoint.
    pub normal: Point,
}

impl CutCell {
    pub fn segment_length(&self) -> f64 {
        vec2::dist(self.segment[0], self.segment[1])
    }

    pub fn polygon(&self, side: usize) -> &[Point] {
        if side == 1 {
            &self.poly1
        } else {
            &self.poly2
        }
    }
}

pub fn snap(value: f64, h: f64) -> f64 {
    if value.abs() < SNAP_FACTOR * h {
        0.0
    } else {
        value
    }
}

#[inline]
fn on_side1(snapped: f64) -> bool {
    snapped < 0.0
}

/// Classify from vertex level-set values.
pub fn classify_values(values: [f64; 3], h: f64) -> ElementClass {
    let n1 = values.iter().filter(|&&v| on_side1(snap(v, h))).count();
    match n1 {
        3 => ElementClass::Inside1,
        0 => ElementClass::Inside2,
        _ => ElementClass::Cut,
    }
}

pub fn classify_element(interface: &Interface, triangle: &[Point; 3], h: f64) -> ElementClass {
    classify_values(triangle.map(|p| interface.level_set(p)), h)
}

/// Root of the level set on the edge `a → b`, whose snapped end values have
/// opposite sides. Starts from the linear interpolant and refines with the
/// Illinois variant of regula falsi.
fn edge_root(interface: &Interface, a: Point, b: Point, fa: f64, fb: f64, h: f64) -> Point {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let tol = 1e-14 * h;
    let (mut t0, mut t1) = (0.0, 1.0);
    let (mut g0, mut g1) = (fa, fb);
    let mut t = t0 - g0 * (t1 - t0) / (g1 - g0);
    let mut side = 0i8;
    for _ in 0..100 {
        let g = interface.level_set(vec2::lerp(a, b, t));
        if g.abs() <= tol || (t1 - t0).abs() < 1e-16 {
            break;
        }
        if (g < 0.0) == (g0 < 0.0) {
            t0 = t;
            g0 = g;
            if side == -1 {
                g1 *= 0.5;
            }
            side = -1;
        } else {
            t1 = t;
            g1 = g;
            if side == 1 {
                g0 *= 0.5;
            }
            side = 1;
        }
        t = t0 - g0 * (t1 - t0) / (g1 - g0);
    }
    vec2::lerp(a, b, t)
}

fn push_unique(poly: &mut Vec<Point>, p: Point, tol: f64) {
    if let Some(last) = poly.last() {
        if vec2::dist(*last, p) <= tol {
            return;
        }
    }
    poly.push(p);
}

fn close_loop(poly: &mut Vec<Point>, tol: f64) {
    while poly.len() > 1 && vec2::dist(poly[0], *poly.last().unwrap()) <= tol {
        poly.pop();
    }
}

/// Split a triangle classified as [`ElementClass::Cut`].
///
/// Returns `Ok(None)` when, after snapping, both edge intersections coincide
/// (the curve only touches a vertex); the caller then treats the element as
/// lying on the side of its remaining vertices.
pub fn cut_triangle(
    interface: &Interface,
    element: usize,
    triangle: &[Point; 3],
    h: f64,
) -> Result<Option<CutCell>> {
    let values = triangle.map(|p| snap(interface.level_set(p), h));
    if classify_values(values, h) != ElementClass::Cut {
        return Err(Error::Geometry(format!("element {element} is not cut")));
    }
    let tol = 1e-12 * h;
    let mut poly1 = Vec::with_capacity(4);
    let mut poly2 = Vec::with_capacity(4);
    let mut crossings = Vec::with_capacity(2);
    for k in 0..3 {
        let (a, b) = (triangle[k], triangle[(k + 1) % 3]);
        let (fa, fb) = (values[k], values[(k + 1) % 3]);
        if on_side1(fa) {
            push_unique(&mut poly1, a, tol);
        } else {
            push_unique(&mut poly2, a, tol);
        }
        if on_side1(fa) != on_side1(fb) {
            let p = edge_root(interface, a, b, fa, fb, h);
            push_unique(&mut poly1, p, tol);
            push_unique(&mut poly2, p, tol);
            crossings.push(p);
        }
    }
    close_loop(&mut poly1, tol);
    close_loop(&mut poly2, tol);
    debug_assert_eq!(crossings.len(), 2);
    if vec2::dist(crossings[0], crossings[1]) <= tol {
        return Ok(None);
    }
    let segment = [crossings[0], crossings[1]];
    let normal = interface.normal(vec2::lerp(segment[0], segment[1], 0.5));
    Ok(Some(CutCell {
        element,
        poly1,
        poly2,
        segment,
        normal,
    }))
}
