use super::vec2::{self, Point};

/// Analytic shape of the fracture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterfaceShape {
    /// The line `x = x0`; side 1 is `x < x0` unless `flipped`.
    VerticalLine { x0: f64, flipped: bool },
    /// The circle `|x - center| = radius`; side 1 is the inside.
    ///
    /// Only the part of the circle inside the mesh bounding box is seen by
    /// the discretization, so a quarter arc results from a center placed in
    /// a corner of the box.
    Circle { center: Point, radius: f64 },
}

/// Fracture `Γ` given as the zero set of a level-set function `φ`.
///
/// `φ < 0` on side 1 (`Ω₁`), `φ > 0` on side 2 (`Ω₂`), and the unit normal
/// `n_Γ = ∇φ / |∇φ|` points from `Ω₁` into `Ω₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub shape: InterfaceShape,
}

impl Interface {
    pub fn vertical_line(x0: f64) -> Self {
        Interface {
            shape: InterfaceShape::VerticalLine { x0, flipped: false },
        }
    }

    pub fn circle(center: Point, radius: f64) -> Self {
        Interface {
            shape: InterfaceShape::Circle { center, radius },
        }
    }

    /// Same curve with sides 1 and 2 exchanged (only defined for lines).
    pub fn flipped(self) -> Self {
        match self.shape {
            InterfaceShape::VerticalLine { x0, flipped } => Interface {
                shape: InterfaceShape::VerticalLine {
                    x0,
                    flipped: !flipped,
                },
            },
            InterfaceShape::Circle { .. } => self,
        }
    }

    pub fn level_set(&self, p: Point) -> f64 {
        match self.shape {
            InterfaceShape::VerticalLine { x0, flipped } => {
                let v = p[0] - x0;
                if flipped {
                    -v
                } else {
                    v
                }
            }
            InterfaceShape::Circle { center, radius } => vec2::dist(p, center) - radius,
        }
    }

    pub fn normal(&self, p: Point) -> Point {
        match self.shape {
            InterfaceShape::VerticalLine { flipped, .. } => {
                if flipped {
                    [-1.0, 0.0]
                } else {
                    [1.0, 0.0]
                }
            }
            InterfaceShape::Circle { center, .. } => {
                let d = vec2::sub(p, center);
                let r = vec2::norm(d);
                if r == 0.0 {
                    [1.0, 0.0]
                } else {
                    vec2::scale(d, 1.0 / r)
                }
            }
        }
    }

    /// Unit tangent, the normal rotated by +90°.
    pub fn tangent(&self, p: Point) -> Point {
        let n = self.normal(p);
        [-n[1], n[0]]
    }

    /// Monotone coordinate along the curve, used to order samples.
    pub fn curve_parameter(&self, p: Point) -> f64 {
        match self.shape {
            InterfaceShape::VerticalLine { .. } => p[1],
            InterfaceShape::Circle { center, radius } => {
                let d = vec2::sub(p, center);
                radius * d[1].atan2(d[0])
            }
        }
    }

    pub fn describe(&self) -> String {
        match self.shape {
            InterfaceShape::VerticalLine { x0, flipped } => {
                format!("line x={x0}{}", if flipped { " (flipped)" } else { "" })
            }
            InterfaceShape::Circle { center, radius } => {
                format!("circle center=({},{}) radius={radius}", center[0], center[1])
            }
        }
    }
}
