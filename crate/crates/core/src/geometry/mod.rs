//! Interface representation, cut-cell geometry and quadrature.

pub mod cut;
pub mod interface;
pub mod quadrature;
pub mod vec2;

pub use cut::{classify_element, classify_values, cut_triangle, CutCell, ElementClass};
pub use interface::{Interface, InterfaceShape};
pub use quadrature::{polygon_quadrature, segment_quadrature, triangle_quadrature, QuadratureRule};
pub use vec2::{Mat2, Point};
