//! Cut finite element solver for pressure in fractured media.
//!
//! The bulk domain is split by an embedded fracture `Γ` into two subdomains,
//! each carrying its own pressure field, while the fracture carries a third
//! pressure field. All three fields are continuous piecewise linears on the
//! same structured background triangulation, restricted to the elements that
//! meet the respective subdomain or the fracture.
//!
//! Two interface couplings are provided:
//!
//! * [`Formulation::Standard`]: the Robin condition `n·A∇u + B(u - u_Γ) = 0`
//!   imposed directly through the term `(B(u - u_Γ), v - v_Γ)_Γ`;
//! * [`Formulation::Robust`]: the same condition written as
//!   `B⁻¹ n·A∇u + (u - u_Γ) = 0` and imposed with a Nitsche-type penalty `τ`,
//!   which stays stable for coupling eigenvalues anywhere in `(0, ∞)`.
//!
//! Ghost-penalty stabilization on faces and on the fracture band keeps the
//! systems well conditioned independently of how `Γ` cuts the mesh.
//!
//! The usual entry point is [`solver::solve`], which runs the whole pipeline
//! for a [`cases::CaseSpec`] at a given [`solver::Discretization`].

pub mod analysis;
pub mod assembly;
pub mod cases;
pub mod coupling;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod solver;

pub use assembly::Formulation;
pub use error::{Error, Result};
