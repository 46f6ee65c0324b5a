//! Pointwise interface coupling algebra.
//!
//! The Robin matrix `B` built from the permeability coupling `α` and the
//! averaging parameter `ξ` always has the eigenvectors `e₁ = (1, 1)/√2` and
//! `e₂ = (1, -1)/√2`, with eigenvalues `λ₁ = α/(2ξ - 1)` and `λ₂ = α`. Every
//! matrix used by the robust coupling is diagonal in that basis, so the
//! assembly works with per-direction scalars and never forms `B⁻¹`.

use crate::error::{Error, Result};
use crate::geometry::vec2::{self, Mat2, Point};

const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Fixed eigenvectors of every coupling matrix.
pub const EIGENVECTORS: [[f64; 2]; 2] = [[S, S], [S, -S]];

/// `Σᵢ cᵢ eᵢ ⊗ eᵢ` for the fixed eigenbasis.
pub fn from_eigen(c: [f64; 2]) -> Mat2 {
    let mut m = [[0.0; 2]; 2];
    for (ci, e) in c.iter().zip(EIGENVECTORS.iter()) {
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] += ci * e[a] * e[b];
            }
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceCoupling {
    pub alpha: f64,
    pub xi: f64,
    pub b: Mat2,
    pub lambdas: [f64; 2],
}

impl InterfaceCoupling {
    pub fn from_alpha_xi(alpha: f64, xi: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Config(format!(
                "coupling alpha must be positive and finite, got {alpha}"
            )));
        }
        if !(xi > 0.5) || !xi.is_finite() {
            return Err(Error::Config(format!(
                "xi must exceed 1/2: B is singular for xi = 1/2 and indefinite for xi < 1/2 (got {xi})"
            )));
        }
        let s = alpha / (2.0 * xi - 1.0);
        let off = s * (1.0 - xi);
        let b = [[s * xi, off], [off, s * xi]];
        Ok(InterfaceCoupling {
            alpha,
            xi,
            b,
            lambdas: [s, alpha],
        })
    }

    /// Thickness model: `α = 2 a_Γ / d`.
    pub fn from_thickness(a_gamma: f64, d: f64, xi: f64) -> Result<Self> {
        if !(d > 0.0) {
            return Err(Error::Config(format!("crack thickness must be positive, got {d}")));
        }
        Self::from_alpha_xi(2.0 * a_gamma / d, xi)
    }

    /// `Σ λᵢ eᵢ ⊗ eᵢ`; equals `b` up to rounding.
    pub fn reconstruct(&self) -> Mat2 {
        from_eigen(self.lambdas)
    }
}

/// Robust Nitsche-type penalty and the eigenbasis coefficients of the
/// expanded robust form.
///
/// With flux vector `F = (n₁·A₁∇v₁, n₂·A₂∇v₂)` and jump `J = v - v_Γ`, the
/// interface part of the robust form is
/// `Fᵀ M_FF F + Fᵀ M_FJ J + F̃ᵀ M_FJ J̃ + Jᵀ M_JJ J` with
/// `M_FF = B⁻¹τB⁻¹ - B⁻¹`, `M_FJ = B⁻¹τ - I`, `M_JJ = τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustPenalty {
    pub beta: f64,
    pub h: f64,
    /// Per-direction penalty scales (`[β, β]` unless refined).
    pub betas: [f64; 2],
    pub taus: [f64; 2],
    pub c_ff: [f64; 2],
    pub c_fj: [f64; 2],
    pub c_jj: [f64; 2],
}

fn direction(lambda: f64, h: f64, beta: f64) -> (f64, f64, f64) {
    // written so that lambda up to ~1e300 neither overflows nor divides 0/0
    let tau = beta / (h + beta / lambda);
    let c_fj = -h / (h + beta / lambda);
    let c_ff = -h / (lambda * h + beta);
    (tau, c_ff, c_fj)
}

impl RobustPenalty {
    pub fn new(coupling: &InterfaceCoupling, h: f64, beta: f64) -> Result<Self> {
        Self::with_betas(coupling, h, beta, [beta, beta])
    }

    /// Per-direction penalty scales `βᵢ`.
    pub fn with_betas(
        coupling: &InterfaceCoupling,
        h: f64,
        beta: f64,
        betas: [f64; 2],
    ) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Config(format!("mesh size must be positive, got {h}")));
        }
        if !(betas[0] > 0.0 && betas[1] > 0.0) {
            return Err(Error::Config(format!("beta must be positive, got {betas:?}")));
        }
        let mut p = RobustPenalty {
            beta,
            h,
            betas,
            taus: [0.0; 2],
            c_ff: [0.0; 2],
            c_fj: [0.0; 2],
            c_jj: [0.0; 2],
        };
        for i in 0..2 {
            let (tau, c_ff, c_fj) = direction(coupling.lambdas[i], h, betas[i]);
            p.taus[i] = tau;
            p.c_ff[i] = c_ff;
            p.c_fj[i] = c_fj;
            p.c_jj[i] = tau;
        }
        Ok(p)
    }

    pub fn tau(&self) -> Mat2 {
        from_eigen(self.taus)
    }

    pub fn m_ff(&self) -> Mat2 {
        from_eigen(self.c_ff)
    }

    pub fn m_fj(&self) -> Mat2 {
        from_eigen(self.c_fj)
    }

    pub fn m_jj(&self) -> Mat2 {
        from_eigen(self.c_jj)
    }
}

/// Refined per-direction scales `βᵢ = C Σⱼ ‖nⱼ‖²_{Aⱼ} eᵢⱼ²`, where the safety
/// factor `C = β / Σⱼ ‖nⱼ‖²_{Aⱼ}` is inherited from the global choice of `β`.
pub fn refined_betas(beta: f64, flux_norms: [f64; 2]) -> [f64; 2] {
    let total = flux_norms[0] + flux_norms[1];
    let mut out = [beta; 2];
    if total > 0.0 {
        for (i, e) in EIGENVECTORS.iter().enumerate() {
            let weighted = flux_norms[0] * e[0] * e[0] + flux_norms[1] * e[1] * e[1];
            out[i] = beta * weighted / total;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaCheck {
    Ok { bound: f64 },
    Warning { required_min: f64 },
}

impl BetaCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, BetaCheck::Ok { .. })
    }

    pub fn bound(&self) -> f64 {
        match *self {
            BetaCheck::Ok { bound } => bound,
            BetaCheck::Warning { required_min } => required_min,
        }
    }
}

/// Per-side weighted flux norms `supₓ |Aᵢ^{1/2} n|²` over the samples.
pub fn flux_norms(
    a1: impl Fn(Point) -> Mat2,
    a2: impl Fn(Point) -> Mat2,
    samples: &[(Point, Point)],
) -> [f64; 2] {
    let mut out = [0.0f64; 2];
    for &(x, n) in samples {
        // n₂ = -n₁ but the quadratic form does not see the sign
        out[0] = out[0].max(vec2::dot(n, vec2::mat_vec(&a1(x), n)));
        out[1] = out[1].max(vec2::dot(n, vec2::mat_vec(&a2(x), n)));
    }
    out
}

/// Check `β ≥ Σᵢ supₓ |Aᵢ^{1/2} nᵢ|²` over sampled interface points and normals.
pub fn check_beta_condition(
    a1: impl Fn(Point) -> Mat2,
    a2: impl Fn(Point) -> Mat2,
    samples: &[(Point, Point)],
    beta: f64,
) -> BetaCheck {
    let norms = flux_norms(a1, a2, samples);
    let bound = norms[0] + norms[1];
    if beta >= bound {
        BetaCheck::Ok { bound }
    } else {
        BetaCheck::Warning {
            required_min: bound,
        }
    }
}

/// Spectral norms appearing in the τ estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauBounds {
    /// `‖B⁻¹τB⁻¹ - B⁻¹‖`, bounded by `h/β`.
    pub flux_flux: f64,
    /// `‖(B⁻¹τ - I)τ^{-1/2}‖`, bounded by `(h/β)^{1/2}`.
    pub flux_jump: f64,
    /// `‖τ‖`, bounded by `β/h`.
    pub tau: f64,
}

pub fn tau_bound_values(penalty: &RobustPenalty) -> TauBounds {
    let mut b = TauBounds {
        flux_flux: 0.0,
        flux_jump: 0.0,
        tau: 0.0,
    };
    for i in 0..2 {
        b.flux_flux = b.flux_flux.max(penalty.c_ff[i].abs());
        b.flux_jump = b.flux_jump.max(penalty.c_fj[i].abs() / penalty.taus[i].sqrt());
        b.tau = b.tau.max(penalty.taus[i].abs());
    }
    b
}
