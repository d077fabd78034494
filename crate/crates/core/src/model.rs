//! Scaled Landau-Zener model: parameters, exact crossing-point and asymptotic
//! values, and the diabatic-to-adiabatic rotation.
//!
//! Everything is in scaled units: τ = βt and ω = Ω/β, with Ω the constant
//! coupling and β² the slope of the detuning Δ(t) = β²t. In these units the
//! detuning is Δ(τ) = τ.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::specialfn::chi_exact;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ModelError {
    #[error("coupling omega must be finite and > 0, got {0}")]
    InvalidOmega(f64),
    #[error("amplitude pair is not normalized: |c1|^2 + |c2|^2 = {0}")]
    NotNormalized(f64),
}

/// Dimensionless coupling ω = Ω/β, the only parameter of the scaled model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LzParams {
    omega: f64,
}

impl LzParams {
    pub fn new(omega: f64) -> Result<Self, ModelError> {
        if omega.is_finite() && omega > 0.0 {
            Ok(Self { omega })
        } else {
            Err(ModelError::InvalidOmega(omega))
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// e^{-πω²/2}, the square root of the adiabatic survival P_a(∞).
    pub(crate) fn half_lz(&self) -> f64 {
        (-0.5 * PI * self.omega * self.omega).exp()
    }

    /// e^{-πω²}.
    pub(crate) fn lz(&self) -> f64 {
        (-PI * self.omega * self.omega).exp()
    }

    /// √(1 − e^{-πω²}) without cancellation at small ω.
    pub(crate) fn sqrt_complement(&self) -> f64 {
        (-(-PI * self.omega * self.omega).exp_m1()).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Diabatic,
    Adiabatic,
}

impl Basis {
    pub fn short(self) -> &'static str {
        match self {
            Basis::Diabatic => "d",
            Basis::Adiabatic => "a",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Diabatic => "diabatic",
            Basis::Adiabatic => "adiabatic",
        })
    }
}

/// Exact P(0), P'(0), P''(0) and P(∞) in one basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryValues {
    pub p0: f64,
    pub dp0: f64,
    pub d2p0: f64,
    pub p_inf: f64,
}

/// Transition probability at τ → +∞.
pub fn p_infinity(params: LzParams, basis: Basis) -> f64 {
    let w2 = params.omega * params.omega;
    match basis {
        Basis::Diabatic => -(-PI * w2).exp_m1(),
        Basis::Adiabatic => (-PI * w2).exp(),
    }
}

pub fn boundary_values(params: LzParams, basis: Basis) -> BoundaryValues {
    let w = params.omega;
    let chi = chi_exact(w).value;
    let e_half = params.half_lz();
    let s = params.sqrt_complement();
    match basis {
        Basis::Diabatic => BoundaryValues {
            p0: -0.5 * (-0.5 * PI * w * w).exp_m1(),
            dp0: w * s * chi.cos(),
            d2p0: 2.0 * w * w * e_half,
            p_inf: p_infinity(params, basis),
        },
        Basis::Adiabatic => BoundaryValues {
            p0: 0.5 * one_minus_s_sin_chi(params, chi),
            dp0: e_half / (2.0 * w),
            d2p0: s * (chi.sin() / (2.0 * w * w) - chi.cos()),
            p_inf: p_infinity(params, basis),
        },
    }
}

/// 1 − √(1 − e^{-πω²}) sin χ, split so that neither factor cancels at large ω.
pub(crate) fn one_minus_s_sin_chi(params: LzParams, chi: f64) -> f64 {
    let s = params.sqrt_complement();
    let one_minus_s = params.lz() / (1.0 + s);
    let half_gap = 0.5 * (FRAC_PI_2 - chi);
    one_minus_s + s * 2.0 * half_gap.sin().powi(2)
}

/// Mixing angle ϑ(τ) with tan 2ϑ = ω/τ, on the branch 0 ≤ ϑ ≤ π/2.
pub fn mixing_angle(params: LzParams, tau: f64) -> f64 {
    0.5 * params.omega.atan2(tau)
}

/// Adiabatic-frame quantities at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticFrame {
    /// Ω₀ = √(τ² + ω²); the adiabatic energies are ∓Ω₀.
    pub gap_half_width: f64,
    /// Non-adiabatic coupling ϑ' = dϑ/dτ.
    pub coupling: f64,
}

pub fn adiabatic_frame_quantities(params: LzParams, tau: f64) -> AdiabaticFrame {
    let w = params.omega;
    let r2 = tau * tau + w * w;
    AdiabaticFrame {
        gap_half_width: r2.sqrt(),
        coupling: -w / (2.0 * r2),
    }
}

/// Complex amplitudes of a two-state wavefunction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair(pub [Complex64; 2]);

impl AmplitudePair {
    pub fn new(c1: Complex64, c2: Complex64) -> Self {
        Self([c1, c2])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }
}

/// Projects diabatic amplitudes onto the adiabatic states
/// φ₁ = ψ₁ cos ϑ − ψ₂ sin ϑ and φ₂ = ψ₁ sin ϑ + ψ₂ cos ϑ.
///
/// The result is (a₁, a₂) = (c₁ cos ϑ − c₂ sin ϑ, c₁ sin ϑ + c₂ cos ϑ). Since
/// ϑ → π/2 at τ → −∞, a system starting in ψ₁ starts in φ₂, and the adiabatic
/// transition probability is |a₁|².
pub fn rotate_to_adiabatic(c: AmplitudePair, theta: f64) -> Result<AmplitudePair, ModelError> {
    let norm = c.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(ModelError::NotNormalized(norm));
    }
    let (sin, cos) = theta.sin_cos();
    let [c1, c2] = c.0;
    Ok(AmplitudePair([c1 * cos - c2 * sin, c1 * sin + c2 * cos]))
}
