//! Closed-form asymptotic time evolutions of the transition probabilities
//! away from the crossing, split into a non-oscillatory part and an
//! oscillating term governed by the phase ξ(τ).

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use crate::model::LzParams;
use crate::specialfn::log_gamma_arg;

/// Threshold on τ² + ω² above which the asymptotic formulas are flagged valid.
pub const DEFAULT_VALID_THRESHOLD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxOptions {
    pub valid_threshold: f64,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        Self {
            valid_threshold: DEFAULT_VALID_THRESHOLD,
        }
    }
}

/// One point of an approximate evolution.
///
/// `envelope_upper`/`envelope_lower` bound the oscillation; before the
/// crossing there is no oscillating term and all four values coincide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionEstimate {
    pub p: f64,
    pub envelope_upper: f64,
    pub envelope_lower: f64,
    pub nonoscillatory: f64,
    pub valid: bool,
}

impl EvolutionEstimate {
    /// Half the distance between the envelopes.
    pub fn amplitude(&self) -> f64 {
        0.5 * (self.envelope_upper - self.envelope_lower)
    }

    fn steady(p: f64, valid: bool) -> Self {
        Self {
            p,
            envelope_upper: p,
            envelope_lower: p,
            nonoscillatory: p,
            valid,
        }
    }
}

/// τ + √(τ² + ω²), evaluated without cancellation for τ < 0.
fn tau_plus_root(tau: f64, omega: f64) -> f64 {
    let r = tau.hypot(omega);
    if tau >= 0.0 {
        tau + r
    } else {
        omega * omega / (r - tau)
    }
}

/// ξ(τ) = −ω²/2 + ω² ln[(τ + √(τ²+ω²))/√2] + τ√(τ²+ω²) + π/4 + arg Γ(1 − iω²/2).
pub fn phase_xi(params: LzParams, tau: f64) -> f64 {
    let w = params.omega();
    let w2 = w * w;
    let r = tau.hypot(w);
    let gamma_phase =
        log_gamma_arg(Complex64::new(1.0, -0.5 * w2)).expect("Re z = 1 is in the domain");
    -0.5 * w2 + w2 * (tau_plus_root(tau, w) / SQRT_2).ln() + tau * r + FRAC_PI_4 + gamma_phase
}

pub fn pd_approx(params: LzParams, tau: f64) -> EvolutionEstimate {
    pd_approx_with(params, tau, &ApproxOptions::default())
}

/// Diabatic evolution; τ = 0 belongs to the post-crossing branch.
pub fn pd_approx_with(params: LzParams, tau: f64, opts: &ApproxOptions) -> EvolutionEstimate {
    let w = params.omega();
    let r = tau.hypot(w);
    let valid = r * r >= opts.valid_threshold;
    if tau < 0.0 {
        // ½ + τ/(2r) = ω² / (2r(r − τ))
        return EvolutionEstimate::steady(w * w / (2.0 * r * (r - tau)), valid);
    }
    let nonosc = 0.5 + (0.5 - params.lz()) * tau / r;
    let amp = params.half_lz() * params.sqrt_complement() * w / r;
    let cos_xi = phase_xi(params, tau).cos();
    EvolutionEstimate {
        p: nonosc - amp * cos_xi,
        envelope_upper: nonosc + amp,
        envelope_lower: nonosc - amp,
        nonoscillatory: nonosc,
        valid,
    }
}

pub fn pa_approx(params: LzParams, tau: f64) -> EvolutionEstimate {
    pa_approx_with(params, tau, &ApproxOptions::default())
}

/// Adiabatic evolution; τ = 0 belongs to the post-crossing branch.
pub fn pa_approx_with(params: LzParams, tau: f64, opts: &ApproxOptions) -> EvolutionEstimate {
    let w = params.omega();
    let r2 = tau * tau + w * w;
    let valid = r2 >= opts.valid_threshold;
    let wing = w * w / (16.0 * r2 * r2 * r2);
    if tau < 0.0 {
        return EvolutionEstimate::steady(wing, valid);
    }
    let lz = params.lz();
    let nonosc = lz + (1.0 - 2.0 * lz) * wing;
    let amp = params.half_lz() * params.sqrt_complement() * w / (2.0 * r2 * r2.sqrt());
    let sin_xi = phase_xi(params, tau).sin();
    EvolutionEstimate {
        p: nonosc + amp * sin_xi,
        envelope_upper: nonosc + amp,
        envelope_lower: nonosc - amp,
        nonoscillatory: nonosc,
        valid,
    }
}
