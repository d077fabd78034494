//! Direct integration of i dc/dτ = [[−τ, ω], [ω, τ]] c from a finite initial
//! time. Starting in the bare state ψ₁ at τ_i leaves spurious oscillations of
//! amplitude ∝ (τ_i² + ω²)^{-1/2}; starting in the instantaneous adiabatic
//! state suppresses them to O(ω/τ_i³).
//!
//! The integration runs in the interaction picture c₁ = e^{iτ²/2} b₁,
//! c₂ = e^{−iτ²/2} b₂, where i b₁′ = ω e^{−iτ²} b₂ and i b₂′ = ω e^{iτ²} b₁.
//! The fast phase is then applied in closed form.

use num_complex::Complex64;

use super::rk::{integrate, System};
use super::{check_grid, EngineError, IntegratorConfig, ProbabilityTrace, Sample, TraceSource};
use crate::model::{mixing_angle, rotate_to_adiabatic, AmplitudePair, Basis, LzParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleStart {
    /// c = (1, 0): the system is in ψ₁ at τ_i.
    #[default]
    Diabatic,
    /// The system is in the adiabatic state φ₂ = ψ₁ sin ϑ + ψ₂ cos ϑ at τ_i,
    /// the state continuously connected to ψ₁ at τ → −∞.
    Adiabatic,
}

struct Schrodinger {
    omega: f64,
}

impl System<4> for Schrodinger {
    fn rhs(&self, tau: f64, y: &[f64; 4]) -> [f64; 4] {
        let b1 = Complex64::new(y[0], y[1]);
        let b2 = Complex64::new(y[2], y[3]);
        let phase = Complex64::from_polar(self.omega, tau * tau);
        let d1 = -Complex64::i() * phase.conj() * b2;
        let d2 = -Complex64::i() * phase * b1;
        [d1.re, d1.im, d2.re, d2.im]
    }
}

/// e^{iτ²/2}, the phase carried by c₁ relative to b₁.
fn frame_phase(tau: f64) -> Complex64 {
    Complex64::from_polar(1.0, 0.5 * tau * tau)
}

/// Diabatic amplitudes at each τ of the increasing grid `taus`.
pub fn schrodinger_amplitudes(
    params: LzParams,
    tau_initial: f64,
    start: OracleStart,
    cfg: &IntegratorConfig,
    taus: &[f64],
) -> Result<Vec<AmplitudePair>, EngineError> {
    cfg.validate()?;
    check_grid(taus)?;
    let Some(&last) = taus.last() else {
        return Ok(Vec::new());
    };
    if tau_initial.is_nan() || tau_initial > taus[0] {
        return Err(EngineError::OracleStart {
            tau_initial,
            first: taus[0],
        });
    }
    let (c1, c2) = match start {
        OracleStart::Diabatic => (1.0, 0.0),
        OracleStart::Adiabatic => mixing_angle(params, tau_initial).sin_cos(),
    };
    let f = frame_phase(tau_initial);
    let b1 = c1 * f.conj();
    let b2 = c2 * f;
    let y0 = [b1.re, b1.im, b2.re, b2.im];
    let sys = Schrodinger {
        omega: params.omega(),
    };
    let states = integrate(&sys, tau_initial, y0, last, taus, &cfg.step_control())?;
    Ok(taus
        .iter()
        .zip(&states)
        .map(|(&tau, s)| {
            let f = frame_phase(tau);
            AmplitudePair::new(
                Complex64::new(s[0], s[1]) * f,
                Complex64::new(s[2], s[3]) * f.conj(),
            )
        })
        .collect())
}

/// P_d = |c₂|² from the bare-state start c = (1, 0) at `tau_initial`.
pub fn integrate_schrodinger_oracle(
    params: LzParams,
    tau_initial: f64,
    cfg: &IntegratorConfig,
    taus: &[f64],
) -> Result<ProbabilityTrace, EngineError> {
    let amps = schrodinger_amplitudes(params, tau_initial, OracleStart::Diabatic, cfg, taus)?;
    let samples = taus
        .iter()
        .zip(&amps)
        .map(|(&tau, a)| Sample {
            tau,
            p: a.0[1].norm_sqr(),
        })
        .collect();
    Ok(ProbabilityTrace::new(
        Basis::Diabatic,
        TraceSource::SchrodingerOracle,
        samples,
    ))
}

/// P_a = |a₁|² from oracle amplitudes rotated into the adiabatic basis,
/// started in the adiabatic state at `tau_initial`.
pub fn adiabatic_oracle_trace(
    params: LzParams,
    tau_initial: f64,
    cfg: &IntegratorConfig,
    taus: &[f64],
) -> Result<ProbabilityTrace, EngineError> {
    let amps = schrodinger_amplitudes(params, tau_initial, OracleStart::Adiabatic, cfg, taus)?;
    let samples = taus
        .iter()
        .zip(&amps)
        .map(|(&tau, &a)| {
            // The norm is conserved only to the integration tolerance.
            let n = a.norm_sqr().sqrt();
            let unit = AmplitudePair::new(a.0[0] / n, a.0[1] / n);
            let r = rotate_to_adiabatic(unit, mixing_angle(params, tau))?;
            Ok(Sample {
                tau,
                p: r.0[0].norm_sqr(),
            })
        })
        .collect::<Result<Vec<_>, EngineError>>()?;
    Ok(ProbabilityTrace::new(
        Basis::Adiabatic,
        TraceSource::SchrodingerOracle,
        samples,
    ))
}
