//! Population-inversion equations started at the crossing.
//!
//! Diabatic basis, in τ:
//!     τ w‴ − w″ + 4τ(ω² + τ²) w′ − 4ω² w = 0.
//! Adiabatic basis, in ϑ = ½ arctan(ω/τ), with c = cot 2ϑ:
//!     W‴ + 6c W″ + 4[4ω⁴(c² + 1)³ + 1] W′ + 24c W = 0.
//!
//! Both are integrated for u = 1 + w = 2P rather than w itself, so the error
//! control acts on the probability and stays meaningful when P is
//! exponentially small.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::rk::{integrate, System};
use super::{
    check_grid, Direction, EngineError, IntegratorConfig, ProbabilityTrace, Sample, TraceSource,
};
use crate::model::{mixing_angle, one_minus_s_sin_chi, Basis, LzParams};
use crate::specialfn::chi_exact;

/// Exact w, w′, w″, w‴ at τ = 0 in the diabatic basis.
pub(crate) fn diabatic_initial_derivatives(params: LzParams) -> [f64; 4] {
    let w = params.omega();
    let chi = chi_exact(w).value;
    let e = params.half_lz();
    let s = params.sqrt_complement();
    [
        -e,
        2.0 * w * s * chi.cos(),
        4.0 * w * w * e,
        4.0 * w * s * (chi.sin() - 2.0 * w * w * chi.cos()),
    ]
}

/// Exact W, W′, W″, W‴ at ϑ = π/4 in the adiabatic basis.
pub(crate) fn adiabatic_initial_derivatives(params: LzParams) -> [f64; 4] {
    let w = params.omega();
    let chi = chi_exact(w).value;
    let e = params.half_lz();
    let s = params.sqrt_complement();
    [
        -s * chi.sin(),
        -2.0 * e,
        4.0 * s * (chi.sin() - 2.0 * w * w * chi.cos()),
        8.0 * (4.0 * w.powi(4) + 1.0) * e,
    ]
}

/// Power series of the diabatic solution about τ = 0.
///
/// τ = 0 is a regular singular point with exponents 0, 1, 3 and no
/// logarithmic solutions, so the four initial derivatives fix an entire
/// solution whose coefficients follow
///     (k+2)(k+1)(k−1) a_{k+2} = −4ω²(k−1) a_k − 4(k−2) a_{k−2}.
struct OriginSeries {
    coeffs: Vec<f64>,
    /// 1 − e^{-πω²/2}, the accurate value of u(0).
    u0: f64,
}

impl OriginSeries {
    const MAX_TERMS: usize = 400;

    fn new(params: LzParams, reach: f64) -> Self {
        let w2 = params.omega() * params.omega();
        let d = diabatic_initial_derivatives(params);
        let mut a = vec![d[0], d[1], d[2] / 2.0, d[3] / 6.0];
        let mut k = 2usize;
        loop {
            let kf = k as f64;
            let prev2 = a[k - 2];
            let next = -(4.0 * w2 * (kf - 1.0) * a[k] + 4.0 * (kf - 2.0) * prev2)
                / ((kf + 2.0) * (kf + 1.0) * (kf - 1.0));
            a.push(next);
            k += 1;
            let tail = a[a.len() - 4..]
                .iter()
                .enumerate()
                .map(|(j, c)| (c * reach.powi((a.len() - 4 + j) as i32)).abs())
                .fold(0.0, f64::max);
            if (tail < 1e-20 && a.len() > 8) || a.len() >= Self::MAX_TERMS {
                break;
            }
        }
        Self {
            coeffs: a,
            u0: -(-0.5 * std::f64::consts::PI * w2).exp_m1(),
        }
    }

    /// (u, u′, u″) at τ.
    fn state(&self, tau: f64) -> [f64; 3] {
        let mut out = [self.u0, 0.0, 0.0];
        for (n, &c) in self.coeffs.iter().enumerate().skip(1) {
            let nf = n as f64;
            out[0] += c * tau.powi(n as i32);
            out[1] += nf * c * tau.powi(n as i32 - 1);
            if n >= 2 {
                out[2] += nf * (nf - 1.0) * c * tau.powi(n as i32 - 2);
            }
        }
        out
    }
}

struct DiabaticInversion {
    w2: f64,
}

impl System<3> for DiabaticInversion {
    fn rhs(&self, tau: f64, y: &[f64; 3]) -> [f64; 3] {
        let [u, du, d2u] = *y;
        let d3u = (d2u - 4.0 * tau * (self.w2 + tau * tau) * du + 4.0 * self.w2 * (u - 1.0)) / tau;
        [du, d2u, d3u]
    }
}

struct AdiabaticInversion {
    w4: f64,
}

impl System<3> for AdiabaticInversion {
    fn rhs(&self, theta: f64, y: &[f64; 3]) -> [f64; 3] {
        let [u, du, d2u] = *y;
        let (sin2, cos2) = (2.0 * theta).sin_cos();
        let cot = cos2 / sin2;
        // (cot² 2ϑ + 1)³ = sin⁻⁶ 2ϑ
        let q = sin2.powi(-6);
        let d3u =
            -(6.0 * cot * d2u + 4.0 * (4.0 * self.w4 * q + 1.0) * du + 24.0 * cot * (u - 1.0));
        [du, d2u, d3u]
    }
}

fn check_side(
    taus: &[f64],
    direction: Direction,
    cfg: &IntegratorConfig,
) -> Result<(), EngineError> {
    check_grid(taus)?;
    for &t in taus {
        let wrong = match direction {
            Direction::Forward => t < 0.0,
            Direction::Backward => t > 0.0,
        };
        if wrong {
            return Err(EngineError::WrongSide(direction));
        }
        if t.abs() > cfg.tau_max {
            return Err(EngineError::BeyondHorizon {
                tau: t,
                tau_max: cfg.tau_max,
            });
        }
    }
    Ok(())
}

/// Integrates the diabatic inversion equation from τ = 0 towards one side.
///
/// `taus` is the sample grid, strictly increasing and entirely on the side
/// selected by `direction` (τ = 0 is allowed on both). The first
/// `origin_offset` in |τ| is covered by the power series about the crossing.
pub fn integrate_diabatic_inversion(
    params: LzParams,
    cfg: &IntegratorConfig,
    direction: Direction,
    taus: &[f64],
) -> Result<ProbabilityTrace, EngineError> {
    cfg.validate()?;
    check_side(taus, direction, cfg)?;
    let sign = direction.sign();
    let h = sign * cfg.origin_offset;
    let series = OriginSeries::new(params, cfg.origin_offset);

    // Integration order: increasing |τ|.
    let mut ordered: Vec<f64> = taus.to_vec();
    if direction == Direction::Backward {
        ordered.reverse();
    }
    let split = ordered.partition_point(|t| t.abs() <= cfg.origin_offset);
    let mut probs: Vec<f64> = ordered[..split]
        .iter()
        .map(|&t| 0.5 * series.state(t)[0])
        .collect();
    if split < ordered.len() {
        let sys = DiabaticInversion {
            w2: params.omega() * params.omega(),
        };
        let t_end = *ordered.last().expect("non-empty");
        let states = integrate(
            &sys,
            h,
            series.state(h),
            t_end,
            &ordered[split..],
            &cfg.step_control(),
        )?;
        probs.extend(states.iter().map(|s| 0.5 * s[0]));
    }
    Ok(assemble(Basis::Diabatic, &ordered, probs, direction))
}

/// Integrates the adiabatic inversion equation in ϑ from π/4 towards 0
/// (forward in τ) or π/2 (backward in τ) and maps back through τ = ω cot 2ϑ.
pub fn integrate_adiabatic_inversion(
    params: LzParams,
    cfg: &IntegratorConfig,
    direction: Direction,
    taus: &[f64],
) -> Result<ProbabilityTrace, EngineError> {
    cfg.validate()?;
    check_side(taus, direction, cfg)?;
    let mut ordered: Vec<f64> = taus.to_vec();
    if direction == Direction::Backward {
        ordered.reverse();
    }
    let thetas: Vec<f64> = ordered.iter().map(|&t| mixing_angle(params, t)).collect();
    for (&tau, &theta) in ordered.iter().zip(&thetas) {
        if theta < cfg.theta_guard || theta > FRAC_PI_2 - cfg.theta_guard {
            return Err(EngineError::GuardBand {
                tau,
                theta,
                guard: cfg.theta_guard,
            });
        }
    }

    let chi = chi_exact(params.omega()).value;
    let d = adiabatic_initial_derivatives(params);
    let y0 = [one_minus_s_sin_chi(params, chi), d[1], d[2]];
    let probs = match thetas.last() {
        None => Vec::new(),
        Some(&theta_end) => {
            let sys = AdiabaticInversion {
                w4: params.omega().powi(4),
            };
            let states = integrate(&sys, FRAC_PI_4, y0, theta_end, &thetas, &cfg.step_control())?;
            states.iter().map(|s| 0.5 * s[0]).collect()
        }
    };
    Ok(assemble(Basis::Adiabatic, &ordered, probs, direction))
}

fn assemble(
    basis: Basis,
    ordered: &[f64],
    mut probs: Vec<f64>,
    direction: Direction,
) -> ProbabilityTrace {
    let mut taus = ordered.to_vec();
    if direction == Direction::Backward {
        taus.reverse();
        probs.reverse();
    }
    let samples = taus
        .into_iter()
        .zip(probs)
        .map(|(tau, p)| Sample { tau, p })
        .collect();
    ProbabilityTrace::new(basis, TraceSource::InversionOde, samples)
}

fn two_sided(
    params: LzParams,
    cfg: &IntegratorConfig,
    taus: &[f64],
    run: fn(
        LzParams,
        &IntegratorConfig,
        Direction,
        &[f64],
    ) -> Result<ProbabilityTrace, EngineError>,
) -> Result<ProbabilityTrace, EngineError> {
    check_grid(taus)?;
    let split = taus.partition_point(|&t| t < 0.0);
    let (neg, pos) = taus.split_at(split);
    let (back, fwd) = rayon::join(
        || run(params, cfg, Direction::Backward, neg),
        || run(params, cfg, Direction::Forward, pos),
    );
    let mut back = back?;
    back.samples.extend(fwd?.samples);
    Ok(back)
}

/// Diabatic P_d on an arbitrary increasing grid, integrating both sides.
pub fn diabatic_trace(
    params: LzParams,
    cfg: &IntegratorConfig,
    taus: &[f64],
) -> Result<ProbabilityTrace, EngineError> {
    two_sided(params, cfg, taus, integrate_diabatic_inversion)
}

/// Adiabatic P_a on an arbitrary increasing grid, integrating both sides.
pub fn adiabatic_trace(
    params: LzParams,
    cfg: &IntegratorConfig,
    taus: &[f64],
) -> Result<ProbabilityTrace, EngineError> {
    two_sided(params, cfg, taus, integrate_adiabatic_inversion)
}
