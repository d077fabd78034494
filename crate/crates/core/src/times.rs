//! Jump and relaxation times in the diabatic and adiabatic bases.
//!
//! The jump time is how long the transition probability takes to rise to the
//! region of its asymptotic value; the relaxation time is how long the
//! post-crossing oscillations take to fall below ε·P(∞).
//!
//! Exponentially large quantities such as e^{πω²} are handled in log space,
//! so every formula stays finite up to the point where the time itself
//! overflows.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Basis, LzParams, ModelError};
use crate::specialfn::chi_exact;

pub const DEFAULT_EPSILON: f64 = 0.1;

/// Below this ω the small-coupling adiabatic jump time is the recommended one.
pub const ADIABATIC_JUMP_CROSSOVER: f64 = 0.75;
/// The small-coupling adiabatic jump time is tabulated up to this ω.
pub const ADIABATIC_SMALL_MAX: f64 = 1.0;
/// The large-coupling adiabatic jump time is tabulated from this ω.
pub const ADIABATIC_LARGE_MIN: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimesError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("{formula} is outside its validity domain at omega = {omega} (square-root argument {argument})")]
    Regime {
        formula: &'static str,
        omega: f64,
        argument: f64,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Relative threshold ε ∈ (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Result<Self, TimesError> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(TimesError::InvalidEpsilon(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for Epsilon {
    fn default() -> Self {
        Self(DEFAULT_EPSILON)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionTimes {
    pub basis: Basis,
    pub epsilon: f64,
    pub jump: Option<f64>,
    /// Start of the jump (≤ 0), large-coupling adiabatic construction only.
    pub jump_initial: Option<f64>,
    /// End of the jump (≥ 0), large-coupling adiabatic construction only.
    pub jump_final: Option<f64>,
    pub relax: Option<f64>,
}

impl TransitionTimes {
    pub fn empty(basis: Basis, epsilon: Epsilon) -> Self {
        Self {
            basis,
            epsilon: epsilon.value(),
            jump: None,
            jump_initial: None,
            jump_final: None,
            relax: None,
        }
    }
}

/// τ_d^jump = P_d(∞)/P_d'(0) = √(1 − e^{-πω²}) / (ω cos χ).
pub fn jump_time_diabatic(params: LzParams) -> f64 {
    let w = params.omega();
    params.sqrt_complement() / (w * chi_exact(w).value.cos())
}

/// Time for the diabatic oscillation amplitude to fall to ε·P_d(∞).
///
/// `None` when the amplitude never exceeds that level, i.e. when
/// πω² > ln(1/ε² + 1).
pub fn relax_time_diabatic(params: LzParams, epsilon: Epsilon) -> Option<f64> {
    let w = params.omega();
    let e = epsilon.value();
    let arg = 1.0 / (e * e * (PI * w * w).exp_m1()) - 1.0;
    (arg >= 0.0).then(|| w * arg.sqrt())
}

/// τ_a^jump = P_a(∞)/P_a'(0) = 2ω e^{-πω²/2}, meaningful for ω ≲ 1.
pub fn jump_time_adiabatic_small(params: LzParams) -> f64 {
    2.0 * params.omega() * params.half_lz()
}

/// ω √(exp(log_ratio / 3) − 1), the common shape of the adiabatic formulas.
fn cube_root_form(formula: &'static str, omega: f64, log_ratio: f64) -> Result<f64, TimesError> {
    let argument = (log_ratio / 3.0).exp_m1();
    if argument > 0.0 && log_ratio.is_finite() {
        Ok(omega * argument.sqrt())
    } else {
        Err(TimesError::Regime {
            formula,
            omega,
            argument,
        })
    }
}

/// Large-coupling adiabatic jump: from where P_a first reaches ε·P_a(∞)
/// before the crossing to where the non-oscillatory part falls to
/// (1 + ε)·P_a(∞) after it.
pub fn jump_time_adiabatic_large(
    params: LzParams,
    epsilon: Epsilon,
) -> Result<TransitionTimes, TimesError> {
    let w = params.omega();
    let w2 = w * w;
    let x = PI * w2;
    let log_den = (16.0 * epsilon.value() * w2 * w2).ln();
    let initial = cube_root_form("initial jump time", w, x - log_den)?;
    // ln(e^x − 2) = x + ln(1 − 2e^{-x}); undefined for e^x ≤ 2.
    let log_num_final = if x > 2f64.ln() {
        x + (-2.0 * (-x).exp()).ln_1p()
    } else {
        f64::NEG_INFINITY
    };
    let fin = cube_root_form("final jump time", w, log_num_final - log_den)?;
    Ok(TransitionTimes {
        basis: Basis::Adiabatic,
        epsilon: epsilon.value(),
        jump: Some(fin + initial),
        jump_initial: Some(-initial),
        jump_final: Some(fin),
        relax: None,
    })
}

/// Time for the adiabatic oscillation amplitude to fall to ε·P_a(∞).
pub fn relax_time_adiabatic(params: LzParams, epsilon: Epsilon) -> Result<f64, TimesError> {
    let w = params.omega();
    let w2 = w * w;
    let e = epsilon.value();
    let x = PI * w2;
    // ln(e^x − 1) = x + ln(1 − e^{-x})
    let log_num = x + (-(-x).exp_m1()).ln();
    let log_den = (4.0 * e * e * w2 * w2).ln();
    cube_root_form("adiabatic relaxation time", w, log_num - log_den)
}

/// Small- and large-coupling limits of the closed forms.
pub mod limits {
    use std::f64::consts::PI;

    use super::Epsilon;

    pub fn jump_diabatic_small() -> f64 {
        (2.0 * PI).sqrt()
    }

    pub fn jump_diabatic_large(omega: f64) -> f64 {
        2.0 * omega
    }

    pub fn jump_adiabatic_small(omega: f64) -> f64 {
        2.0 * omega
    }

    pub fn jump_adiabatic_large(omega: f64, epsilon: Epsilon) -> f64 {
        (4.0 / epsilon.value()).powf(1.0 / 6.0) * omega.cbrt() * (PI * omega * omega / 6.0).exp()
    }

    pub fn relax_adiabatic_small(omega: f64, epsilon: Epsilon) -> f64 {
        let e = epsilon.value();
        (PI / (4.0 * e * e)).powf(1.0 / 6.0) * omega.powf(2.0 / 3.0)
    }

    pub fn relax_adiabatic_large(omega: f64, epsilon: Epsilon) -> f64 {
        (0.5 / epsilon.value()).cbrt() * omega.cbrt() * (PI * omega * omega / 6.0).exp()
    }

    /// Ratio of the large-coupling adiabatic jump and relaxation times.
    pub fn adiabatic_jump_relax_ratio(epsilon: Epsilon) -> f64 {
        (16.0 * epsilon.value()).powf(1.0 / 6.0)
    }

    /// Largest ω with a defined diabatic relaxation time.
    pub fn diabatic_relax_omega_max(epsilon: Epsilon) -> f64 {
        let e = epsilon.value();
        ((1.0 / (e * e)).ln_1p() / PI).sqrt()
    }
}

/// All transition times at one coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimesRow {
    pub omega: f64,
    pub diabatic: TransitionTimes,
    /// Adiabatic times with the recommended jump definition.
    pub adiabatic: TransitionTimes,
    /// Small-coupling adiabatic jump, tabulated for ω ≤ 1.
    pub adiabatic_jump_small: Option<f64>,
    /// Large-coupling construction, tabulated for ω ≥ 0.5 where defined.
    pub adiabatic_jump_large: Option<TransitionTimes>,
}

pub fn times_row(params: LzParams, epsilon: Epsilon) -> TimesRow {
    let w = params.omega();
    let diabatic = TransitionTimes {
        jump: Some(jump_time_diabatic(params)),
        relax: relax_time_diabatic(params, epsilon),
        ..TransitionTimes::empty(Basis::Diabatic, epsilon)
    };
    let small = (w <= ADIABATIC_SMALL_MAX).then(|| jump_time_adiabatic_small(params));
    let large = if w >= ADIABATIC_LARGE_MIN {
        jump_time_adiabatic_large(params, epsilon).ok()
    } else {
        None
    };
    let relax = relax_time_adiabatic(params, epsilon).ok();
    let mut adiabatic = TransitionTimes {
        relax,
        ..TransitionTimes::empty(Basis::Adiabatic, epsilon)
    };
    match (w < ADIABATIC_JUMP_CROSSOVER, large) {
        (false, Some(l)) => {
            adiabatic.jump = l.jump;
            adiabatic.jump_initial = l.jump_initial;
            adiabatic.jump_final = l.jump_final;
        }
        _ => adiabatic.jump = Some(jump_time_adiabatic_small(params)),
    }
    TimesRow {
        omega: w,
        diabatic,
        adiabatic,
        adiabatic_jump_small: small,
        adiabatic_jump_large: large,
    }
}

/// Evaluates [`times_row`] over a grid, in grid order.
///
/// Regime failures become absent entries; only a non-positive ω is an error.
pub fn times_table(omega_grid: &[f64], epsilon: Epsilon) -> Result<Vec<TimesRow>, TimesError> {
    let params = omega_grid
        .iter()
        .map(|&w| LzParams::new(w))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(params.par_iter().map(|&p| times_row(p, epsilon)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{boundary_values, p_infinity};

    fn params(w: f64) -> LzParams {
        LzParams::new(w).unwrap()
    }

    fn eps() -> Epsilon {
        Epsilon::default()
    }

    #[test]
    fn epsilon_domain() {
        assert!(Epsilon::new(0.0).is_err());
        assert!(Epsilon::new(1.0).is_err());
        assert!(Epsilon::new(f64::NAN).is_err());
        assert_eq!(Epsilon::new(0.25).unwrap().value(), 0.25);
    }

    #[test]
    fn diabatic_jump_limits() {
        let small = jump_time_diabatic(params(0.03));
        assert!((small / limits::jump_diabatic_small() - 1.0).abs() < 0.01);
        for &w in &[5.0, 10.0] {
            let r = jump_time_diabatic(params(w)) / limits::jump_diabatic_large(w);
            assert!((r - 1.0).abs() < 0.01);
        }
        // Frozen from a 30-digit evaluation of the closed form.
        assert!((jump_time_diabatic(params(1.0)) - 2.154_561_558_115_424).abs() < 1e-12);
    }

    #[test]
    fn jump_definitions_match_slope_at_crossing() {
        for i in 1..=40 {
            let p = params(0.15 * i as f64);
            let d = boundary_values(p, Basis::Diabatic);
            let lhs = jump_time_diabatic(p) * d.dp0;
            assert!((lhs - p_infinity(p, Basis::Diabatic)).abs() < 1e-12);
            let a = boundary_values(p, Basis::Adiabatic);
            let lhs = jump_time_adiabatic_small(p) * a.dp0;
            assert!((lhs - p_infinity(p, Basis::Adiabatic)).abs() < 1e-12);
        }
    }

    #[test]
    fn diabatic_jump_ratio_monotone_at_large_omega() {
        let mut prev = 0.0;
        for i in 0..=80 {
            let w = 2.0 + 0.1 * i as f64;
            let r = jump_time_diabatic(params(w)) / w;
            assert!(r < 2.0 && r > prev, "omega = {w}");
            prev = r;
        }
    }

    #[test]
    fn diabatic_relax_domain() {
        let e = eps();
        let edge = limits::diabatic_relax_omega_max(e);
        assert!((edge - 1.212_038_978_927_748).abs() < 1e-12);
        assert!(relax_time_diabatic(params(edge * (1.0 + 1e-9)), e).is_none());
        assert!(relax_time_diabatic(params(1.25), e).is_none());
        let near = relax_time_diabatic(params(edge * (1.0 - 1e-9)), e).unwrap();
        assert!(near < 1e-3);
        let mut prev = f64::INFINITY;
        for i in 1..=120 {
            let t = relax_time_diabatic(params(0.01 * i as f64), e).unwrap();
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn diabatic_relax_value() {
        let t = relax_time_diabatic(params(0.5), eps()).unwrap();
        let direct = 0.5 * (1.0 / (0.01 * ((PI * 0.25).exp() - 1.0)) - 1.0).sqrt();
        assert!((t - direct).abs() < 1e-12);
    }

    #[test]
    fn adiabatic_small_jump() {
        let t = jump_time_adiabatic_small(params(0.1));
        assert!((t - 0.2 * (-0.005 * PI).exp()).abs() < 1e-16);
        let tiny = jump_time_adiabatic_small(params(1e-4));
        assert!((tiny / 2e-4 - 1.0).abs() < 1e-7);
        let ratio = jump_time_adiabatic_small(params(0.03)) / jump_time_diabatic(params(0.03));
        assert!((ratio / (0.06 / (2.0 * PI).sqrt()) - 1.0).abs() < 0.01);
    }

    #[test]
    fn adiabatic_large_jump() {
        let e = eps();
        let t = jump_time_adiabatic_large(params(3.0), e).unwrap();
        let (i, f) = (t.jump_initial.unwrap(), t.jump_final.unwrap());
        assert!(i < 0.0 && f > 0.0);
        assert_eq!(t.jump.unwrap(), f - i);
        let approx = limits::jump_adiabatic_large(3.0, e);
        assert!((t.jump.unwrap() / approx - 1.0).abs() < 0.1);

        // |initial| / final → 1 as the −2 in the final-time formula fades.
        let mut prev = f64::INFINITY;
        for &w in &[1.0, 1.5, 2.0, 2.5] {
            let t = jump_time_adiabatic_large(params(w), e).unwrap();
            let r = -t.jump_initial.unwrap() / t.jump_final.unwrap();
            assert!(r > 1.0 && r < prev, "omega = {w}");
            prev = r;
        }
        let t = jump_time_adiabatic_large(params(4.0), e).unwrap();
        assert!((-t.jump_initial.unwrap() / t.jump_final.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adiabatic_large_jump_regime() {
        // e^{πω²} ≤ 2 below ω ≈ 0.47.
        assert!(matches!(
            jump_time_adiabatic_large(params(0.4), eps()),
            Err(TimesError::Regime { .. })
        ));
        assert!(jump_time_adiabatic_large(params(0.5), eps()).is_ok());
        // Stays finite where e^{πω²} overflows.
        let t = jump_time_adiabatic_large(params(15.0), eps()).unwrap();
        assert!(t.jump.unwrap().is_finite());
    }

    #[test]
    fn adiabatic_relax_limits() {
        let e = eps();
        let t = relax_time_adiabatic(params(0.05), e).unwrap();
        assert!((t / limits::relax_adiabatic_small(0.05, e) - 1.0).abs() < 0.02);
        let t = relax_time_adiabatic(params(3.0), e).unwrap();
        assert!((t / limits::relax_adiabatic_large(3.0, e) - 1.0).abs() < 0.05);
        for &w in &[3.0, 4.0, 5.0] {
            let j = jump_time_adiabatic_large(params(w), e)
                .unwrap()
                .jump
                .unwrap();
            let r = relax_time_adiabatic(params(w), e).unwrap();
            let ratio = j / r / limits::adiabatic_jump_relax_ratio(e);
            assert!((ratio - 1.0).abs() < 0.1);
        }
        assert!((limits::adiabatic_jump_relax_ratio(e) - 1.081_484).abs() < 1e-6);
    }

    #[test]
    fn adiabatic_relax_monotone() {
        let mut prev = 0.0;
        for i in 0..=60 {
            let t = relax_time_adiabatic(params(1.0 + 0.1 * i as f64), eps()).unwrap();
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn adiabatic_relax_defined_for_every_epsilon() {
        // (e^{πω²} − 1)/(4ε²ω⁴) stays above 3.8/ε² for all ω.
        for &e in &[0.1, 0.5, 0.9, 0.999] {
            let e = Epsilon::new(e).unwrap();
            for i in 1..=100 {
                assert!(relax_time_adiabatic(params(0.05 * i as f64), e).is_ok());
            }
        }
    }

    #[test]
    fn small_and_large_adiabatic_jump_overlap() {
        // The two definitions meet near ω ≈ 0.5 and drift apart towards ω = 1.
        let e = eps();
        let at = |w: f64| {
            let small = jump_time_adiabatic_small(params(w));
            let large = jump_time_adiabatic_large(params(w), e)
                .unwrap()
                .jump
                .unwrap();
            large / small
        };
        assert!((at(0.5) - 1.360_248).abs() < 1e-5);
        assert!((at(0.75) - 2.548_451).abs() < 1e-5);
        assert!((at(1.0) - 5.691_890).abs() < 1e-5);
    }

    #[test]
    fn table_rows_match_direct_calls() {
        let e = eps();
        let rows = times_table(&[1.0], e).unwrap();
        let r = &rows[0];
        let p = params(1.0);
        assert_eq!(r.diabatic.jump, Some(jump_time_diabatic(p)));
        assert_eq!(r.diabatic.relax, relax_time_diabatic(p, e));
        assert_eq!(r.adiabatic_jump_small, Some(jump_time_adiabatic_small(p)));
        let large = jump_time_adiabatic_large(p, e).unwrap();
        assert_eq!(r.adiabatic_jump_large, Some(large));
        assert_eq!(r.adiabatic.jump, large.jump);
        assert_eq!(r.adiabatic.relax, relax_time_adiabatic(p, e).ok());
    }

    #[test]
    fn table_coverage() {
        let grid: Vec<f64> = (0..60).map(|i| 0.03 * 1.1f64.powi(i)).collect();
        let rows = times_table(&grid, eps()).unwrap();
        assert_eq!(rows.len(), grid.len());
        for (row, &w) in rows.iter().zip(&grid) {
            assert_eq!(row.omega, w);
            assert_eq!(row.adiabatic_jump_small.is_some(), w <= 1.0);
            assert_eq!(row.diabatic.relax.is_some(), w <= 1.212);
            assert!(row.adiabatic.jump.is_some());
            if let (Some(i), Some(f)) = (row.adiabatic.jump_initial, row.adiabatic.jump_final) {
                assert!((row.adiabatic.jump.unwrap() - (f - i)).abs() < 1e-12 * f.abs().max(1.0));
            }
        }
        assert!(times_table(&[1.0, -1.0], eps()).is_err());
    }
}
