//! Numerical transition probabilities.
//!
//! The primary route integrates third-order equations for the population
//! inversion w = 2P − 1, started at the crossing from exact values, in both
//! bases. A direct Schrödinger integration from a large negative time serves
//! as an independent oracle. [`measure`] extracts jump and relaxation times
//! from sampled traces.
//!
//! All integrations use an adaptive Dormand–Prince 5(4) pair and report
//! samples through its fourth-order dense output, so sample grids are
//! independent of the accepted steps.

mod inversion;
pub mod measure;
mod oracle;
mod rk;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Basis, ModelError};

pub use inversion::{
    adiabatic_trace, diabatic_trace, integrate_adiabatic_inversion, integrate_diabatic_inversion,
};
pub use measure::{measure_times_numeric, MeasureError};
pub use oracle::{
    adiabatic_oracle_trace, integrate_schrodinger_oracle, schrodinger_amplitudes, OracleStart,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("step size underflow at tau/theta = {at}")]
    StepUnderflow { at: f64 },
    #[error("step budget exhausted at tau/theta = {at}")]
    TooManySteps { at: f64 },
    #[error("integration stopped at {reached} before reaching {requested}")]
    HorizonNotReached { requested: f64, reached: f64 },
    #[error(
        "requested tau = {tau} maps to theta = {theta}, inside the guard band {guard} \
         where cot(2 theta) diverges"
    )]
    GuardBand { tau: f64, theta: f64, guard: f64 },
    #[error("requested |tau| = {tau} exceeds the configured horizon {tau_max}")]
    BeyondHorizon { tau: f64, tau_max: f64 },
    #[error("sample grid must be finite and strictly increasing")]
    UnorderedGrid,
    #[error("samples on the {0} side of the crossing were requested from the other direction")]
    WrongSide(Direction),
    #[error("oracle start tau_initial = {tau_initial} must lie before the first sample {first}")]
    OracleStart { tau_initial: f64, first: f64 },
    #[error("invalid integrator configuration: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Side of the crossing an inversion integration runs towards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub(crate) fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Forward => "positive",
            Direction::Backward => "negative",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step in the independent variable (τ, or ϑ in the adiabatic basis).
    pub max_step: f64,
    /// Length of the power-series step off the singular point τ = 0 of the
    /// diabatic equation.
    pub origin_offset: f64,
    /// Largest |τ| any integration may be asked to reach.
    pub tau_max: f64,
    /// Closest approach of ϑ to 0 or π/2 in the adiabatic integration.
    pub theta_guard: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            origin_offset: 1e-3,
            tau_max: 1e4,
            theta_guard: 1e-4,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.rel_tol) || !positive(self.abs_tol) {
            return Err(EngineError::Config("tolerances must be positive"));
        }
        if self.max_step.is_nan() || self.max_step <= 0.0 {
            return Err(EngineError::Config("max_step must be positive"));
        }
        if !positive(self.origin_offset) || self.origin_offset > 0.1 {
            return Err(EngineError::Config("origin_offset must lie in (0, 0.1]"));
        }
        if self.tau_max.is_nan() || self.tau_max <= 0.0 {
            return Err(EngineError::Config("tau_max must be positive"));
        }
        if !positive(self.theta_guard) || self.theta_guard >= std::f64::consts::FRAC_PI_8 {
            return Err(EngineError::Config("theta_guard must lie in (0, pi/8)"));
        }
        Ok(())
    }

    pub(crate) fn step_control(&self) -> rk::StepControl {
        rk::StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    InversionOde,
    SchrodingerOracle,
    ClosedFormApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub tau: f64,
    pub p: f64,
}

/// Transition probability sampled on a strictly increasing τ grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityTrace {
    pub basis: Basis,
    pub source: TraceSource,
    pub samples: Vec<Sample>,
}

impl ProbabilityTrace {
    pub fn new(basis: Basis, source: TraceSource, samples: Vec<Sample>) -> Self {
        debug_assert!(samples.windows(2).all(|w| w[0].tau < w[1].tau));
        Self {
            basis,
            source,
            samples,
        }
    }

    pub fn taus(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.tau)
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.p)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Probability at a grid point, if τ is on the grid.
    pub fn at(&self, tau: f64) -> Option<f64> {
        self.samples
            .binary_search_by(|s| s.tau.total_cmp(&tau))
            .ok()
            .map(|i| self.samples[i].p)
    }
}

/// Uniform grid `min, min + step, …` up to and including `max` (within
/// rounding).
///
/// When `min` is a whole multiple of `step` the points are `k·step` for
/// integer k, so such a grid contains τ = 0 exactly.
pub fn uniform_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    if step.is_nan() || step <= 0.0 || !min.is_finite() || !max.is_finite() || max < min {
        return Vec::new();
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    let k0 = (min / step).round();
    if (min / step - k0).abs() < 1e-9 {
        (0..=n).map(|i| (k0 + i as f64) * step).collect()
    } else {
        (0..=n).map(|i| min + i as f64 * step).collect()
    }
}

pub(crate) fn check_grid(taus: &[f64]) -> Result<(), EngineError> {
    let ordered = taus.iter().all(|t| t.is_finite()) && taus.windows(2).all(|w| w[0] < w[1]);
    if ordered {
        Ok(())
    } else {
        Err(EngineError::UnorderedGrid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(-1.0, 1.0, 0.1);
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], -1.0);
        assert!((g[20] - 1.0).abs() < 1e-15);
        assert!(g.contains(&0.0));
        assert!(uniform_grid(-10.0, 10.0, 0.001).contains(&0.0));
        assert!(uniform_grid(1.0, 0.0, 0.1).is_empty());
        assert!(uniform_grid(0.0, 1.0, 0.0).is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        let c = IntegratorConfig {
            origin_offset: 0.0,
            ..IntegratorConfig::default()
        };
        assert!(c.validate().is_err());
        let c = IntegratorConfig::with_tolerances(-1.0, 1e-12);
        assert!(c.validate().is_err());
    }

    #[test]
    fn trace_lookup() {
        let t = ProbabilityTrace::new(
            Basis::Diabatic,
            TraceSource::ClosedFormApprox,
            vec![Sample { tau: 0.0, p: 0.1 }, Sample { tau: 0.5, p: 0.2 }],
        );
        assert_eq!(t.at(0.5), Some(0.2));
        assert_eq!(t.at(0.25), None);
    }
}
