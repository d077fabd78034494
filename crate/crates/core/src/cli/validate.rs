//! Cross-checks run by the `validate` command.
//!
//! Each check reports a measured deviation next to its limit. Limits are
//! multiplied by the run's `tolerance_scale`, except for counting checks
//! whose limit is zero.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::output::{Cell, Row};
use super::RunSpec;
use crate::approx::pd_approx;
use crate::engine::measure::{decay_exponent, find_extrema, peak_amplitudes};
use crate::engine::{
    adiabatic_oracle_trace, adiabatic_trace, diabatic_trace, integrate_schrodinger_oracle,
    measure_times_numeric, uniform_grid, IntegratorConfig,
};
use crate::model::{boundary_values, p_infinity, Basis, LzParams};
use crate::specialfn::{chi_exact, chi_series};
use crate::times::{
    jump_time_adiabatic_large, jump_time_diabatic, limits, relax_time_adiabatic,
    relax_time_diabatic, Epsilon,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
    pub detail: String,
}

impl Row for CheckResult {
    const COLUMNS: &'static [&'static str] = &["check", "status", "measured", "limit", "detail"];

    fn cells(&self) -> Vec<Cell<'_>> {
        vec![
            Cell::Text(self.check),
            Cell::Text(if self.passed { "PASS" } else { "FAIL" }),
            Cell::Num(self.measured),
            Cell::Num(self.limit),
            Cell::Text(&self.detail),
        ]
    }
}

fn result(
    check: &'static str,
    measured: f64,
    limit: f64,
    detail: impl Into<String>,
) -> CheckResult {
    CheckResult {
        check,
        passed: measured <= limit,
        measured,
        limit,
        detail: detail.into(),
    }
}

fn failure(check: &'static str, limit: f64, err: impl std::fmt::Display) -> CheckResult {
    CheckResult {
        check,
        passed: false,
        measured: f64::NAN,
        limit,
        detail: err.to_string(),
    }
}

fn params(w: f64) -> LzParams {
    LzParams::new(w).expect("check couplings are positive")
}

const ORACLE_START: f64 = -300.0;

fn probability_sum(s: f64) -> CheckResult {
    let dev = (0..50)
        .map(|i| {
            let p = params(0.05 + (5.0 - 0.05) * i as f64 / 49.0);
            (p_infinity(p, Basis::Diabatic) + p_infinity(p, Basis::Adiabatic) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    result("probability_sum", dev, 1e-14 * s, "50 omega in [0.05, 5]")
}

fn jump_small_omega(s: f64) -> CheckResult {
    let dev = (jump_time_diabatic(params(0.03)) / (2.0 * PI).sqrt() - 1.0).abs();
    result("jump_small_omega", dev, 0.01 * s, "relative, omega = 0.03")
}

fn jump_large_omega(s: f64) -> CheckResult {
    let dev = [5.0, 10.0]
        .iter()
        .map(|&w| (jump_time_diabatic(params(w)) / (2.0 * w) - 1.0).abs())
        .fold(0.0, f64::max);
    result(
        "jump_large_omega",
        dev,
        0.01 * s,
        "relative, omega in {5, 10}",
    )
}

fn relax_threshold() -> CheckResult {
    let eps = Epsilon::default();
    let edge = limits::diabatic_relax_omega_max(eps);
    let grid = (0..=400)
        .map(|i| 0.05 + 0.005 * i as f64)
        .chain([edge * (1.0 - 1e-9), edge * (1.0 + 1e-9)]);
    let mismatches = grid
        .filter(|&w| relax_time_diabatic(params(w), eps).is_none() != (w > edge))
        .count();
    result(
        "relax_threshold",
        mismatches as f64,
        0.0,
        format!("absent exactly above omega = {edge:.6}"),
    )
}

fn crossing_value(cfg: &IntegratorConfig, s: f64) -> CheckResult {
    let p = params(1.0);
    match diabatic_trace(p, cfg, &[-1.0, 0.0, 1.0]) {
        Ok(tr) => {
            let dev = (tr.samples[1].p - boundary_values(p, Basis::Diabatic).p0).abs();
            result("crossing_value", dev, 1e-12 * s, "omega = 1, tau = 0")
        }
        Err(e) => failure("crossing_value", 1e-12 * s, e),
    }
}

fn landau_zener_limit(cfg: &IntegratorConfig, s: f64) -> CheckResult {
    let p = params(1.0);
    let p_inf = p_infinity(p, Basis::Diabatic);
    let est = pd_approx(p, 40.0);
    let bound = (est.nonoscillatory - p_inf).abs() + est.amplitude();
    match diabatic_trace(p, cfg, &[0.0, 40.0]) {
        Ok(tr) => result(
            "landau_zener_limit",
            (tr.samples[1].p - p_inf).abs(),
            bound * s,
            "omega = 1, tau = 40, drift plus envelope bound",
        ),
        Err(e) => failure("landau_zener_limit", bound * s, e),
    }
}

fn oracle_equivalence(cfg: &IntegratorConfig, s: f64) -> CheckResult {
    let grid = uniform_grid(-10.0, 30.0, 0.05);
    let omegas = [0.3, 0.5, 1.0];
    let limit = omegas
        .iter()
        .map(|&w| 2.0 / ORACLE_START.hypot(w))
        .fold(f64::INFINITY, f64::min)
        * s;
    let devs: Result<Vec<f64>, _> = omegas
        .par_iter()
        .map(|&w| {
            let p = params(w);
            let a = diabatic_trace(p, cfg, &grid)?;
            let b = integrate_schrodinger_oracle(p, ORACLE_START, cfg, &grid)?;
            Ok::<_, crate::engine::EngineError>(max_diff(a.probabilities(), b.probabilities()))
        })
        .collect();
    match devs {
        Ok(d) => result(
            "oracle_equivalence",
            d.into_iter().fold(0.0, f64::max),
            limit,
            "omega in {0.3, 0.5, 1}, tau in [-10, 30], oracle from tau = -300",
        ),
        Err(e) => failure("oracle_equivalence", limit, e),
    }
}

fn cross_basis(cfg: &IntegratorConfig, s: f64) -> CheckResult {
    let grid = uniform_grid(-10.0, 30.0, 0.05);
    let devs: Result<Vec<f64>, _> = [0.3, 1.0, 2.0]
        .par_iter()
        .map(|&w| {
            let p = params(w);
            let a = adiabatic_trace(p, cfg, &grid)?;
            let b = adiabatic_oracle_trace(p, ORACLE_START, cfg, &grid)?;
            Ok::<_, crate::engine::EngineError>(max_diff(a.probabilities(), b.probabilities()))
        })
        .collect();
    match devs {
        Ok(d) => result(
            "cross_basis",
            d.into_iter().fold(0.0, f64::max),
            1e-4 * s,
            "omega in {0.3, 1, 2}, rotated oracle amplitudes",
        ),
        Err(e) => failure("cross_basis", 1e-4 * s, e),
    }
}

fn max_diff(a: impl Iterator<Item = f64>, b: impl Iterator<Item = f64>) -> f64 {
    a.zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn chi_expansions(s: f64) -> CheckResult {
    let small = (1..=30).map(|i| 0.01 * i as f64).map(|w| {
        let exact = chi_exact(w).value;
        (chi_series(w).value - exact).abs() / (10.0 * w.powi(10) + f64::EPSILON * exact)
    });
    let large = (0..=34)
        .map(|i| 3.0 + 0.5 * i as f64)
        .map(|w| (chi_series(w).value - chi_exact(w).value).abs() / (10.0 * w.powi(-10)));
    let ratio = small.chain(large).fold(0.0, f64::max);
    result(
        "chi_expansions",
        ratio,
        s,
        "residual over 10*omega^(+-10) plus one rounding unit, omega in [0.01, 0.3] and [3, 20]",
    )
}

fn relax_measured(cfg: &IntegratorConfig, s: f64) -> CheckResult {
    let eps = Epsilon::default();
    let p = params(0.5);
    let expected = relax_time_diabatic(p, eps).expect("defined below the threshold");
    let measured = diabatic_trace(p, cfg, &uniform_grid(-2.0, 20.0, 0.002))
        .map_err(|e| e.to_string())
        .and_then(|tr| {
            measure_times_numeric(&tr, p_infinity(p, Basis::Diabatic), eps)
                .map_err(|e| e.to_string())
        });
    match measured.map(|t| t.relax) {
        Ok(Some(r)) => result(
            "relax_measured",
            (r / expected - 1.0).abs(),
            0.15 * s,
            format!("omega = 0.5, measured {r:.4} vs closed form {expected:.4}"),
        ),
        Ok(None) => failure("relax_measured", 0.15 * s, "no relaxation found"),
        Err(e) => failure("relax_measured", 0.15 * s, e),
    }
}

fn decay_slope(cfg: &IntegratorConfig, s: f64) -> CheckResult {
    let fine = IntegratorConfig::with_tolerances(cfg.rel_tol.min(1e-12), cfg.abs_tol.min(1e-14));
    let grid = uniform_grid(0.0, 32.0, 0.002);
    let slope = adiabatic_trace(params(2.0), &fine, &grid)
        .map_err(|e| e.to_string())
        .and_then(|tr| {
            let peaks = peak_amplitudes(&find_extrema(&tr.samples, 0.0));
            decay_exponent(&peaks, 3.0, 30.0).map_err(|e| e.to_string())
        });
    match slope {
        Ok(k) => result(
            "decay_exponent",
            (k + 3.0).abs(),
            0.15 * s,
            format!("omega = 2, fitted slope {k:.4}"),
        ),
        Err(e) => failure("decay_exponent", 0.15 * s, e),
    }
}

fn jump_relax_ratio(s: f64) -> CheckResult {
    let eps = Epsilon::default();
    let target = limits::adiabatic_jump_relax_ratio(eps);
    let dev = [3.0, 4.0]
        .iter()
        .map(|&w| {
            let p = params(w);
            let jump = jump_time_adiabatic_large(p, eps).ok().and_then(|t| t.jump);
            let relax = relax_time_adiabatic(p, eps).ok();
            match (jump, relax) {
                (Some(j), Some(r)) => (j / r / target - 1.0).abs(),
                _ => f64::INFINITY,
            }
        })
        .fold(0.0, f64::max);
    result(
        "jump_relax_ratio",
        dev,
        0.1 * s,
        format!("omega in {{3, 4}}, relative to {target:.4}"),
    )
}

fn figures_deterministic(spec: &RunSpec) -> CheckResult {
    let (a, b) = rayon::join(|| super::figure_bundle(spec), || super::figure_bundle(spec));
    match (a, b) {
        (Ok(a), Ok(b)) => {
            let differing =
                a.iter().zip(&b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
            result(
                "figures_deterministic",
                differing as f64,
                0.0,
                format!("{} files rendered twice", a.len()),
            )
        }
        (Err(e), _) | (_, Err(e)) => failure("figures_deterministic", 0.0, e),
    }
}

/// Runs every check, in a fixed order.
pub fn run_checks(spec: &RunSpec) -> Vec<CheckResult> {
    let s = spec.tolerance_scale;
    let cfg = spec.integrator;
    let numeric: Vec<CheckResult> = (0..8usize)
        .into_par_iter()
        .map(|i| match i {
            0 => crossing_value(&cfg, s),
            1 => landau_zener_limit(&cfg, s),
            2 => oracle_equivalence(&cfg, s),
            3 => cross_basis(&cfg, s),
            4 => relax_measured(&cfg, s),
            5 => decay_slope(&cfg, s),
            6 => figures_deterministic(spec),
            _ => chi_expansions(s),
        })
        .collect();
    let mut out = vec![
        probability_sum(s),
        jump_small_omega(s),
        jump_large_omega(s),
        relax_threshold(),
    ];
    out.extend(numeric);
    out.push(jump_relax_ratio(s));
    out
}
