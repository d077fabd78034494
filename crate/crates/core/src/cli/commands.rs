use rayon::prelude::*;
use serde::Serialize;

use super::output::{render, Cell, Row};
use super::{log_grid, CliError, Format, RunSpec, TauRange, DEFAULT_TIMES_GRID};
use crate::approx::{pa_approx, pd_approx};
use crate::engine::{adiabatic_trace, diabatic_trace, measure_times_numeric, IntegratorConfig};
use crate::model::{p_infinity, Basis, LzParams};
use crate::times::{times_table, Epsilon, TimesRow};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub omega: f64,
    pub basis: &'static str,
    pub tau: f64,
    pub tau_over_omega: f64,
    pub p_engine: f64,
    pub p_approx: f64,
    pub envelope_upper: f64,
    pub envelope_lower: f64,
    pub nonoscillatory: f64,
    pub valid_flag: bool,
}

impl Row for TraceRow {
    const COLUMNS: &'static [&'static str] = &[
        "omega",
        "basis",
        "tau",
        "tau_over_omega",
        "p_engine",
        "p_approx",
        "envelope_upper",
        "envelope_lower",
        "nonoscillatory",
        "valid_flag",
    ];

    fn cells(&self) -> Vec<Cell<'_>> {
        vec![
            Cell::Num(self.omega),
            Cell::Text(self.basis),
            Cell::Num(self.tau),
            Cell::Num(self.tau_over_omega),
            Cell::Num(self.p_engine),
            Cell::Num(self.p_approx),
            Cell::Num(self.envelope_upper),
            Cell::Num(self.envelope_lower),
            Cell::Num(self.nonoscillatory),
            Cell::Flag(self.valid_flag),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimesOutRow {
    pub omega: f64,
    pub jump_d: f64,
    pub relax_d: Option<f64>,
    /// Adiabatic jump with the definition appropriate to ω.
    pub jump_a: Option<f64>,
    pub jump_a_small: Option<f64>,
    pub jump_a_large: Option<f64>,
    pub jump_a_initial: Option<f64>,
    pub jump_a_final: Option<f64>,
    pub relax_a: Option<f64>,
}

impl From<&TimesRow> for TimesOutRow {
    fn from(r: &TimesRow) -> Self {
        Self {
            omega: r.omega,
            jump_d: r.diabatic.jump.unwrap_or(f64::NAN),
            relax_d: r.diabatic.relax,
            jump_a: r.adiabatic.jump,
            jump_a_small: r.adiabatic_jump_small,
            jump_a_large: r.adiabatic_jump_large.and_then(|l| l.jump),
            jump_a_initial: r.adiabatic_jump_large.and_then(|l| l.jump_initial),
            jump_a_final: r.adiabatic_jump_large.and_then(|l| l.jump_final),
            relax_a: r.adiabatic.relax,
        }
    }
}

impl Row for TimesOutRow {
    const COLUMNS: &'static [&'static str] = &[
        "omega",
        "jump_d",
        "relax_d",
        "jump_a",
        "jump_a_small",
        "jump_a_large",
        "jump_a_initial",
        "jump_a_final",
        "relax_a",
    ];

    fn cells(&self) -> Vec<Cell<'_>> {
        vec![
            Cell::Num(self.omega),
            Cell::Num(self.jump_d),
            Cell::Opt(self.relax_d),
            Cell::Opt(self.jump_a),
            Cell::Opt(self.jump_a_small),
            Cell::Opt(self.jump_a_large),
            Cell::Opt(self.jump_a_initial),
            Cell::Opt(self.jump_a_final),
            Cell::Opt(self.relax_a),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkerRow {
    pub name: &'static str,
    pub value: Option<f64>,
}

impl Row for MarkerRow {
    const COLUMNS: &'static [&'static str] = &["name", "value"];

    fn cells(&self) -> Vec<Cell<'_>> {
        vec![Cell::Text(self.name), Cell::Opt(self.value)]
    }
}

fn trace_one(
    omega: f64,
    basis: Basis,
    range: &TauRange,
    cfg: &IntegratorConfig,
) -> Result<Vec<TraceRow>, CliError> {
    let params = LzParams::new(omega)?;
    let grid = range.grid(omega);
    let trace = match basis {
        Basis::Diabatic => diabatic_trace(params, cfg, &grid)?,
        Basis::Adiabatic => adiabatic_trace(params, cfg, &grid)?,
    };
    Ok(trace
        .samples
        .iter()
        .map(|s| {
            let est = match basis {
                Basis::Diabatic => pd_approx(params, s.tau),
                Basis::Adiabatic => pa_approx(params, s.tau),
            };
            TraceRow {
                omega,
                basis: basis.short(),
                tau: s.tau,
                tau_over_omega: s.tau / omega,
                p_engine: s.p,
                p_approx: est.p,
                envelope_upper: est.envelope_upper,
                envelope_lower: est.envelope_lower,
                nonoscillatory: est.nonoscillatory,
                valid_flag: est.valid,
            }
        })
        .collect())
}

/// Traces for every (ω, basis) pair of `jobs`, concatenated in job order.
fn trace_jobs(
    jobs: &[(f64, Basis, TauRange)],
    cfg: &IntegratorConfig,
) -> Result<Vec<TraceRow>, CliError> {
    let parts = jobs
        .par_iter()
        .map(|(w, b, r)| trace_one(*w, *b, r, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(parts.concat())
}

/// Rows of the `trace` command: ω in grid order, then basis, then τ.
pub fn trace_rows(spec: &RunSpec) -> Result<Vec<TraceRow>, CliError> {
    let jobs: Vec<_> = spec
        .omegas
        .iter()
        .flat_map(|&w| spec.basis.bases().iter().map(move |&b| (w, b, spec.tau)))
        .collect();
    trace_jobs(&jobs, &spec.integrator)
}

pub fn times_rows(spec: &RunSpec) -> Result<Vec<TimesOutRow>, CliError> {
    Ok(times_table(&spec.omegas, spec.epsilon)?
        .iter()
        .map(TimesOutRow::from)
        .collect())
}

pub const FIGURE_OMEGAS: [f64; 6] = [0.03, 0.1, 0.3, 1.0, 3.0, 10.0];
pub const DETAIL_OMEGA: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FigureFile {
    pub name: String,
    pub contents: String,
}

fn diabatic_range(omega: f64) -> TauRange {
    TauRange {
        min: -(5.0 * omega).max(10.0),
        max: (5.0 * omega).max(30.0),
        step: 0.02,
        over_omega: false,
    }
}

const DETAIL_RANGE: TauRange = TauRange {
    min: -10.0,
    max: 30.0,
    step: 0.01,
    over_omega: false,
};

fn detail_markers(rows: &[TraceRow], epsilon: Epsilon) -> Result<Vec<MarkerRow>, CliError> {
    let params = LzParams::new(DETAIL_OMEGA)?;
    let p_inf = p_infinity(params, Basis::Adiabatic);
    let eps = epsilon.value();
    let closed = crate::times::times_row(params, epsilon);
    let trace = crate::engine::ProbabilityTrace::new(
        Basis::Adiabatic,
        crate::engine::TraceSource::InversionOde,
        rows.iter()
            .map(|r| crate::engine::Sample {
                tau: r.tau,
                p: r.p_engine,
            })
            .collect(),
    );
    let measured = measure_times_numeric(&trace, p_inf, epsilon)?;
    let m = |name, value| MarkerRow { name, value };
    Ok(vec![
        m("omega", Some(DETAIL_OMEGA)),
        m("epsilon", Some(eps)),
        m("p_inf", Some(p_inf)),
        m("p_inf_upper", Some((1.0 + eps) * p_inf)),
        m("p_inf_lower", Some((1.0 - eps) * p_inf)),
        m("jump_initial", closed.adiabatic.jump_initial),
        m("jump_final", closed.adiabatic.jump_final),
        m("relax", closed.adiabatic.relax),
        m("measured_jump_initial", measured.jump_initial),
        m("measured_jump_final", measured.jump_final),
        m("measured_relax", measured.relax),
    ])
}

/// The preset figure data: traces over six couplings in both bases, the
/// ω = 2 adiabatic detail with its markers, and a transition-time table.
pub fn figure_bundle(spec: &RunSpec) -> Result<Vec<FigureFile>, CliError> {
    let cfg = &spec.integrator;
    let ext = match spec.format {
        Format::Csv => "csv",
        Format::Json => "jsonl",
    };
    let file = |stem: &str, contents: String| FigureFile {
        name: format!("{stem}.{ext}"),
        contents,
    };
    let meta = |what: &str| {
        format!(
            "lztimes {} schema={} figures {what} epsilon={:?} rel_tol={:?} abs_tol={:?}",
            env!("CARGO_PKG_VERSION"),
            super::output::SCHEMA_VERSION,
            spec.epsilon.value(),
            cfg.rel_tol,
            cfg.abs_tol,
        )
    };

    let diabatic_jobs: Vec<_> = FIGURE_OMEGAS
        .iter()
        .map(|&w| (w, Basis::Diabatic, diabatic_range(w)))
        .collect();
    let adiabatic_jobs: Vec<_> = FIGURE_OMEGAS
        .iter()
        .map(|&w| (w, Basis::Adiabatic, TauRange::DEFAULT_OVER_OMEGA))
        .collect();
    let ((diabatic, adiabatic), detail) = rayon::join(
        || {
            rayon::join(
                || trace_jobs(&diabatic_jobs, cfg),
                || trace_jobs(&adiabatic_jobs, cfg),
            )
        },
        || trace_one(DETAIL_OMEGA, Basis::Adiabatic, &DETAIL_RANGE, cfg),
    );
    let (diabatic, adiabatic, detail) = (diabatic?, adiabatic?, detail?);
    let markers = detail_markers(&detail, spec.epsilon)?;

    let (lo, hi, n) = DEFAULT_TIMES_GRID;
    let times: Vec<TimesOutRow> = times_table(&log_grid(lo, hi, n), spec.epsilon)?
        .iter()
        .map(TimesOutRow::from)
        .collect();

    Ok(vec![
        file(
            "diabatic_traces",
            render(
                &diabatic,
                &meta("diabatic traces, tau in [-max(10,5w), max(30,5w)] step 0.02"),
                spec.format,
            ),
        ),
        file(
            "adiabatic_traces",
            render(
                &adiabatic,
                &meta("adiabatic traces, tau/omega in [-5, 10] step 0.01"),
                spec.format,
            ),
        ),
        file(
            "omega2_detail",
            render(
                &detail,
                &meta("adiabatic trace at omega=2, tau in [-10, 30] step 0.01"),
                spec.format,
            ),
        ),
        file(
            "omega2_markers",
            render(&markers, &meta("levels and times for omega=2"), spec.format),
        ),
        file(
            "times",
            render(
                &times,
                &meta(&format!(
                    "transition times on {n} log-spaced omega in [{lo}, {hi}]"
                )),
                spec.format,
            ),
        ),
    ])
}
