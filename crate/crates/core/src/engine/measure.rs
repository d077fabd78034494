//! Numeric jump and relaxation times from sampled traces.
//!
//! Oscillation amplitudes are measured against envelopes: at each extremum
//! the opposite envelope is interpolated between the two neighbouring
//! extrema, the midline is halfway between the envelopes, and the amplitude
//! is the distance from the extremum to that midline.

use thiserror::Error;

use super::{ProbabilityTrace, Sample};
use crate::model::Basis;
use crate::times::{Epsilon, TransitionTimes};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("trace ends at tau = {last_tau} while the oscillation amplitude {amplitude} is still above {threshold}")]
    InsufficientHorizon {
        last_tau: f64,
        amplitude: f64,
        threshold: f64,
    },
    #[error("trace needs samples on both sides of tau = 0 or at least three samples from it")]
    NoCrossingSlope,
    #[error("fewer than two peaks in the fitting window")]
    TooFewPeaks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub tau: f64,
    pub p: f64,
    pub kind: ExtremumKind,
}

/// Local extremum of the oscillation, with its distance to the midline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakAmplitude {
    pub tau: f64,
    pub amplitude: f64,
    pub midline: f64,
}

/// Strict local extrema with τ > `tau_from`, refined by a parabola through
/// the extremal sample and its neighbours.
pub fn find_extrema(samples: &[Sample], tau_from: f64) -> Vec<Extremum> {
    let mut out = Vec::new();
    for win in samples.windows(3) {
        let [a, b, c] = [win[0], win[1], win[2]];
        if b.tau <= tau_from {
            continue;
        }
        let kind = if b.p > a.p && b.p >= c.p {
            ExtremumKind::Maximum
        } else if b.p < a.p && b.p <= c.p {
            ExtremumKind::Minimum
        } else {
            continue;
        };
        // Consecutive extrema must alternate; equal-valued plateaus give one.
        if out.last().map(|e: &Extremum| e.kind) == Some(kind) {
            continue;
        }
        out.push(refine(a, b, c, kind));
    }
    out
}

fn refine(a: Sample, b: Sample, c: Sample, kind: ExtremumKind) -> Extremum {
    let (h1, h2) = (b.tau - a.tau, c.tau - b.tau);
    let d1 = (b.p - a.p) / h1;
    let d2 = (c.p - b.p) / h2;
    let curv = (d2 - d1) / (0.5 * (h1 + h2));
    if curv == 0.0 || !curv.is_finite() {
        return Extremum {
            tau: b.tau,
            p: b.p,
            kind,
        };
    }
    // Slope at b from the parabola through the three points.
    let slope_b = (d1 * h2 + d2 * h1) / (h1 + h2);
    let shift = (-slope_b / curv).clamp(-h1, h2);
    Extremum {
        tau: b.tau + shift,
        p: b.p + slope_b * shift + 0.5 * curv * shift * shift,
        kind,
    }
}

/// Amplitudes at every extremum that has an opposite-kind neighbour on
/// each side.
pub fn peak_amplitudes(extrema: &[Extremum]) -> Vec<PeakAmplitude> {
    extrema
        .windows(3)
        .map(|w| {
            let (prev, mid, next) = (w[0], w[1], w[2]);
            let frac = (mid.tau - prev.tau) / (next.tau - prev.tau);
            let other = prev.p + frac * (next.p - prev.p);
            PeakAmplitude {
                tau: mid.tau,
                amplitude: 0.5 * (mid.p - other).abs(),
                midline: 0.5 * (mid.p + other),
            }
        })
        .collect()
}

/// Least-squares slope of ln(amplitude) against ln(τ) over peaks in
/// [tau_min, tau_max].
pub fn decay_exponent(
    peaks: &[PeakAmplitude],
    tau_min: f64,
    tau_max: f64,
) -> Result<f64, MeasureError> {
    let pts: Vec<(f64, f64)> = peaks
        .iter()
        .filter(|p| p.tau >= tau_min && p.tau <= tau_max && p.amplitude > 0.0)
        .map(|p| (p.tau.ln(), p.amplitude.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(MeasureError::TooFewPeaks);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Slope of the trace at τ = 0 by finite differences on its samples.
fn slope_at_crossing(samples: &[Sample]) -> Result<f64, MeasureError> {
    let i = samples
        .binary_search_by(|s| s.tau.total_cmp(&0.0))
        .map_err(|_| MeasureError::NoCrossingSlope)?;
    if i > 0 && i + 1 < samples.len() {
        let (a, b, c) = (samples[i - 1], samples[i], samples[i + 1]);
        let (h1, h2) = (b.tau - a.tau, c.tau - b.tau);
        let d1 = (b.p - a.p) / h1;
        let d2 = (c.p - b.p) / h2;
        return Ok((d1 * h2 + d2 * h1) / (h1 + h2));
    }
    if i + 2 < samples.len() {
        // One-sided second-order difference on a (locally) uniform grid.
        let (a, b, c) = (samples[i], samples[i + 1], samples[i + 2]);
        let h = b.tau - a.tau;
        return Ok((-3.0 * a.p + 4.0 * b.p - c.p) / (2.0 * h));
    }
    Err(MeasureError::NoCrossingSlope)
}

/// Linear interpolation of the first crossing of `level` in a sequence of
/// (τ, value) points, in either direction.
fn first_crossing(
    points: impl Iterator<Item = (f64, f64)>,
    level: f64,
    rising: bool,
) -> Option<f64> {
    let mut prev: Option<(f64, f64)> = None;
    for (t, v) in points {
        let reached = if rising { v >= level } else { v <= level };
        if reached {
            return Some(match prev {
                Some((t0, v0)) if v != v0 => t0 + (level - v0) * (t - t0) / (v - v0),
                _ => t,
            });
        }
        prev = Some((t, v));
    }
    None
}

/// Numeric counterparts of the transition times.
///
/// * `relax`: the last τ > 0 at which the oscillation amplitude is at least
///   ε·`p_inf`, interpolated between the bracketing peaks; absent when no
///   peak reaches that level.
/// * `jump`: the tangent construction P(∞)/P′(0), with the slope taken from
///   the samples around τ = 0.
/// * For adiabatic traces that overshoot, P(0) > (1+ε)·P(∞), also the
///   large-coupling construction: `jump_initial` where P first reaches
///   ε·P(∞) before the crossing, `jump_final` where the midline falls to
///   (1+ε)·P(∞), and `jump` = final − initial.
pub fn measure_times_numeric(
    trace: &ProbabilityTrace,
    p_inf: f64,
    epsilon: Epsilon,
) -> Result<TransitionTimes, MeasureError> {
    let eps = epsilon.value();
    let threshold = eps * p_inf;
    let samples = &trace.samples;
    let extrema = find_extrema(samples, 0.0);
    let peaks = peak_amplitudes(&extrema);

    let relax = match peaks.iter().rposition(|p| p.amplitude >= threshold) {
        None => None,
        Some(k) if k + 1 == peaks.len() => {
            return Err(MeasureError::InsufficientHorizon {
                last_tau: samples.last().map_or(0.0, |s| s.tau),
                amplitude: peaks[k].amplitude,
                threshold,
            })
        }
        Some(k) => {
            let (a, b) = (peaks[k], peaks[k + 1]);
            let frac = (a.amplitude - threshold) / (a.amplitude - b.amplitude);
            Some(a.tau + frac * (b.tau - a.tau))
        }
    };

    let slope = slope_at_crossing(samples)?;
    let mut times = TransitionTimes {
        jump: Some(p_inf / slope),
        relax,
        ..TransitionTimes::empty(trace.basis, epsilon)
    };

    let p0 = trace.at(0.0);
    let overshoots = trace.basis == Basis::Adiabatic && p0.is_some_and(|p| p > (1.0 + eps) * p_inf);
    if overshoots {
        let initial = first_crossing(
            samples
                .iter()
                .filter(|s| s.tau <= 0.0)
                .map(|s| (s.tau, s.p)),
            threshold,
            true,
        );
        let level = (1.0 + eps) * p_inf;
        // Before the first resolved peak the raw samples stand in for the midline.
        let first_peak = peaks.first().map_or(f64::INFINITY, |p| p.tau);
        let midline = samples
            .iter()
            .filter(|s| s.tau >= 0.0 && s.tau < first_peak)
            .map(|s| (s.tau, s.p))
            .chain(peaks.iter().map(|p| (p.tau, p.midline)));
        let fin = first_crossing(midline, level, false);
        if let (Some(i), Some(f)) = (initial, fin) {
            times.jump_initial = Some(i);
            times.jump_final = Some(f);
            times.jump = Some(f - i);
        }
    }
    Ok(times)
}
