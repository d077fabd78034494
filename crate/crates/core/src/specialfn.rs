//! Complex log-gamma and the crossing-point phase angle χ(ω).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2};

use num_complex::Complex64;
use thiserror::Error;

/// Riemann zeta function at 3 (Apéry's constant).
pub const ZETA_3: f64 = 1.202_056_903_159_594_3;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Stirling series coefficients B_2k / (2k (2k - 1)), k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Real part below which the argument is shifted upward before the
/// asymptotic series is applied.
const SHIFT_TO: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecialFnError {
    #[error("log-gamma requires Re z > 0, got z = {re} {im:+}i")]
    Domain { re: f64, im: f64 },
}

/// Principal branch of ln Γ(z) for Re z > 0.
///
/// The branch is the one continuous in z on the right half plane and real on
/// the positive real axis, so its imaginary part is a continuous arg Γ(z)
/// (not reduced to (-π, π]).
pub fn log_gamma(z: Complex64) -> Result<Complex64, SpecialFnError> {
    if z.re.is_nan() || z.re <= 0.0 || !z.im.is_finite() {
        return Err(SpecialFnError::Domain { re: z.re, im: z.im });
    }
    // ln Γ(z) = ln Γ(z + n) - Σ ln(z + k); each ln(z + k) is principal and
    // stays in the right half plane, so the sum carries the continuous branch.
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < SHIFT_TO {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in STIRLING {
        series += pow * c;
        pow *= inv2;
    }
    Ok((w - 0.5) * w.ln() - w + HALF_LN_2PI + series - shift)
}

/// Continuous argument of Γ(z) for Re z > 0.
pub fn log_gamma_arg(z: Complex64) -> Result<f64, SpecialFnError> {
    log_gamma(z).map(|lg| lg.im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiMethod {
    Exact,
    SmallOmegaSeries,
    LargeOmegaSeries,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiResult {
    /// Radians, between π/4 and π/2.
    pub value: f64,
    pub method: ChiMethod,
}

/// χ(ω) = π/4 + arg Γ(1/2 − iω²/4) − arg Γ(1 − iω²/4).
///
/// Panics only if `omega` is not finite; negative values are folded through
/// ω² and give the same angle as |ω|.
pub fn chi_exact(omega: f64) -> ChiResult {
    let y = -0.25 * omega * omega;
    let half = log_gamma_arg(Complex64::new(0.5, y)).expect("Re z = 1/2 is in the domain");
    let one = log_gamma_arg(Complex64::new(1.0, y)).expect("Re z = 1 is in the domain");
    ChiResult {
        value: FRAC_PI_4 + half - one,
        method: ChiMethod::Exact,
    }
}

/// Small- and large-ω expansions of χ, switching at ω² = 1.
pub fn chi_series(omega: f64) -> ChiResult {
    let w2 = omega * omega;
    if w2 <= 1.0 {
        let w6 = w2 * w2 * w2;
        ChiResult {
            value: FRAC_PI_4 + 0.5 * LN_2 * w2 - ZETA_3 / 32.0 * w6,
            method: ChiMethod::SmallOmegaSeries,
        }
    } else {
        let w6 = w2 * w2 * w2;
        ChiResult {
            value: FRAC_PI_2 - 1.0 / (2.0 * w2) - 1.0 / (3.0 * w6),
            method: ChiMethod::LargeOmegaSeries,
        }
    }
}
