//! Dormand–Prince 5(4) with step rejection and the standard fourth-order
//! continuous extension, sampling the solution only at requested points.

use super::EngineError;

/// First-order system y' = f(t, y) of fixed dimension.
pub(crate) trait System<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N]) -> [f64; N];
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Continuous extension: weight of stage i is Σ_j DENSE[i][j] θ^{j+1}.
const DENSE: [[f64; 4]; 7] = [
    [
        1.0,
        -8048581381.0 / 2820520608.0,
        8663915743.0 / 2820520608.0,
        -12715105075.0 / 11282082432.0,
    ],
    [0.0, 0.0, 0.0, 0.0],
    [
        0.0,
        131558114200.0 / 32700410799.0,
        -68118460800.0 / 10900136933.0,
        87487479700.0 / 32700410799.0,
    ],
    [
        0.0,
        -1754552775.0 / 470086768.0,
        14199869525.0 / 1410260304.0,
        -10690763975.0 / 1880347072.0,
    ],
    [
        0.0,
        127303824393.0 / 49829197408.0,
        -318862633887.0 / 49829197408.0,
        701980252875.0 / 199316789632.0,
    ],
    [
        0.0,
        -282668133.0 / 205662961.0,
        2019193451.0 / 616988883.0,
        -1453857185.0 / 822651844.0,
    ],
    [
        0.0,
        40617522.0 / 29380423.0,
        -110615467.0 / 29380423.0,
        69997945.0 / 29380423.0,
    ],
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

#[inline]
fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn scaled_norm<const N: usize>(v: &[f64; N], y: &[f64; N], ctl: &StepControl) -> f64 {
    let sum: f64 = v
        .iter()
        .zip(y)
        .map(|(e, yi)| {
            let sc = ctl.abs_tol + ctl.rel_tol * yi.abs();
            (e / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

fn initial_step<S: System<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    ctl: &StepControl,
) -> f64 {
    let d0 = scaled_norm(y0, y0, ctl);
    let d1 = scaled_norm(f0, y0, ctl);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = combine(y0, dir * h0, &[(1.0, f0)]);
    let f1 = sys.rhs(t0 + dir * h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = scaled_norm(&diff, y0, ctl) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(ctl.max_step)
}

/// Integrates from `t0` to `t_end` and returns the state at each of `outputs`.
///
/// `outputs` must be monotone in the direction of integration and lie within
/// [t0, t_end]. Points equal to `t0` return `y0` unchanged.
pub(crate) fn integrate<S: System<N>, const N: usize>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    outputs: &[f64],
    ctl: &StepControl,
) -> Result<Vec<[f64; N]>, EngineError> {
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut result = Vec::with_capacity(outputs.len());
    let mut next = 0;
    while next < outputs.len() && outputs[next] == t0 {
        result.push(y0);
        next += 1;
    }
    if t_end == t0 || next == outputs.len() {
        return Ok(result);
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = sys.rhs(t, &y);
    let mut h = initial_step(sys, t, &y, &k1, dir, ctl);
    let mut rejected = false;
    let mut steps = 0usize;

    while next < outputs.len() {
        steps += 1;
        if steps > ctl.max_steps {
            return Err(EngineError::TooManySteps { at: t });
        }
        let remaining = (t_end - t).abs();
        let mut last = false;
        let mut step = h.min(ctl.max_step);
        if step >= remaining {
            step = remaining;
            last = true;
        }
        if step <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(EngineError::StepUnderflow { at: t });
        }
        let hs = dir * step;

        let k2 = sys.rhs(t + C2 * hs, &combine(&y, hs, &[(A21, &k1)]));
        let k3 = sys.rhs(t + C3 * hs, &combine(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = sys.rhs(
            t + C4 * hs,
            &combine(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = sys.rhs(
            t + C5 * hs,
            &combine(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = sys.rhs(
            t + hs,
            &combine(
                &y,
                hs,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = combine(
            &y,
            hs,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let t_new = if last { t_end } else { t + hs };
        let k7 = sys.rhs(t_new, &y_new);

        let mut err = [0.0; N];
        let mut scale_y = [0.0; N];
        for i in 0..N {
            err[i] =
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            scale_y[i] = y[i].abs().max(y_new[i].abs());
        }
        let err_norm = scaled_norm(&err, &scale_y, ctl);
        if !err_norm.is_finite() {
            h = step * FAC_MIN;
            rejected = true;
            continue;
        }

        if err_norm <= 1.0 {
            let ks = [k1, k2, k3, k4, k5, k6, k7];
            while next < outputs.len() && (outputs[next] - t_new) * dir <= 0.0 {
                let theta = ((outputs[next] - t) / hs).clamp(0.0, 1.0);
                result.push(dense_eval(&y, hs, &ks, theta));
                next += 1;
            }
            let mut fac = SAFETY * err_norm.max(1e-10).powf(-0.2);
            fac = fac.clamp(FAC_MIN, if rejected { 1.0 } else { FAC_MAX });
            h = step * fac;
            t = t_new;
            y = y_new;
            k1 = k7;
            rejected = false;
            if last {
                break;
            }
        } else {
            let fac = (SAFETY * err_norm.powf(-0.2)).max(FAC_MIN);
            h = step * fac;
            rejected = true;
        }
    }
    // Outputs beyond t_end are a caller bug; report them as a horizon failure.
    if next < outputs.len() {
        return Err(EngineError::HorizonNotReached {
            requested: outputs[next],
            reached: t,
        });
    }
    Ok(result)
}

fn dense_eval<const N: usize>(y: &[f64; N], h: f64, ks: &[[f64; N]; 7], theta: f64) -> [f64; N] {
    let powers = [theta, theta * theta, theta.powi(3), theta.powi(4)];
    let mut weights = [0.0; 7];
    for (w, row) in weights.iter_mut().zip(DENSE.iter()) {
        *w = row.iter().zip(&powers).map(|(c, p)| c * p).sum();
    }
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let acc: f64 = weights.iter().zip(ks).map(|(w, k)| w * k[i]).sum();
        *o += h * acc;
    }
    out
}
