use lztimes::approx::{pa_approx, pd_approx};
use lztimes::engine::{
    adiabatic_trace, diabatic_trace, measure_times_numeric, uniform_grid, IntegratorConfig,
};
use lztimes::model::{mixing_angle, p_infinity, Basis, LzParams};
use lztimes::times::{jump_time_adiabatic_large, jump_time_diabatic, Epsilon};

fn params(w: f64) -> LzParams {
    LzParams::new(w).unwrap()
}

#[test]
fn backward_diabatic_trace_follows_pre_crossing_form() {
    let cfg = IntegratorConfig::default();
    let grid = uniform_grid(-40.0, -2.0, 0.05);
    for w in [0.1, 0.3, 0.5, 1.0] {
        let p = params(w);
        let tr = diabatic_trace(p, &cfg, &grid).unwrap();
        for s in &tr.samples {
            let dev = (s.p - pd_approx(p, s.tau).p).abs();
            assert!(dev < 0.01, "omega = {w}, tau = {}: {dev}", s.tau);
        }
    }
}

#[test]
fn forward_diabatic_trace_follows_post_crossing_form() {
    let cfg = IntegratorConfig::default();
    let grid = uniform_grid(2.0, 40.0, 0.05);
    for w in [0.3, 0.5, 1.0, 2.0] {
        let p = params(w);
        let tr = diabatic_trace(p, &cfg, &grid).unwrap();
        for s in &tr.samples {
            let dev = (s.p - pd_approx(p, s.tau).p).abs();
            assert!(dev < 0.02, "omega = {w}, tau = {}: {dev}", s.tau);
        }
    }
}

#[test]
fn adiabatic_trace_approaches_post_crossing_form_at_large_coupling() {
    // The closed form is asymptotic in τ: its error, in units of P_a(∞),
    // falls below 1% by τ = 10 and keeps shrinking.
    let cfg = IntegratorConfig::default();
    let p = params(2.0);
    let tr = adiabatic_trace(p, &cfg, &uniform_grid(10.0, 30.0, 0.01)).unwrap();
    let scale = p_infinity(p, Basis::Adiabatic);
    let worst = |lo: f64, hi: f64| {
        tr.samples
            .iter()
            .filter(|s| s.tau >= lo && s.tau < hi)
            .map(|s| (s.p - pa_approx(p, s.tau).p).abs() / scale)
            .fold(0.0, f64::max)
    };
    let (near, far) = (worst(10.0, 15.0), worst(20.0, 30.0));
    assert!(near < 0.01, "{near}");
    assert!(far < near / 4.0, "{far} vs {near}");
}

#[test]
fn halving_tolerances_is_convergent() {
    let grid = uniform_grid(-10.0, 30.0, 0.1);
    let coarse = IntegratorConfig::with_tolerances(1e-8, 1e-10);
    let fine = IntegratorConfig::with_tolerances(5e-9, 5e-11);
    for w in [0.3, 1.0, 2.0] {
        let p = params(w);
        for (a, b) in [
            (
                diabatic_trace(p, &coarse, &grid),
                diabatic_trace(p, &fine, &grid),
            ),
            (
                adiabatic_trace(p, &coarse, &grid),
                adiabatic_trace(p, &fine, &grid),
            ),
        ] {
            let dev = a
                .unwrap()
                .probabilities()
                .zip(b.unwrap().probabilities())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            assert!(dev <= 10.0 * coarse.rel_tol, "omega = {w}: {dev}");
        }
    }
}

#[test]
fn measured_diabatic_jump_matches_tangent_formula() {
    let cfg = IntegratorConfig::default();
    for w in [0.3, 1.0, 3.0] {
        let p = params(w);
        let tr = diabatic_trace(p, &cfg, &uniform_grid(-5.0, 40.0, 0.001)).unwrap();
        let t =
            measure_times_numeric(&tr, p_infinity(p, Basis::Diabatic), Epsilon::default()).unwrap();
        let rel = (t.jump.unwrap() / jump_time_diabatic(p) - 1.0).abs();
        assert!(rel < 1e-4, "omega = {w}: {rel}");
    }
}

#[test]
fn omega2_nonoscillatory_part_leaves_band_near_closed_form() {
    let cfg = IntegratorConfig::default();
    let p = params(2.0);
    let eps = Epsilon::default();
    let tr = adiabatic_trace(p, &cfg, &uniform_grid(-12.0, 30.0, 0.005)).unwrap();
    let measured = measure_times_numeric(&tr, p_infinity(p, Basis::Adiabatic), eps).unwrap();
    let closed = jump_time_adiabatic_large(p, eps).unwrap();
    let rel = |a: Option<f64>, b: Option<f64>| (a.unwrap() / b.unwrap() - 1.0).abs();
    assert!(rel(measured.jump_final, closed.jump_final) < 0.15);
    assert!(rel(measured.jump_initial, closed.jump_initial) < 0.15);
}

#[test]
fn bases_exchange_populations_far_from_the_crossing() {
    // |a₁|² − |c₁|² = −sin²ϑ (|c₁|² − |c₂|²) − sin 2ϑ Re(c₁ c₂*), and ϑ → 0
    // far after the crossing, so P_a + P_d → 1.
    let cfg = IntegratorConfig::default();
    for w in [0.5, 1.0, 2.0] {
        let p = params(w);
        let grid = [-200.0, 200.0];
        let d = diabatic_trace(p, &cfg, &grid).unwrap();
        let a = adiabatic_trace(p, &cfg, &grid).unwrap();
        assert!(d.samples[0].p < 1e-4);
        let theta = mixing_angle(p, 200.0);
        let bound = theta.sin().powi(2) + 0.5 * (2.0 * theta).sin() + 1e-8;
        let dev = (a.samples[1].p + d.samples[1].p - 1.0).abs();
        assert!(dev <= bound, "omega = {w}: {dev} > {bound}");
    }
}
