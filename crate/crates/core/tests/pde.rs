use std::f64::consts::PI;

use thermostat::pde::*;
use thermostat::volterra::{g_beta, sign_changes, solve_volterra, VolterraProblem};
use thermostat::{InitialData, SeriesPolicy};

fn simulate(beta: f64, u0: &InitialData, cfg: &SimConfig) -> Vec<SpectralState> {
    integrate(&SpectralState::from_initial(u0, beta, cfg.k), cfg).unwrap()
}

#[test]
fn pde_trace_agrees_with_integral_equation() {
    let u0 = InitialData::cosine(1, 1.0);
    let cfg = SimConfig::default();
    for beta in [0.5, 1.0, 3.0, 5.5] {
        let snaps = simulate(beta, &u0, &cfg);
        let traj =
            solve_volterra(&VolterraProblem::new(beta, u0.clone(), cfg.horizon, cfg.dt, SeriesPolicy::default()).unwrap())
                .unwrap();
        let diff = snaps.iter().zip(&traj.y).map(|(s, y)| (s.trace_pi() - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 2e-3, "beta = {beta}: {diff}");
    }
}

#[test]
fn dissipation_identity_residual_shrinks_with_dt() {
    let u0 = InitialData::cosine(1, 1.0);
    let worst = |dt: f64| {
        let cfg = SimConfig { dt, horizon: 5.0, ..SimConfig::default() };
        dissipation_check(&simulate(1.0, &u0, &cfg), 1.0)
            .into_iter()
            .filter(|(t, _)| *t >= 0.1)
            .fold(0.0f64, |m, (_, r)| m.max(r.abs()))
    };
    let (a, b) = (worst(0.01), worst(0.005));
    assert!(b < 1e-3, "{b}");
    assert!(a / b > 3.0, "ratio {}", a / b);
}

#[test]
fn dissipation_with_mixed_data() {
    let u0 = InitialData::from_cosines(0.2, &[(1, 1.0), (3, -0.4)]);
    let cfg = SimConfig { dt: 0.0025, horizon: 5.0, ..SimConfig::default() };
    let r = dissipation_check(&simulate(3.0, &u0, &cfg), 3.0);
    assert!(r.iter().filter(|(t, _)| *t >= 0.1).all(|(_, r)| r.abs() < 1e-3));
}

#[test]
fn zero_gain_conserves_mean_and_dissipates_exactly() {
    let u0 = InitialData::from_cosines(0.7, &[(2, 1.0)]);
    let worst = |dt: f64| {
        let cfg = SimConfig { dt, horizon: 2.0, ..SimConfig::default() };
        let snaps = simulate(0.0, &u0, &cfg);
        assert!(snaps.iter().all(|s| s.mean() == 0.7));
        dissipation_check(&snaps, 0.0).into_iter().fold(0.0f64, |m, (_, r)| m.max(r.abs()))
    };
    let ratio = worst(0.01) / worst(0.005);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn mean_balance() {
    let u0 = InitialData::from_cosines(0.5, &[(1, 1.0)]);
    let cfg = SimConfig { dt: 0.005, horizon: 10.0, ..SimConfig::default() };
    let snaps = simulate(2.0, &u0, &cfg);
    let mut integral = 0.0;
    for w in snaps.windows(2) {
        let g0 = g_beta(2.0, w[0].trace_pi());
        let g1 = g_beta(2.0, w[1].trace_pi());
        integral += 0.5 * cfg.dt * (g0 + g1);
        assert!((w[1].mean() - (0.5 - integral / PI)).abs() < 1e-5);
    }
}

#[test]
fn large_gain_sustains_oscillation() {
    let u0 = InitialData::cosine(1, 1.0);
    let cfg = SimConfig { dt: 0.01, horizon: 300.0, snapshot_every: 5, ..SimConfig::default() };
    let snaps = simulate(7.0, &u0, &cfg);
    let trace: Vec<f64> = snaps.iter().map(|s| s.trace_pi()).collect();
    let tail = &trace[trace.len() * 3 / 4..];
    assert!(sign_changes(tail) >= 5);
    assert!(tail.iter().fold(0.0f64, |m, y| m.max(y.abs())) > 1e-2);
}

#[test]
fn decay_in_trace_and_h1_go_together() {
    let u0 = InitialData::cosine(1, 1.0);
    let cfg = SimConfig { dt: 0.01, horizon: 100.0, snapshot_every: 10, ..SimConfig::default() };
    let small = h1_decay_equivalence(&simulate(1.0, &u0, &cfg), 0.25);
    assert!(small.trace_tail < 1e-3 && small.h1_tail < 1e-3);
    let large = h1_decay_equivalence(&simulate(7.0, &u0, &cfg), 0.25);
    assert!(large.trace_tail > 1e-2 && large.h1_tail > 1e-2);
    let zero = h1_decay_equivalence(&simulate(1.0, &InitialData::zero(), &cfg), 0.25);
    assert_eq!((zero.trace_tail, zero.h1_tail), (0.0, 0.0));
}
