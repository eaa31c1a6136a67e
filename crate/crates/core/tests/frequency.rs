use std::f64::consts::PI;

use num_complex::Complex64;
use thermostat::frequency::*;
use thermostat::kernel::{fourier_as, fourier_as_prime};
use thermostat::series::log_space;
use thermostat::SeriesPolicy;

#[test]
fn transfer_is_minus_laplace_of_kernel_series() {
    let p = SeriesPolicy::default();
    for s in [Complex64::new(0.3, 0.0), Complex64::new(1.0, 5.0), Complex64::new(9.0, -2.0)] {
        assert!((transfer_nloc(s).unwrap() - transfer_nloc_series(s, &p).unwrap()).norm() < 1e-10);
    }
}

#[test]
fn crossing_routes_agree() {
    let p = SeriesPolicy::default();
    let c = crossing_omega0(0.5, 2.0, 1e-13, &p).unwrap();
    let s = crossing_omega0_series(0.5, 2.0, 1e-13, &p).unwrap();
    assert!((c.omega0 - s).abs() < 1e-9);
    assert!((c.omega0 - 1.13344388).abs() < 1e-6);
    assert!((c.g_at_crossing + 0.17650842).abs() < 1e-6);
    assert!(c.nycond_residual <= 1e-8);
}

#[test]
fn a_and_b_are_real_parts_of_transforms() {
    let p = SeriesPolicy::default();
    for w in [0.01, 0.7, 3.0, 40.0] {
        assert!((popov_a(w, &p).unwrap() - fourier_as(w, &p).unwrap().re).abs() < 1e-12);
        assert!((popov_b(w, &p).unwrap() - fourier_as_prime(w, &p).unwrap().re).abs() < 1e-12);
    }
}

#[test]
fn popov_functional_peak() {
    let table = PopovTable::new(OmegaGrid::default(), SeriesPolicy::default()).unwrap();
    let opt = beta_sup(1e-3, 1e3, 1e-10, &table).unwrap();
    let c = crossing_omega0(0.5, 2.0, 1e-13, &SeriesPolicy::default()).unwrap();
    assert!((opt.beta_star - c.beta0).abs() <= 1e-3);
    assert!((opt.omega_star - c.omega0).abs() < 1e-3);
    // quasi-concavity: samples left and right of the peak stay below it
    for q in log_space(1e-2, 1e2, 25) {
        assert!(m_of_q(q, &table).unwrap().value() <= opt.beta_star + 1e-9);
    }
    assert!((m_of_q(0.0, &table).unwrap().value() - 6.0 / PI).abs() < 1e-10);
}

#[test]
fn popov_witness_exists_exactly_below_beta0() {
    let table = PopovTable::new(OmegaGrid::default(), SeriesPolicy::default()).unwrap();
    for beta in [0.5, 2.0, 5.0, 5.66] {
        let q = find_popov_q(beta, &table).unwrap().unwrap();
        assert!(popov_check(beta, q, &table).unwrap().satisfied);
    }
    assert!(find_popov_q(5.67, &table).unwrap().is_none());
}

#[test]
fn local_loop_is_in_right_half_plane() {
    for w in log_space(0.2, 50.0, 2000) {
        assert!(transfer_loc(Complex64::new(0.0, w)).unwrap().re > 0.0);
    }
}

#[test]
fn nyquist_detour_closes_the_curve() {
    let c = nyquist_curve(0.05, 100.0, 500, 0.05, Loop::Nonlocal).unwrap();
    let (a, b) = c.detour;
    assert_eq!(b - a, 125);
    // the detour joins the two branches continuously
    assert!((c.points[a - 1] - c.points[a]).norm() < 0.2 * c.points[a].norm());
    assert!((c.points[b] - c.points[b - 1]).norm() < 0.2 * c.points[b].norm());
}
