mod common;

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;
use thermostat::kernel::*;
use thermostat::series::log_space;
use thermostat::SeriesPolicy;

use common::{fourier_quadrature, theta_neumann};

fn policy() -> SeriesPolicy {
    SeriesPolicy::default()
}

#[test]
fn representations_agree_on_log_grid() {
    let p = policy();
    for t in log_space(1e-4, 10.0, 60) {
        let c = kernel_a_in(t, Representation::CosineSeries, &p).unwrap();
        let g = kernel_a_in(t, Representation::GaussianImages, &p).unwrap();
        assert!((c.value - g.value).abs() <= 1e-12, "t = {t}: {} vs {}", c.value, g.value);
        let dc = kernel_as_prime_in(t, Representation::CosineSeries, &p).unwrap();
        let dg = kernel_as_prime_in(t, Representation::GaussianImages, &p).unwrap();
        assert!((dc - dg).abs() <= 1e-10 * (1.0 + dc.abs()), "t = {t}");
    }
}

#[test]
fn neumann_kernel_matches_theta_sum() {
    let p = policy();
    for &t in &[0.05, 0.3, 1.0, 4.0] {
        for &x in &[0.0, 0.4, PI / 2.0, 2.9, PI] {
            let oracle = theta_neumann(t, x);
            let v = neumann_kernel(t, x, &p).unwrap();
            assert!((v - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()), "t={t} x={x}");
        }
    }
}

#[test]
fn kernel_is_minus_trace_of_neumann_kernel() {
    let p = policy();
    for t in [0.01, 0.2, 2.0, 20.0] {
        let a = kernel_a(t, &p).unwrap().value;
        assert!((a + neumann_kernel(t, PI, &p).unwrap()).abs() < 1e-13);
    }
}

#[test]
fn kernel_limits() {
    let p = policy();
    assert!(kernel_a(1e-6, &p).unwrap().value.abs() <= 1e-6);
    assert!((kernel_a(50.0, &p).unwrap().value + FRAC_1_PI).abs() <= 1e-12);
    assert!((shifted_kernel_as(0.0, &p).unwrap() - FRAC_1_PI).abs() < 1e-15);
}

#[test]
fn fourier_series_matches_quadrature() {
    let p = policy();
    let a_s = |t: f64| shifted_kernel_as(t, &p).unwrap();
    let a_sp = |t: f64| if t == 0.0 { 0.0 } else { kernel_as_prime(t, &p).unwrap() };
    for omega in [0.5, 1.0, 5.0] {
        let (re, im) = fourier_quadrature(&a_s, omega, 45.0, 1e-12);
        let s = fourier_as(omega, &p).unwrap();
        assert!((s.re - re).abs() <= 1e-8 && (s.im - im).abs() <= 1e-8, "omega = {omega}: {s} vs {re}{im:+}i");
        let (re, im) = fourier_quadrature(&a_sp, omega, 45.0, 1e-12);
        let d = fourier_as_prime(omega, &p).unwrap();
        assert!((d.re - re).abs() <= 1e-8 && (d.im - im).abs() <= 1e-8, "omega = {omega}");
    }
}

#[test]
fn laplace_series_and_closed_form_agree() {
    let p = policy();
    for s in [
        Complex64::new(1.0, 0.0),
        Complex64::new(4.0, 0.0),
        Complex64::new(0.1, 2.0),
        Complex64::new(2.5, -7.0),
    ] {
        let a = laplace_a(s, LaplaceMode::Series, &p).unwrap();
        let b = laplace_a(s, LaplaceMode::ClosedForm, &p).unwrap();
        assert!((a - b).norm() <= 1e-10, "s = {s}");
    }
}

#[test]
fn laplace_matches_direct_quadrature() {
    // ∫₀^∞ e^{-st} a(t) dt for real s > 0
    let p = policy();
    let s = 1.5;
    let integrand = |t: f64| if t == 0.0 { 0.0 } else { (-s * t).exp() * kernel_a(t, &p).unwrap().value };
    let q: f64 = (0..40).map(|i| common::adaptive_simpson(&integrand, i as f64, (i + 1) as f64, 1e-14)).sum();
    let closed = laplace_a(Complex64::new(s, 0.0), LaplaceMode::ClosedForm, &p).unwrap();
    assert!((q - closed.re).abs() < 1e-10);
}

#[test]
fn forcing_derivative_is_term_wise() {
    let u0 = InitialData::from_cosines(0.2, &[(1, 1.0), (2, -0.5), (5, 0.1)]);
    let h = 1e-5;
    for t in [0.05, 0.5, 3.0] {
        let fd = (forcing_f(t + h, &u0).unwrap() - forcing_f(t - h, &u0).unwrap()) / (2.0 * h);
        assert!((fd - forcing_f_prime(t, &u0).unwrap()).abs() < 1e-8);
    }
    assert!((forcing_f(0.0, &u0).unwrap() - u0.value_at(PI)).abs() < 1e-14);
}
