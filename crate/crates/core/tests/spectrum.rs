use std::f64::consts::PI;

use num_complex::Complex64;
use thermostat::frequency::{crossing_omega0, diagonal_symmetry_check, nyquist_crossings};
use thermostat::spectrum::*;
use thermostat::SeriesPolicy;

#[test]
fn crossing_gains_place_roots_on_imaginary_axis() {
    for omega in nyquist_crossings(3, 0.0).unwrap() {
        let beta = spectral_beta_map(omega, 1e-8).unwrap();
        let roots = linearized_eigenvalues(beta, SearchRegion::default(), 1e-10).unwrap();
        for target in [Complex64::new(0.0, omega), Complex64::new(0.0, -omega)] {
            let d = roots.iter().map(|r| (r.lambda - target).norm()).fold(f64::INFINITY, f64::min);
            assert!(d <= 1e-6, "omega = {omega}: distance {d}");
        }
    }
}

#[test]
fn critical_gain_pair() {
    let c = crossing_omega0(0.5, 2.0, 1e-13, &SeriesPolicy::default()).unwrap();
    let roots = linearized_eigenvalues(c.beta0, SearchRegion::default(), 1e-10).unwrap();
    assert!(roots.iter().any(|r| (r.lambda - Complex64::new(0.0, 1.13344388)).norm() < 1e-6));
    assert!(roots.iter().any(|r| (r.lambda - Complex64::new(0.0, -1.13344388)).norm() < 1e-6));
}

#[test]
fn subcritical_gain_is_linearly_stable() {
    let region = SearchRegion { re_min: -5.0, re_max: 5.0, im_min: -20.0, im_max: 20.0 };
    let roots = linearized_eigenvalues(5.0, region, 1e-10).unwrap();
    assert!(!roots.is_empty());
    assert!(roots.iter().all(|r| r.lambda.re > 0.0));
}

#[test]
fn root_count_matches_real_axis_oracle() {
    // for β > 0 the real roots in (0, 50] are the solutions of z sin(πz) = β, z = √λ
    let beta = 0.3;
    let roots = linearized_eigenvalues(beta, SearchRegion::default(), 1e-10).unwrap();
    let real: Vec<f64> = roots.iter().filter(|r| r.lambda.im == 0.0).map(|r| r.lambda.re).collect();
    let n = 200_000;
    let zmax = 50f64.sqrt();
    let mut oracle = 0;
    let f = |z: f64| z * (PI * z).sin() - beta;
    for i in 0..n {
        let (a, b) = (zmax * i as f64 / n as f64, zmax * (i + 1) as f64 / n as f64);
        if f(a).signum() != f(b).signum() {
            oracle += 1;
        }
    }
    assert_eq!(real.len(), oracle);
}

#[test]
fn later_crossing_gains_exceed_beta0_in_magnitude() {
    let ws = nyquist_crossings(4, 0.0).unwrap();
    let beta0 = spectral_beta_map(ws[0], 1e-8).unwrap();
    for w in &ws[1..] {
        let b = spectral_beta_map(*w, 1e-8).unwrap();
        assert!(b.abs() > beta0);
    }
}

#[test]
fn diagonal_identity_at_crossings() {
    for w in nyquist_crossings(3, 0.0).unwrap() {
        let d = diagonal_symmetry_check(w).unwrap();
        assert!(d.lhs.im.abs() <= 1e-10 && d.rhs.im.abs() <= 1e-10, "omega = {w}: {:?}", d);
        assert!((d.lhs.re + d.rhs.re).abs() <= 1e-10 * (1.0 + d.lhs.re.abs()));
    }
}

#[test]
fn lyapunov_threshold_is_four_over_pi() {
    let a = lyapunov_threshold(2.0, 1e-6).unwrap();
    assert!((a - 4.0 / PI).abs() <= 0.01);
    for alpha in [0.3, 0.8, 1.2] {
        let v = lyapunov_verdict(alpha, 1e-12).unwrap();
        assert!(v.fixed_point.is_none() && v.concave_on_interval);
    }
    for alpha in [1.3, 1.6, 2.0] {
        let v = lyapunov_verdict(alpha, 1e-12).unwrap();
        let mu = v.fixed_point.unwrap();
        assert!(mu > 0.0 && mu <= alpha / 2.0);
        assert!((mu - r_alpha(alpha, mu)).abs() <= 1e-12);
    }
}

#[test]
fn concavity_bound() {
    // r_α″ < 0 on (0, α/2] holds up to α = √24/π
    let edge = 24f64.sqrt() / PI;
    assert!(lyapunov_verdict(edge - 1e-3, 1e-12).unwrap().concave_on_interval);
    assert!(!lyapunov_verdict(edge + 1e-2, 1e-12).unwrap().concave_on_interval);
}
