#![allow(dead_code)]

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `∫₀^T e^{-iωt} h(t) dt` split into unit panels so the recursion sees
/// a few oscillations at a time.
pub fn fourier_quadrature<F: Fn(f64) -> f64>(h: &F, omega: f64, horizon: f64, tol: f64) -> (f64, f64) {
    let panels = horizon.ceil() as usize;
    let (mut re, mut im) = (0.0, 0.0);
    for p in 0..panels {
        let (a, b) = (p as f64, ((p + 1) as f64).min(horizon));
        re += adaptive_simpson(&|t| h(t) * (omega * t).cos(), a, b, tol / panels as f64);
        im -= adaptive_simpson(&|t| h(t) * (omega * t).sin(), a, b, tol / panels as f64);
    }
    (re, im)
}

/// Bilateral theta sum `(1/π) Σ_{k∈ℤ} e^{-tk²} cos(kx)`, summed until the
/// terms underflow.
pub fn theta_neumann(t: f64, x: f64) -> f64 {
    let mut s = 1.0;
    let mut k = 1.0f64;
    loop {
        let w = (-t * k * k).exp();
        if w < 1e-300 || k > 1e7 {
            break;
        }
        s += 2.0 * w * (k * x).cos();
        k += 1.0;
    }
    s / std::f64::consts::PI
}
