//! Roots of the linearised characteristic equation `√λ sin(π√λ) = β` and of
//! the Lyapunov fixed-point problem `μ = r_α(μ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frequency::transfer_nloc;
use crate::series::log_space;
use crate::solve::bisect;

/// `r_α(μ) = (α²/4 − μ²) sinh(μπ)/α`.
pub fn r_alpha(alpha: f64, mu: f64) -> f64 {
    (alpha * alpha / 4.0 - mu * mu) * (mu * PI).sinh() / alpha
}

pub fn r_alpha_prime(alpha: f64, mu: f64) -> f64 {
    (-2.0 * mu * (mu * PI).sinh() + PI * (alpha * alpha / 4.0 - mu * mu) * (mu * PI).cosh()) / alpha
}

/// From `4α r_α″(μ) = sinh(μπ)[π²(α² − 4μ²) − 8] − 16πμ cosh(μπ)`.
pub fn r_alpha_second(alpha: f64, mu: f64) -> f64 {
    let s = (mu * PI).sinh();
    let c = (mu * PI).cosh();
    (s * (PI * PI * (alpha * alpha - 4.0 * mu * mu) - 8.0) - 16.0 * PI * mu * c) / (4.0 * alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovVerdict {
    pub alpha: f64,
    /// Smallest nontrivial fixed point in `(0, α/2]`, if any.
    pub fixed_point: Option<f64>,
    pub r_prime_at_zero: f64,
    /// `r_α″ < 0` at every interior sample of `(0, α/2]`.
    pub concave_on_interval: bool,
}

const CONCAVITY_SAMPLES: usize = 256;

/// Searches `(0, α/2]` for nontrivial solutions of `μ = r_α(μ)`.
pub fn lyapunov_verdict(alpha: f64, tol: f64) -> Result<LyapunovVerdict> {
    const CTX: &str = "lyapunov_verdict";
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain(CTX, format!("alpha must be positive, got {alpha}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(CTX, "tolerance must be positive"));
    }
    let half = alpha / 2.0;
    let phi = |mu: f64| mu - r_alpha(alpha, mu);

    // log-spaced near 0 where a fixed point is born, uniform further out
    let mut grid = log_space(half * 1e-9, half * 1e-2, 200);
    grid.extend((1..=400).map(|i| half * i as f64 / 400.0));
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut fixed_point = None;
    for w in grid.windows(2) {
        let (a, b) = (phi(w[0]), phi(w[1]));
        if a == 0.0 {
            fixed_point = Some(w[0]);
            break;
        }
        if a.signum() != b.signum() {
            let mu = bisect(|m| Ok(phi(m)), w[0], w[1], tol * 1e-3 * half.max(1.0), CTX)?;
            let residual = phi(mu).abs();
            if residual > tol {
                return Err(Error::Tolerance {
                    context: CTX,
                    tol,
                    terms: 0,
                    estimate: residual,
                });
            }
            fixed_point = Some(mu);
            break;
        }
    }

    let concave_on_interval =
        (1..=CONCAVITY_SAMPLES).all(|i| r_alpha_second(alpha, half * i as f64 / CONCAVITY_SAMPLES as f64) < 0.0);

    Ok(LyapunovVerdict {
        alpha,
        fixed_point,
        r_prime_at_zero: PI * alpha / 4.0,
        concave_on_interval,
    })
}

/// Smallest `α ∈ (0, alpha_max]` with a nontrivial fixed point: a scan with
/// step `0.01` followed by bisection down to `tol`.
pub fn lyapunov_threshold(alpha_max: f64, tol: f64) -> Result<f64> {
    const CTX: &str = "lyapunov_threshold";
    let has = |a: f64| lyapunov_verdict(a, 1e-12).map(|v| v.fixed_point.is_some());
    let step = 0.01;
    let mut lo = step;
    if has(lo)? {
        return Ok(lo);
    }
    while lo < alpha_max {
        let hi = (lo + step).min(alpha_max);
        if has(hi)? {
            let (mut a, mut b) = (lo, hi);
            while b - a > tol {
                let m = 0.5 * (a + b);
                if has(m)? {
                    b = m;
                } else {
                    a = m;
                }
            }
            return Ok(0.5 * (a + b));
        }
        lo = hi;
    }
    Err(Error::NoSignChange {
        context: CTX,
        lo: step,
        hi: alpha_max,
    })
}

/// `√λ sin(π√λ)` as an entire function of `λ`.
fn z_sin_piz(lambda: Complex64) -> Complex64 {
    if lambda.norm() < 1.0 {
        // Σ (-1)^n π^{2n+1} λ^{n+1} / (2n+1)!
        let mut term = Complex64::new(PI, 0.0) * lambda;
        let mut sum = term;
        for n in 1..40 {
            let m = (2 * n) as f64;
            term *= -PI * PI * lambda / (m * (m + 1.0));
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        let z = lambda.sqrt();
        z * (PI * z).sin()
    }
}

fn z_sin_piz_prime(lambda: Complex64) -> Complex64 {
    if lambda.norm() < 1.0 {
        // Σ (-1)^n π^{2n+1} (n+1) λ^n / (2n+1)!
        let mut term = Complex64::new(PI, 0.0);
        let mut sum = term;
        for n in 1..40 {
            let m = (2 * n) as f64;
            term *= -PI * PI * lambda / (m * (m + 1.0));
            let contrib = term * (n as f64 + 1.0);
            sum += contrib;
            if contrib.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        let z = lambda.sqrt();
        ((PI * z).sin() + PI * z * (PI * z).cos()) / (2.0 * z)
    }
}

/// `F(λ) = √λ sin(π√λ) − β`.
pub fn char_fn(lambda: Complex64, beta: f64) -> Complex64 {
    z_sin_piz(lambda) - beta
}

pub fn char_fn_prime(lambda: Complex64) -> Complex64 {
    z_sin_piz_prime(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicRoot {
    pub lambda: Complex64,
    pub beta: f64,
    pub residual: f64,
}

/// Closed rectangle `[re_min, re_max] × [im_min, im_max]` in the λ-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Default for SearchRegion {
    fn default() -> Self {
        Self {
            re_min: -10.0,
            re_max: 50.0,
            im_min: -50.0,
            im_max: 50.0,
        }
    }
}

impl SearchRegion {
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        let sr = slack * (self.re_max - self.re_min);
        let si = slack * (self.im_max - self.im_min);
        z.re >= self.re_min - sr && z.re <= self.re_max + sr && z.im >= self.im_min - si && z.im <= self.im_max + si
    }

    fn centre(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    fn diameter(&self) -> f64 {
        (self.re_max - self.re_min).hypot(self.im_max - self.im_min)
    }

    fn split(&self, frac: f64) -> [SearchRegion; 4] {
        let rm = self.re_min + frac * (self.re_max - self.re_min);
        let im = self.im_min + frac * (self.im_max - self.im_min);
        [
            SearchRegion { re_max: rm, im_max: im, ..*self },
            SearchRegion { re_min: rm, im_max: im, ..*self },
            SearchRegion { re_max: rm, im_min: im, ..*self },
            SearchRegion { re_min: rm, im_min: im, ..*self },
        ]
    }
}

const EDGE_SEGMENTS: usize = 64;
const MAX_ARG_STEP: f64 = PI / 4.0;
const MAX_DEPTH: usize = 48;
const SPLIT_FRACTIONS: [f64; 3] = [0.4813, 0.5377, 0.4511];

enum Winding {
    Count(i64),
    /// `F` is numerically zero on the boundary.
    EdgeHit,
}

struct Counter {
    beta: f64,
    edge_eps: f64,
}

impl Counter {
    fn f(&self, z: Complex64) -> Complex64 {
        char_fn(z, self.beta)
    }

    /// Argument increment of `F` along the segment `a → b`, refined until
    /// consecutive samples differ by less than `MAX_ARG_STEP`.
    fn arg_increment(&self, a: Complex64, fa: Complex64, b: Complex64, fb: Complex64, depth: usize) -> Option<f64> {
        let d = (fb / fa).arg();
        if d.abs() < MAX_ARG_STEP {
            return Some(d);
        }
        if depth > 40 {
            return None;
        }
        let m = 0.5 * (a + b);
        let fm = self.f(m);
        if fm.norm() < self.edge_eps {
            return None;
        }
        Some(self.arg_increment(a, fa, m, fm, depth + 1)? + self.arg_increment(m, fm, b, fb, depth + 1)?)
    }

    fn winding(&self, r: &SearchRegion) -> Winding {
        let c = r.corners();
        let mut total = 0.0;
        for e in 0..4 {
            let (p, q) = (c[e], c[(e + 1) % 4]);
            let mut prev = p;
            let mut fprev = self.f(p);
            if fprev.norm() < self.edge_eps {
                return Winding::EdgeHit;
            }
            for j in 1..=EDGE_SEGMENTS {
                let z = p + (q - p) * (j as f64 / EDGE_SEGMENTS as f64);
                let fz = self.f(z);
                if fz.norm() < self.edge_eps {
                    return Winding::EdgeHit;
                }
                match self.arg_increment(prev, fprev, z, fz, 0) {
                    Some(d) => total += d,
                    None => return Winding::EdgeHit,
                }
                prev = z;
                fprev = fz;
            }
        }
        Winding::Count((total / (2.0 * PI)).round() as i64)
    }
}

fn newton(beta: f64, start: Complex64, tol: f64) -> Option<Complex64> {
    let mut z = start;
    for _ in 0..100 {
        let d = char_fn_prime(z);
        if d.norm() == 0.0 {
            return None;
        }
        let step = char_fn(z, beta) / d;
        z -= step;
        if !z.re.is_finite() || !z.im.is_finite() {
            return None;
        }
        if step.norm() <= 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    (char_fn(z, beta).norm() <= tol * (1.0 + beta.abs())).then_some(z)
}

fn search_box(counter: &Counter, r: SearchRegion, count: i64, tol: f64, depth: usize) -> Result<Vec<Complex64>> {
    if count <= 0 {
        return Ok(Vec::new());
    }
    if count == 1 {
        if let Some(z) = newton(counter.beta, r.centre(), tol) {
            if r.contains(z, 1e-9) {
                return Ok(vec![z]);
            }
        }
    }
    if depth >= MAX_DEPTH || r.diameter() < 1e-13 * (1.0 + r.centre().norm()) {
        if let Some(z) = newton(counter.beta, r.centre(), tol) {
            return Ok(vec![z]);
        }
        let c = r.centre();
        return Err(Error::NewtonFailed { re: c.re, im: c.im });
    }
    for frac in SPLIT_FRACTIONS {
        let children = r.split(frac);
        let counts: Vec<Winding> = children.iter().map(|c| counter.winding(c)).collect();
        if counts.iter().any(|w| matches!(w, Winding::EdgeHit)) {
            continue;
        }
        let counts: Vec<i64> = counts
            .into_iter()
            .map(|w| match w {
                Winding::Count(n) => n,
                Winding::EdgeHit => unreachable!(),
            })
            .collect();
        let found = children
            .into_par_iter()
            .zip(counts)
            .map(|(c, n)| search_box(counter, c, n, tol, depth + 1))
            .collect::<Result<Vec<_>>>()?;
        return Ok(found.into_iter().flatten().collect());
    }
    let c = r.centre();
    Err(Error::NewtonFailed { re: c.re, im: c.im })
}

/// All roots of `√λ sin(π√λ) = β` inside `region`, located by
/// argument-principle box counting and polished by Newton's method.
///
/// Every returned root satisfies `|F(λ)| ≤ tol·(1 + |β|)`; the set is closed
/// under conjugation and sorted by real then imaginary part.
pub fn linearized_eigenvalues(beta: f64, region: SearchRegion, tol: f64) -> Result<Vec<CharacteristicRoot>> {
    const CTX: &str = "linearized_eigenvalues";
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::domain(CTX, format!("beta must be finite and nonzero, got {beta}")));
    }
    if !(region.re_min < region.re_max && region.im_min < region.im_max)
        || ![region.re_min, region.re_max, region.im_min, region.im_max].iter().all(|v| v.is_finite())
    {
        return Err(Error::domain(CTX, "search region must be a bounded nonempty rectangle"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(CTX, "tolerance must be positive"));
    }
    let counter = Counter {
        beta,
        edge_eps: 1e-9 * (1.0 + beta.abs()),
    };
    let count = match counter.winding(&region) {
        Winding::Count(n) => n,
        Winding::EdgeHit => return Err(Error::domain(CTX, "a root lies on the search boundary")),
    };
    let raw = search_box(&counter, region, count, tol, 0)?;

    let mut roots: Vec<Complex64> = Vec::new();
    let snap = |z: Complex64| {
        if z.im.abs() <= 1e-12 * (1.0 + z.norm()) {
            Complex64::new(z.re, 0.0)
        } else {
            z
        }
    };
    let same = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-9 * (1.0 + a.norm());
    for z in raw.into_iter().map(snap) {
        if !roots.iter().any(|&r| same(r, z)) {
            roots.push(z);
        }
    }
    let conj: Vec<Complex64> = roots
        .iter()
        .filter(|z| z.im != 0.0)
        .map(|z| z.conj())
        .filter(|c| !roots.iter().any(|&r| same(r, *c)))
        .collect();
    for c in conj {
        // polish the mirrored root so its residual is its own
        roots.push(newton(beta, c, tol).unwrap_or(c));
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots
        .into_iter()
        .map(|lambda| CharacteristicRoot {
            lambda,
            beta,
            residual: char_fn(lambda, beta).norm(),
        })
        .collect())
}

/// Gain `−1/G_nloc(iω)` at which a conjugate pair sits at `±iω`.
pub fn spectral_beta_map(omega: f64, tol: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain("spectral_beta_map", format!("omega must be positive, got {omega}")));
    }
    let g = transfer_nloc(Complex64::new(0.0, omega))?;
    if g.im.abs() > tol {
        return Err(Error::NotACrossing {
            omega,
            imag: g.im.abs(),
        });
    }
    Ok(-1.0 / g.re)
}
