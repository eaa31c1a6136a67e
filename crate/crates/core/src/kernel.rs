//! Series objects built from the Neumann heat semigroup on `[0, π]`.
//!
//! The fundamental solution `N(t, x)` is available in two forms: the cosine
//! eigenfunction expansion, which converges fast for large `t`, and the
//! periodised-and-reflected Gaussian sum, which converges fast for small `t`.
//! The boundary kernel `a(t) = -N(t, π)` of the trace equation, its shifted
//! version `a_s = a + 1/π`, and the Fourier and Laplace transforms used by the
//! frequency-domain analysis all live here.
//!
//! Fourier transforms use `F(ω) = ∫ e^{-iωt} f(t) dt` with `a_s` extended by
//! zero for `t < 0`.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{alternating_sum, SeriesPolicy};

const FRAC_2_PI: f64 = 2.0 * FRAC_1_PI;

/// Which expansion produced a kernel value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    CosineSeries,
    GaussianImages,
}

/// A kernel value together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub t: f64,
    pub value: f64,
    pub representation: Representation,
    pub tail_bound: f64,
}

/// Initial temperature profile in the Neumann cosine basis.
///
/// `mean` is the spatial average `ū₀`; `modes[k - 1]` is the coefficient of
/// `φ_k(x) = √(2/π) cos(kx)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InitialData {
    pub mean: f64,
    pub modes: Vec<f64>,
}

impl InitialData {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            mean: c,
            modes: Vec::new(),
        }
    }

    /// Exact projection of `amplitude · cos(kx)`.
    pub fn cosine(k: usize, amplitude: f64) -> Self {
        Self::from_cosines(0.0, &[(k, amplitude)])
    }

    /// Exact projection of `mean + Σ amp_k cos(kx)`.
    pub fn from_cosines(mean: f64, terms: &[(usize, f64)]) -> Self {
        let mut out = Self::constant(mean);
        let scale = (PI / 2.0).sqrt();
        for &(k, amp) in terms {
            if k == 0 {
                out.mean += amp;
                continue;
            }
            if out.modes.len() < k {
                out.modes.resize(k, 0.0);
            }
            out.modes[k - 1] += amp * scale;
        }
        out
    }

    /// `Σ (1 + k²) |û₀ₖ|²` over the non-constant modes.
    pub fn h1_seminorm_sq(&self) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k = (i + 1) as f64;
                (1.0 + k * k) * c * c
            })
            .sum()
    }

    /// Point evaluation of the profile.
    pub fn value_at(&self, x: f64) -> f64 {
        let w = (2.0 / PI).sqrt();
        self.mean
            + self
                .modes
                .iter()
                .enumerate()
                .map(|(i, c)| c * w * ((i + 1) as f64 * x).cos())
                .sum::<f64>()
    }
}

fn check_time(t: f64, context: &'static str) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(context, format!("t must be positive and finite, got {t}")));
    }
    Ok(())
}

/// `Σ_{k≥1} w(k) k^p e^{-tk²}` with `|w| ≤ 1`, truncated by a geometric tail bound.
fn cosine_sum(
    t: f64,
    weight: impl Fn(usize) -> f64,
    power: i32,
    policy: &SeriesPolicy,
    tol: f64,
    context: &'static str,
) -> Result<(f64, f64)> {
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        // bound on the tail starting at index k + 1
        let next = (k + 1) as f64;
        let ratio = ((next + 1.0) / next).powi(power) * (-t * (2.0 * next + 1.0)).exp();
        let first = next.powi(power) * (-t * next * next).exp();
        if ratio < 1.0 {
            let bound = first / (1.0 - ratio);
            if bound <= tol {
                return Ok((sum, bound));
            }
        }
        if k == policy.max_terms() {
            return Err(Error::Tolerance {
                context,
                tol,
                terms: k,
                estimate: if ratio < 1.0 { first / (1.0 - ratio) } else { f64::INFINITY },
            });
        }
        k += 1;
        let kf = k as f64;
        sum += weight(k) * kf.powi(power) * (-t * kf * kf).exp();
    }
}

/// Distances `|x - 2πm|` of the reflected heat-kernel images, nearest first.
fn image_distance(j: usize, x: f64) -> f64 {
    if j == 0 {
        x
    } else {
        let m = ((j + 1) / 2) as f64;
        if j % 2 == 1 {
            2.0 * PI * m - x
        } else {
            2.0 * PI * m + x
        }
    }
}

fn heat(t: f64, d: f64) -> f64 {
    (-d * d / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

/// `2 Σ_m H(t, x - 2πm)` and its time derivative when `derivative` is set.
fn gaussian_images(
    t: f64,
    x: f64,
    derivative: bool,
    policy: &SeriesPolicy,
    tol: f64,
    context: &'static str,
) -> Result<(f64, f64)> {
    let factor = |d: f64| {
        if derivative {
            d * d / (4.0 * t * t) - 1.0 / (2.0 * t)
        } else {
            1.0
        }
    };
    let mut sum = 0.0;
    let mut j = 0usize;
    loop {
        let d = image_distance(j, x);
        // every remaining image is at least this far away and successive
        // images shrink by at least e^{-π²/t} (times the polynomial factor)
        let mag = if derivative {
            d * d / (4.0 * t * t) + 1.0 / (2.0 * t)
        } else {
            1.0
        };
        let poly = if derivative && d > 0.0 {
            ((d + 2.0 * PI) / d).powi(2)
        } else {
            1.0
        };
        let ratio = (-PI * PI / t).exp() * poly;
        if j > 0 && ratio < 1.0 {
            let bound = 4.0 * heat(t, d) * mag / (1.0 - ratio);
            if bound <= tol {
                return Ok((sum, bound));
            }
        }
        if j == policy.max_terms() {
            return Err(Error::Tolerance {
                context,
                tol,
                terms: j,
                estimate: 4.0 * heat(t, d) * mag,
            });
        }
        sum += 2.0 * heat(t, d) * factor(d);
        j += 1;
    }
}

/// Neumann fundamental solution `N(t, x)` with the representation chosen
/// by the policy's switch time.
pub fn neumann_kernel(t: f64, x: f64, policy: &SeriesPolicy) -> Result<f64> {
    let repr = if t < policy.t_switch() {
        Representation::GaussianImages
    } else {
        Representation::CosineSeries
    };
    neumann_kernel_in(t, x, repr, policy).map(|s| s.value)
}

/// `N(t, x)` in a forced representation.
pub fn neumann_kernel_in(
    t: f64,
    x: f64,
    representation: Representation,
    policy: &SeriesPolicy,
) -> Result<KernelSample> {
    const CTX: &str = "neumann_kernel";
    check_time(t, CTX)?;
    if !(0.0..=PI).contains(&x) {
        return Err(Error::domain(CTX, format!("x must lie in [0, π], got {x}")));
    }
    let tol = policy.tail_tol();
    let (value, tail_bound) = match representation {
        Representation::CosineSeries => {
            let (s, b) = cosine_sum(t, |k| (k as f64 * x).cos(), 0, policy, tol / FRAC_2_PI, CTX)?;
            (FRAC_1_PI + FRAC_2_PI * s, FRAC_2_PI * b)
        }
        Representation::GaussianImages => gaussian_images(t, x, false, policy, tol, CTX)?,
    };
    Ok(KernelSample {
        t,
        value,
        representation,
        tail_bound,
    })
}

fn alternating(k: usize) -> f64 {
    if k % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `a_s(t)` for `t > 0` in a forced representation.
fn shifted_in(t: f64, representation: Representation, policy: &SeriesPolicy) -> Result<KernelSample> {
    const CTX: &str = "kernel_a";
    check_time(t, CTX)?;
    let tol = policy.tail_tol();
    let (value, tail_bound) = match representation {
        Representation::CosineSeries => {
            let (s, b) = cosine_sum(t, alternating, 0, policy, tol / FRAC_2_PI, CTX)?;
            (FRAC_2_PI * s, FRAC_2_PI * b)
        }
        Representation::GaussianImages => {
            let (n, b) = gaussian_images(t, PI, false, policy, tol, CTX)?;
            (FRAC_1_PI - n, b)
        }
    };
    Ok(KernelSample {
        t,
        value,
        representation,
        tail_bound,
    })
}

fn default_representation(t: f64, policy: &SeriesPolicy) -> Representation {
    if t < policy.t_switch() {
        Representation::GaussianImages
    } else {
        Representation::CosineSeries
    }
}

/// Convolution kernel of the boundary trace equation, `a(t) = -N(t, π)`.
pub fn kernel_a(t: f64, policy: &SeriesPolicy) -> Result<KernelSample> {
    kernel_a_in(t, default_representation(t, policy), policy)
}

/// `a(t)` in a forced representation.
pub fn kernel_a_in(t: f64, representation: Representation, policy: &SeriesPolicy) -> Result<KernelSample> {
    let mut s = shifted_in(t, representation, policy)?;
    s.value -= FRAC_1_PI;
    Ok(s)
}

/// Shifted kernel `a_s = a + 1/π`, extended continuously by `a_s(0) = 1/π`.
pub fn shifted_kernel_as(t: f64, policy: &SeriesPolicy) -> Result<f64> {
    if t == 0.0 {
        return Ok(FRAC_1_PI);
    }
    if t < 0.0 || !t.is_finite() {
        return Err(Error::domain("shifted_kernel_as", format!("t must be nonnegative, got {t}")));
    }
    shifted_in(t, default_representation(t, policy), policy).map(|s| s.value)
}

/// Term-wise derivative `a_s'(t) = (2/π) Σ (-1)^k k² e^{-tk²}`.
pub fn kernel_as_prime(t: f64, policy: &SeriesPolicy) -> Result<f64> {
    kernel_as_prime_in(t, default_representation(t, policy), policy)
}

/// `a_s'(t)` in a forced representation.
pub fn kernel_as_prime_in(t: f64, representation: Representation, policy: &SeriesPolicy) -> Result<f64> {
    const CTX: &str = "kernel_as_prime";
    check_time(t, CTX)?;
    let tol = policy.tail_tol();
    match representation {
        Representation::CosineSeries => {
            let (s, _) = cosine_sum(t, |k| -alternating(k), 2, policy, tol / FRAC_2_PI, CTX)?;
            Ok(FRAC_2_PI * s)
        }
        Representation::GaussianImages => {
            let (dn, _) = gaussian_images(t, PI, true, policy, tol, CTX)?;
            Ok(-dn)
        }
    }
}

fn check_forcing_time(t: f64) -> Result<()> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::domain("forcing_f", format!("t must be nonnegative, got {t}")));
    }
    Ok(())
}

/// Trace at `x = π` of the free Neumann evolution of `u0`.
pub fn forcing_f(t: f64, u0: &InitialData) -> Result<f64> {
    check_forcing_time(t)?;
    let w = (2.0 / PI).sqrt();
    let tail: f64 = u0
        .modes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = (i + 1) as f64;
            -alternating(i + 1) * c * (-t * k * k).exp()
        })
        .sum();
    Ok(u0.mean + w * tail)
}

/// Time derivative of [`forcing_f`], differentiated term by term.
pub fn forcing_f_prime(t: f64, u0: &InitialData) -> Result<f64> {
    check_forcing_time(t)?;
    let w = (2.0 / PI).sqrt();
    let tail: f64 = u0
        .modes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = (i + 1) as f64;
            alternating(i + 1) * c * k * k * (-t * k * k).exp()
        })
        .sum();
    Ok(w * tail)
}

fn oscillation_start(scale: f64) -> usize {
    2 * scale.abs().sqrt().ceil() as usize + 1
}

/// Fourier transform of `a_s`: `(2/π) Σ (-1)^{k+1} (k² - iω)/(k⁴ + ω²)`.
pub fn fourier_as(omega: f64, policy: &SeriesPolicy) -> Result<Complex64> {
    let w2 = omega * omega;
    let s = alternating_sum(
        |k| {
            let k2 = (k * k) as f64;
            Complex64::new(k2, -omega) / (k2 * k2 + w2)
        },
        oscillation_start(omega),
        policy,
        "fourier_as",
    )?;
    Ok(FRAC_2_PI * s.value)
}

/// Fourier transform of the distributional derivative of `a_s`, including
/// the `-1/π` contribution of the jump at `t = 0`.
pub fn fourier_as_prime(omega: f64, policy: &SeriesPolicy) -> Result<Complex64> {
    let w2 = omega * omega;
    let s = alternating_sum(
        |k| {
            let k2 = (k * k) as f64;
            Complex64::new(w2, omega * k2) / (k2 * k2 + w2)
        },
        oscillation_start(omega),
        policy,
        "fourier_as_prime",
    )?;
    Ok(Complex64::new(-FRAC_1_PI, 0.0) + FRAC_2_PI * s.value)
}

/// How [`laplace_a`] evaluates the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplaceMode {
    Series,
    ClosedForm,
}

pub(crate) fn check_laplace_arg(s: Complex64, context: &'static str) -> Result<()> {
    if !s.re.is_finite() || !s.im.is_finite() {
        return Err(Error::domain(context, "non-finite argument"));
    }
    if s.re == 0.0 && s.im == 0.0 {
        return Err(Error::domain(context, "pole at s = 0"));
    }
    if s.im == 0.0 && s.re < 0.0 {
        return Err(Error::domain(context, format!("s = {} lies on the branch cut", s.re)));
    }
    Ok(())
}

/// `1 / sinh(z)` without overflow for large `|Re z|`.
pub(crate) fn csch(z: Complex64) -> Complex64 {
    if z.re > 20.0 {
        let e = (-z).exp();
        2.0 * e / (1.0 - e * e)
    } else if z.re < -20.0 {
        let e = z.exp();
        -2.0 * e / (1.0 - e * e)
    } else {
        1.0 / z.sinh()
    }
}

/// `coth(z)` without overflow for large `|Re z|`.
pub(crate) fn coth(z: Complex64) -> Complex64 {
    if z.re > 20.0 {
        let e = (-2.0 * z).exp();
        (1.0 + e) / (1.0 - e)
    } else if z.re < -20.0 {
        let e = (2.0 * z).exp();
        -(1.0 + e) / (1.0 - e)
    } else {
        z.cosh() / z.sinh()
    }
}

/// Laplace transform of the kernel `a`.
///
/// The series mode needs `Re s > 0`; the closed form
/// `-1/(√s sinh(π√s))` (principal root) also covers the imaginary axis.
pub fn laplace_a(s: Complex64, mode: LaplaceMode, policy: &SeriesPolicy) -> Result<Complex64> {
    const CTX: &str = "laplace_a";
    check_laplace_arg(s, CTX)?;
    match mode {
        LaplaceMode::ClosedForm => {
            let r = s.sqrt();
            Ok(-csch(PI * r) / r)
        }
        LaplaceMode::Series => {
            if s.re <= 0.0 {
                return Err(Error::domain(CTX, "series mode requires Re s > 0"));
            }
            let sum = alternating_sum(
                |k| 1.0 / (s + (k * k) as f64),
                oscillation_start(s.norm()),
                policy,
                CTX,
            )?;
            Ok(-FRAC_1_PI / s + FRAC_2_PI * sum.value)
        }
    }
}
