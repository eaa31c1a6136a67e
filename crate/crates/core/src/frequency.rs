//! Frequency-domain view of the open loop: transfer functions, Nyquist and
//! Popov curves, the crossing frequency `ω₀`, the critical gain `β₀`, and the
//! Popov functional `M(q)`.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{check_laplace_arg, coth, csch, laplace_a, LaplaceMode};
use crate::series::{alternating_sum, log_space, SeriesPolicy};
use crate::solve::{bisect, first_sign_change, golden_maximize};

const FRAC_2_PI: f64 = 2.0 * FRAC_1_PI;

/// Which open loop to analyse: sensor at the far end (`Nonlocal`) or
/// collocated with the actuator (`Local`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loop {
    Nonlocal,
    Local,
}

/// `G_nloc(s) = 1 / (√s sinh(π√s))`.
pub fn transfer_nloc(s: Complex64) -> Result<Complex64> {
    check_laplace_arg(s, "transfer_nloc")?;
    let r = s.sqrt();
    Ok(csch(PI * r) / r)
}

/// `G_loc(s) = cosh(π√s) / (√s sinh(π√s))`.
pub fn transfer_loc(s: Complex64) -> Result<Complex64> {
    check_laplace_arg(s, "transfer_loc")?;
    let r = s.sqrt();
    Ok(coth(PI * r) / r)
}

pub fn transfer(s: Complex64, which: Loop) -> Result<Complex64> {
    match which {
        Loop::Nonlocal => transfer_nloc(s),
        Loop::Local => transfer_loc(s),
    }
}

/// Partial-fraction series of `G_nloc`, valid for `Re s > 0`.
pub fn transfer_nloc_series(s: Complex64, policy: &SeriesPolicy) -> Result<Complex64> {
    laplace_a(s, LaplaceMode::Series, policy).map(|v| -v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Nyquist,
    Popov,
}

/// A sampled frequency-response curve.
///
/// For Nyquist curves the detour points around the pole at the origin are
/// stored at indices `detour.0..detour.1`, with `omegas[i] = Im s` so the
/// parameter stays strictly increasing along the closed curve.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyCurve {
    pub omegas: Vec<f64>,
    pub points: Vec<Complex64>,
    pub detour_radius: f64,
    pub kind: CurveKind,
    pub detour: (usize, usize),
}

fn check_range(omega_min: f64, omega_max: f64, n: usize, context: &'static str) -> Result<()> {
    if !(omega_min > 0.0 && omega_min < omega_max && omega_max.is_finite()) {
        return Err(Error::domain(
            context,
            format!("need 0 < omega_min < omega_max, got [{omega_min}, {omega_max}]"),
        ));
    }
    if n < 2 {
        return Err(Error::domain(context, "need at least two samples"));
    }
    Ok(())
}

/// Samples `G(iω)` on `±[omega_min, omega_max]` and closes the curve with a
/// semicircle `s = r e^{iφ}`, `φ ∈ (-π/2, π/2)`, around the pole at 0.
pub fn nyquist_curve(
    omega_min: f64,
    omega_max: f64,
    n: usize,
    detour_radius: f64,
    which: Loop,
) -> Result<FrequencyCurve> {
    const CTX: &str = "nyquist_curve";
    check_range(omega_min, omega_max, n, CTX)?;
    if !(detour_radius > 0.0 && detour_radius <= omega_min) {
        return Err(Error::domain(
            CTX,
            format!("detour radius must lie in (0, omega_min], got {detour_radius}"),
        ));
    }
    let positive = log_space(omega_min, omega_max, n);
    let n_detour = (n / 4).max(16);
    let mut omegas = Vec::with_capacity(2 * n + n_detour);
    let mut points = Vec::with_capacity(2 * n + n_detour);

    for &w in positive.iter().rev() {
        omegas.push(-w);
        points.push(transfer(Complex64::new(0.0, -w), which)?);
    }
    let start = omegas.len();
    for j in 0..n_detour {
        let phi = -PI / 2.0 + PI * (j + 1) as f64 / (n_detour + 1) as f64;
        let s = Complex64::from_polar(detour_radius, phi);
        omegas.push(s.im);
        points.push(transfer(s, which)?);
    }
    let end = omegas.len();
    for &w in &positive {
        omegas.push(w);
        points.push(transfer(Complex64::new(0.0, w), which)?);
    }
    Ok(FrequencyCurve {
        omegas,
        points,
        detour_radius,
        kind: CurveKind::Nyquist,
        detour: (start, end),
    })
}

/// Popov point `Re G(iω) + i ω Im G(iω)` of the nonlocal loop.
pub fn popov_point(omega: f64) -> Result<Complex64> {
    let g = transfer_nloc(Complex64::new(0.0, omega))?;
    Ok(Complex64::new(g.re, omega * g.im))
}

/// Popov curve of the nonlocal loop on a log grid of positive frequencies.
pub fn popov_curve(omega_min: f64, omega_max: f64, n: usize) -> Result<FrequencyCurve> {
    check_range(omega_min, omega_max, n, "popov_curve")?;
    let omegas = log_space(omega_min, omega_max, n);
    let points = omegas.iter().map(|&w| popov_point(w)).collect::<Result<Vec<_>>>()?;
    Ok(FrequencyCurve {
        omegas,
        points,
        detour_radius: 0.0,
        kind: CurveKind::Popov,
        detour: (0, 0),
    })
}

/// A point where the Popov curve meets the real axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisCrossing {
    pub omega: f64,
    pub re: f64,
}

/// Real-axis crossings of the Popov curve detected on a log grid and
/// refined by bisection on `Im G(iω)`.
pub fn popov_axis_crossings(omega_min: f64, omega_max: f64, n: usize, tol: f64) -> Result<Vec<AxisCrossing>> {
    let curve = popov_curve(omega_min, omega_max, n)?;
    let im = |w: f64| transfer_nloc(Complex64::new(0.0, w)).map(|g| g.im);
    let mut out = Vec::new();
    for i in 0..curve.omegas.len() - 1 {
        let (a, b) = (curve.points[i].im, curve.points[i + 1].im);
        if a.signum() != b.signum() {
            let w = bisect(im, curve.omegas[i], curve.omegas[i + 1], tol, "popov_axis_crossings")?;
            out.push(AxisCrossing {
                omega: w,
                re: popov_point(w)?.re,
            });
        }
    }
    Ok(out)
}

/// `sinh(x)cos(x) + cosh(x)sin(x)` with `x = π√(ω/2)`; its positive zeros are
/// the frequencies where `G_nloc(iω)` is real.
pub fn crossing_function(omega: f64) -> f64 {
    let x = PI * (omega / 2.0).sqrt();
    x.sinh() * x.cos() + x.cosh() * x.sin()
}

/// [`crossing_function`] divided by `cosh(x)`: `sin x + tanh x cos x`.
/// Same zeros, bounded for every `ω`.
fn crossing_function_scaled(omega: f64) -> f64 {
    let x = PI * (omega / 2.0).sqrt();
    x.sin() + x.tanh() * x.cos()
}

/// `Σ (-1)^{k-1} / (1 + k⁴/ω²)`; equals `1/2` exactly on the crossing set.
pub fn nyquist_condition_sum(omega: f64, policy: &SeriesPolicy) -> Result<f64> {
    let w2 = omega * omega;
    alternating_sum(
        |k| {
            let k2 = (k * k) as f64;
            Complex64::new(w2 / (w2 + k2 * k2), 0.0)
        },
        2 * omega.abs().sqrt().ceil() as usize + 1,
        policy,
        "nyquist_condition_sum",
    )
    .map(|s| s.value.re)
}

/// Crossing frequency and the gain at which the loop reaches `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    pub omega0: f64,
    pub beta0: f64,
    /// `|h(ω₀)|` for the tan/tanh crossing function `h`.
    pub residual: f64,
    /// `|Σ (-1)^{k-1}/(1 + k⁴/ω₀²) - 1/2|`.
    pub nycond_residual: f64,
    /// `G_nloc(iω₀)`, real at the crossing.
    pub g_at_crossing: f64,
}

/// Bracket scan resolution used to isolate the smallest root.
pub const CROSSING_SCAN_STEP: f64 = 1e-2;

/// Smallest root of the tan/tanh crossing condition in `[lo, hi]` and the
/// corresponding critical gain `β₀ = -1/G_nloc(iω₀)`.
pub fn crossing_omega0(lo: f64, hi: f64, tol: f64, policy: &SeriesPolicy) -> Result<CriticalPair> {
    const CTX: &str = "crossing_omega0";
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::domain(CTX, format!("invalid bracket [{lo}, {hi}]")));
    }
    let f = |w: f64| Ok(crossing_function_scaled(w));
    let (a, b) = first_sign_change(f, lo, hi, CROSSING_SCAN_STEP, CTX)?;
    let omega0 = bisect(f, a, b, tol, CTX)?;
    critical_pair_at(omega0, NYCOND_TOL.max(10.0 * tol), policy)
}

/// Same root located through the series form of the crossing condition.
pub fn crossing_omega0_series(lo: f64, hi: f64, tol: f64, policy: &SeriesPolicy) -> Result<f64> {
    const CTX: &str = "crossing_omega0_series";
    let f = |w: f64| nyquist_condition_sum(w, policy).map(|s| s - 0.5);
    let (a, b) = first_sign_change(f, lo, hi, CROSSING_SCAN_STEP, CTX)?;
    bisect(f, a, b, tol, CTX)
}

/// Tolerance on the series crossing condition at the returned root; a
/// coarser root tolerance loosens it to `10·tol`.
pub const NYCOND_TOL: f64 = 1e-8;

fn critical_pair_at(omega0: f64, check_tol: f64, policy: &SeriesPolicy) -> Result<CriticalPair> {
    let g = transfer_nloc(Complex64::new(0.0, omega0))?;
    if g.im.abs() > check_tol * g.norm() {
        return Err(Error::NotACrossing {
            omega: omega0,
            imag: g.im.abs(),
        });
    }
    let nycond_residual = (nyquist_condition_sum(omega0, policy)? - 0.5).abs();
    if nycond_residual > check_tol {
        return Err(Error::Tolerance {
            context: "crossing_omega0",
            tol: check_tol,
            terms: 0,
            estimate: nycond_residual,
        });
    }
    Ok(CriticalPair {
        omega0,
        beta0: -1.0 / g.re,
        residual: crossing_function(omega0).abs(),
        nycond_residual,
        g_at_crossing: g.re,
    })
}

/// The first `count` positive frequencies at which `G_nloc(iω)` is real.
pub fn nyquist_crossings(count: usize, tol: f64) -> Result<Vec<f64>> {
    const CTX: &str = "nyquist_crossings";
    let f = |w: f64| Ok(crossing_function_scaled(w));
    let mut out = Vec::with_capacity(count);
    let mut lo = CROSSING_SCAN_STEP;
    while out.len() < count {
        let (a, b) = first_sign_change(f, lo, lo + 1e4, CROSSING_SCAN_STEP, CTX)?;
        out.push(bisect(f, a, b, tol, CTX)?);
        lo = b;
    }
    Ok(out)
}

/// `A(ω) = (2/π) Σ (-1)^{k+1} k²/(k⁴ + ω²)`, the real part of `â_s(ω)`.
pub fn popov_a(omega: f64, policy: &SeriesPolicy) -> Result<f64> {
    let w2 = omega * omega;
    let s = alternating_sum(
        |k| {
            let k2 = (k * k) as f64;
            Complex64::new(k2 / (k2 * k2 + w2), 0.0)
        },
        2 * omega.abs().sqrt().ceil() as usize + 1,
        policy,
        "popov_A",
    )?;
    Ok(FRAC_2_PI * s.value.re)
}

/// `B(ω) = -1/π + (2/π) Σ (-1)^{k+1} ω²/(k⁴ + ω²)`, the real part of `â_s'(ω)`.
pub fn popov_b(omega: f64, policy: &SeriesPolicy) -> Result<f64> {
    Ok(-FRAC_1_PI + FRAC_2_PI * nyquist_condition_sum(omega, policy)?)
}

/// Frequency grid on which suprema over `ω` are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaGrid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    /// Also sample `ω = 0` exactly.
    pub include_zero: bool,
    /// Width (in `ln ω`) at which golden-section refinement stops.
    pub refine_tol: f64,
}

impl Default for OmegaGrid {
    fn default() -> Self {
        Self {
            min: 1e-3,
            max: 1e4,
            n: 2000,
            include_zero: true,
            refine_tol: 1e-9,
        }
    }
}

impl OmegaGrid {
    pub fn points(&self) -> Vec<f64> {
        let mut pts = Vec::with_capacity(self.n + 1);
        if self.include_zero {
            pts.push(0.0);
        }
        pts.extend(log_space(self.min, self.max, self.n));
        pts
    }
}

/// `A` and `B` tabulated once on an [`OmegaGrid`]; every `q` reuses them.
#[derive(Debug, Clone)]
pub struct PopovTable {
    pub omegas: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    grid: OmegaGrid,
    policy: SeriesPolicy,
}

/// `sup_ω [A(ω) + q B(ω)]` and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Supremum {
    pub omega: f64,
    pub value: f64,
}

impl PopovTable {
    pub fn new(grid: OmegaGrid, policy: SeriesPolicy) -> Result<Self> {
        if !(grid.min > 0.0 && grid.min < grid.max) || grid.n < 2 {
            return Err(Error::Config(format!("invalid omega grid {grid:?}")));
        }
        let omegas = grid.points();
        let ab: Vec<(f64, f64)> = omegas
            .par_iter()
            .map(|&w| Ok((popov_a(w, &policy)?, popov_b(w, &policy)?)))
            .collect::<Result<_>>()?;
        let (a, b) = ab.into_iter().unzip();
        Ok(Self {
            omegas,
            a,
            b,
            grid,
            policy,
        })
    }

    pub fn grid(&self) -> &OmegaGrid {
        &self.grid
    }

    pub fn policy(&self) -> &SeriesPolicy {
        &self.policy
    }

    /// Grid-only maximum of `A + qB`; returns the index and value.
    pub fn grid_sup(&self, q: f64) -> (usize, f64) {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(a, b)| a + q * b)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }

    /// Grid maximum refined by golden-section search between the neighbours
    /// of the grid argmax.
    pub fn sup(&self, q: f64) -> Result<Supremum> {
        let (i, grid_value) = self.grid_sup(q);
        let last = self.omegas.len() - 1;
        let objective = |w: f64| -> Result<f64> { Ok(popov_a(w, &self.policy)? + q * popov_b(w, &self.policy)?) };
        let lo = self.omegas[i.saturating_sub(1)];
        let hi = self.omegas[(i + 1).min(last)];
        let refined = if lo == 0.0 {
            let (w, v) = golden_maximize(objective, 0.0, hi, self.grid.refine_tol * hi)?;
            Supremum { omega: w, value: v }
        } else {
            let (lw, v) = golden_maximize(|x: f64| objective(x.exp()), lo.ln(), hi.ln(), self.grid.refine_tol)?;
            Supremum {
                omega: lw.exp(),
                value: v,
            }
        };
        if refined.value >= grid_value {
            Ok(refined)
        } else {
            Ok(Supremum {
                omega: self.omegas[i],
                value: grid_value,
            })
        }
    }
}

/// Value of `M(q) = 1 / sup_ω [A(ω) + q B(ω)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MOfQ {
    Bounded { m: f64, omega_star: f64 },
    /// The supremum is not positive, so every gain passes.
    Unbounded { sup: f64 },
}

impl MOfQ {
    pub fn value(&self) -> f64 {
        match *self {
            MOfQ::Bounded { m, .. } => m,
            MOfQ::Unbounded { .. } => f64::INFINITY,
        }
    }
}

pub fn m_of_q(q: f64, table: &PopovTable) -> Result<MOfQ> {
    if !(q >= 0.0) || !q.is_finite() {
        return Err(Error::domain("M_of_q", format!("q must be nonnegative, got {q}")));
    }
    let s = table.sup(q)?;
    if s.value <= 0.0 {
        Ok(MOfQ::Unbounded { sup: s.value })
    } else {
        Ok(MOfQ::Bounded {
            m: 1.0 / s.value,
            omega_star: s.omega,
        })
    }
}

/// Maximiser of `M(q)` over a bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopovOptimum {
    pub q_star: f64,
    pub beta_star: f64,
    pub omega_star: f64,
}

/// Number of log-spaced `q` samples used to seed the golden-section search.
const Q_SCAN: usize = 61;

/// `sup_q M(q)` on `[q_lo, q_hi]` (`q_lo > 0`): coarse log scan, then
/// golden-section search in `ln q` around the best sample.
pub fn beta_sup(q_lo: f64, q_hi: f64, tol: f64, table: &PopovTable) -> Result<PopovOptimum> {
    if !(q_lo > 0.0 && q_lo < q_hi) {
        return Err(Error::domain("beta_sup", format!("invalid q bracket [{q_lo}, {q_hi}]")));
    }
    let qs = log_space(q_lo, q_hi, Q_SCAN);
    let ms = qs
        .iter()
        .map(|&q| {
            let (_, v) = table.grid_sup(q);
            if v > 0.0 {
                1.0 / v
            } else {
                f64::INFINITY
            }
        })
        .collect::<Vec<_>>();
    let best = ms
        .iter()
        .enumerate()
        .fold(0, |b, (i, &m)| if m > ms[b] { i } else { b });
    let lo = qs[best.saturating_sub(1)].ln();
    let hi = qs[(best + 1).min(Q_SCAN - 1)].ln();
    let (lq, _) = golden_maximize(|x| m_of_q(x.exp(), table).map(|m| m.value()), lo, hi, tol)?;
    let q_star = lq.exp();
    match m_of_q(q_star, table)? {
        MOfQ::Bounded { m, omega_star } => Ok(PopovOptimum {
            q_star,
            beta_star: m,
            omega_star,
        }),
        MOfQ::Unbounded { .. } => Ok(PopovOptimum {
            q_star,
            beta_star: f64::INFINITY,
            omega_star: f64::NAN,
        }),
    }
}

/// Outcome of the frequency-domain test for a given `(β, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub beta: f64,
    pub q_witness: Option<f64>,
    pub satisfied: bool,
    /// `inf_ω [1/β - A(ω) - q B(ω)]` over the scanned (and refined) grid.
    pub margin: f64,
}

/// Checks `A(ω) + q B(ω) < 1/β` for all `ω ≥ 0` on the table's grid.
pub fn popov_check(beta: f64, q: f64, table: &PopovTable) -> Result<StabilityReport> {
    if !(beta > 0.0) || !(q > 0.0) {
        return Err(Error::domain("popov_check", format!("need beta > 0 and q > 0, got {beta}, {q}")));
    }
    let margin = 1.0 / beta - table.sup(q)?.value;
    let satisfied = margin > 0.0;
    Ok(StabilityReport {
        beta,
        q_witness: satisfied.then_some(q),
        satisfied,
        margin,
    })
}

/// A `q` with positive margin at `β`, or `None` when none is found. The
/// margin is concave in `q`, so the best sample of a log grid on
/// `[1e-3, 1e3]` is refined by golden-section search in `ln q`.
pub fn find_popov_q(beta: f64, table: &PopovTable) -> Result<Option<f64>> {
    if !(beta > 0.0) {
        return Err(Error::domain("find_popov_q", format!("beta must be positive, got {beta}")));
    }
    let qs = log_space(1e-3, 1e3, 121);
    let best = (0..qs.len())
        .map(|i| (i, -table.grid_sup(qs[i]).1))
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b })
        .0;
    let lo = qs[best.saturating_sub(1)].ln();
    let hi = qs[(best + 1).min(qs.len() - 1)].ln();
    let (lq, _) = golden_maximize(|x| table.sup(x.exp()).map(|s| -s.value), lo, hi, 1e-10)?;
    let report = popov_check(beta, lq.exp(), table)?;
    Ok(report.q_witness)
}

/// `d sin(πd)` and `d sinh(πd)` for `d = √(iω)` on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalSymmetry {
    pub lhs: Complex64,
    pub rhs: Complex64,
}

pub fn diagonal_symmetry_check(omega: f64) -> Result<DiagonalSymmetry> {
    if !(omega > 0.0) {
        return Err(Error::domain("diagonal_symmetry_check", "omega must be positive"));
    }
    let d = Complex64::new(0.0, omega).sqrt();
    Ok(DiagonalSymmetry {
        lhs: d * (PI * d).sin(),
        rhs: d * (PI * d).sinh(),
    })
}
