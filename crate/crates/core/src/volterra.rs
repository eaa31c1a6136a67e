//! The boundary-trace integral equation `y = f + a ∗ g_β(y)` and the energy
//! functionals built on its solutions.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{forcing_f, forcing_f_prime, kernel_a, kernel_as_prime, InitialData};
use crate::series::SeriesPolicy;

/// `g_β(w) = tanh(βw)`.
pub fn g_beta(beta: f64, w: f64) -> f64 {
    (beta * w).tanh()
}

/// `G_β(z) = ln(cosh(βz))/β`, the primitive of `g_β` vanishing at 0.
pub fn g_beta_integral(beta: f64, z: f64) -> f64 {
    let a = z.abs();
    a - LN_2 / beta + (-2.0 * beta * a).exp().ln_1p() / beta
}

/// Input of [`solve_volterra`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolterraProblem {
    pub beta: f64,
    pub u0: InitialData,
    pub horizon: f64,
    pub dt: f64,
    pub policy: SeriesPolicy,
}

impl VolterraProblem {
    pub fn new(beta: f64, u0: InitialData, horizon: f64, dt: f64, policy: SeriesPolicy) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Config(format!("beta must be positive, got {beta}")));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        if !(horizon >= dt) || !horizon.is_finite() {
            return Err(Error::Config(format!("horizon must be at least dt, got {horizon}")));
        }
        Ok(Self {
            beta,
            u0,
            horizon,
            dt,
            policy,
        })
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// Solution of the integral equation on the uniform grid `tᵢ = i·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraTrajectory {
    pub beta: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub y: Vec<f64>,
    pub g_values: Vec<f64>,
    /// `a(j·dt)` for `j = 0..=n`.
    pub kernel_row: Vec<f64>,
    pub u0: InitialData,
    pub policy: SeriesPolicy,
}

/// Trapezoid rule on a uniform grid; returns all running integrals.
fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// `dt Σ″_{j=0..i} k[i-j] g[j]` for every `i`.
fn trapezoid_convolution(kernel: &[f64], g: &[f64], dt: f64) -> Vec<f64> {
    (0..g.len())
        .into_par_iter()
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            let inner: f64 = (1..i).map(|j| kernel[i - j] * g[j]).sum();
            dt * (inner + 0.5 * (kernel[i] * g[0] + kernel[0] * g[i]))
        })
        .collect()
}

/// Product-trapezoidal solver. Since `a(0) = 0` the diagonal weight drops
/// out and every step is explicit.
pub fn solve_volterra(p: &VolterraProblem) -> Result<VolterraTrajectory> {
    let n = p.steps();
    let dt = p.dt;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    let kernel_row = times
        .par_iter()
        .map(|&t| if t == 0.0 { Ok(0.0) } else { kernel_a(t, &p.policy).map(|s| s.value) })
        .collect::<Result<Vec<f64>>>()?;
    let forcing = times
        .par_iter()
        .map(|&t| forcing_f(t, &p.u0))
        .collect::<Result<Vec<f64>>>()?;

    let mut y = Vec::with_capacity(n + 1);
    let mut g = Vec::with_capacity(n + 1);
    y.push(forcing[0]);
    g.push(g_beta(p.beta, forcing[0]));
    for i in 1..=n {
        let inner: f64 = (1..i).map(|j| kernel_row[i - j] * g[j]).sum();
        let yi = forcing[i] + dt * (inner + 0.5 * kernel_row[i] * g[0]);
        if !yi.is_finite() {
            return Err(Error::NonFinite { step: i, t: times[i] });
        }
        y.push(yi);
        g.push(g_beta(p.beta, yi));
    }
    Ok(VolterraTrajectory {
        beta: p.beta,
        dt,
        times,
        y,
        g_values: g,
        kernel_row,
        u0: p.u0.clone(),
        policy: p.policy,
    })
}

/// Energy functionals `W₁, W₂, W₃` and the splitting `W = V + R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub q: f64,
    pub times: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub w3: Vec<f64>,
    pub v: Vec<f64>,
    pub r: Vec<f64>,
    pub residual: Vec<f64>,
}

impl EnergyLedger {
    pub fn total(&self, i: usize) -> f64 {
        self.w1[i] + self.w2[i] + self.w3[i]
    }

    pub fn max_total(&self) -> f64 {
        (0..self.times.len()).map(|i| self.total(i)).fold(0.0, f64::max)
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residual.iter().fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

pub fn energy_ledger(traj: &VolterraTrajectory, q: f64) -> Result<EnergyLedger> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::domain("energy_ledger", format!("q must be positive, got {q}")));
    }
    let (beta, dt) = (traj.beta, traj.dt);
    let g = &traj.g_values;
    let n = g.len();

    let w1_integrand: Vec<f64> = g.iter().zip(&traj.y).map(|(g, y)| g * (y - g / beta)).collect();
    let w1 = cumulative_trapezoid(&w1_integrand, dt);
    let w2: Vec<f64> = traj.y.iter().map(|&y| q * g_beta_integral(beta, y)).collect();
    let g_int = cumulative_trapezoid(g, dt);
    let w3: Vec<f64> = g_int.iter().map(|s| s * s / (2.0 * PI)).collect();

    let drive = traj
        .times
        .par_iter()
        .map(|&t| Ok(forcing_f(t, &traj.u0)? + q * forcing_f_prime(t, &traj.u0)?))
        .collect::<Result<Vec<f64>>>()?;
    let v_integrand: Vec<f64> = g.iter().zip(&drive).map(|(g, d)| g * d).collect();
    let v0 = q * g_beta_integral(beta, traj.y[0]);
    let v: Vec<f64> = cumulative_trapezoid(&v_integrand, dt).into_iter().map(|x| x + v0).collect();

    // K = a_s + q a_s', with a_s(0) = 1/π and a_s'(0) = 0
    let kernel = traj
        .kernel_row
        .par_iter()
        .enumerate()
        .map(|(j, &a)| {
            if j == 0 {
                Ok(1.0 / PI)
            } else {
                Ok(a + 1.0 / PI + q * kernel_as_prime(j as f64 * dt, &traj.policy)?)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let conv = trapezoid_convolution(&kernel, g, dt);
    let r_integrand: Vec<f64> = (0..n).map(|i| g[i] * (conv[i] - g[i] / beta)).collect();
    let r = cumulative_trapezoid(&r_integrand, dt);

    let residual = (0..n).map(|i| w1[i] + w2[i] + w3[i] - v[i] - r[i]).collect();
    Ok(EnergyLedger {
        q,
        times: traj.times.clone(),
        w1,
        w2,
        w3,
        v,
        r,
        residual,
    })
}

pub const DEFAULT_DECAY_THRESHOLD: f64 = 1e-3;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub decayed: bool,
    pub tail_sup: f64,
    pub w1_final: f64,
}

fn tail_start(len: usize, tail_fraction: f64) -> usize {
    let f = tail_fraction.clamp(0.0, 1.0);
    ((1.0 - f) * (len - 1) as f64).floor() as usize
}

/// Sup of `|y|` over the trailing `tail_fraction` of the horizon, compared
/// against `threshold`. `w1_final` is `W₁` at the horizon.
pub fn decay_diagnostic(traj: &VolterraTrajectory, tail_fraction: f64, threshold: f64) -> DecayReport {
    let start = tail_start(traj.y.len(), tail_fraction);
    let tail_sup = traj.y[start..].iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let mut w1_final = 0.0;
    for i in 1..traj.y.len() {
        let a = traj.g_values[i - 1] * (traj.y[i - 1] - traj.g_values[i - 1] / traj.beta);
        let b = traj.g_values[i] * (traj.y[i] - traj.g_values[i] / traj.beta);
        w1_final += 0.5 * traj.dt * (a + b);
    }
    DecayReport {
        decayed: tail_sup < threshold,
        tail_sup,
        w1_final,
    }
}

/// Number of strict sign changes in a sequence, ignoring exact zeros.
pub fn sign_changes(values: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in values {
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailOscillation {
    pub sign_changes: usize,
    pub amplitude: f64,
}

/// Sign changes and peak amplitude of `values` over its trailing fraction.
pub fn tail_oscillation(values: &[f64], tail_fraction: f64) -> TailOscillation {
    let tail = &values[tail_start(values.len(), tail_fraction)..];
    TailOscillation {
        sign_changes: sign_changes(tail),
        amplitude: tail.iter().fold(0.0f64, |m, y| m.max(y.abs())),
    }
}

/// `|ū₀ − (1/π)∫₀ᵀ g_β(y)|`; small on runs that have settled.
pub fn mean_identity_residual(traj: &VolterraTrajectory) -> f64 {
    let total = cumulative_trapezoid(&traj.g_values, traj.dt).last().copied().unwrap_or(0.0);
    (traj.u0.mean - total / PI).abs()
}
