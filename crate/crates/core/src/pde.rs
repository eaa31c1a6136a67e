//! Galerkin truncation of the thermostat problem in the Neumann cosine basis
//! `φ₀ = 1/√π`, `φₖ = √(2/π) cos(kx)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::InitialData;
use crate::volterra::g_beta;

fn basis_at_zero(k: usize) -> f64 {
    if k == 0 {
        PI.sqrt().recip()
    } else {
        (2.0 / PI).sqrt()
    }
}

/// Coefficients `û₀..û_K` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralState {
    pub t: f64,
    pub beta: f64,
    pub coeffs: Vec<f64>,
}

impl SpectralState {
    /// Projects `u₀` onto modes `0..=k`; modes above `k` are dropped.
    pub fn from_initial(u0: &InitialData, beta: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[0] = u0.mean * PI.sqrt();
        for (i, &c) in u0.modes.iter().take(k).enumerate() {
            coeffs[i + 1] = c;
        }
        Self { t: 0.0, beta, coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `Σ ûₖ φₖ(x)`.
    pub fn trace(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k == 0 {
                    c * basis_at_zero(0)
                } else {
                    c * basis_at_zero(k) * (k as f64 * x).cos()
                }
            })
            .sum()
    }

    /// Trace at `π` as the sign-alternating sum.
    pub fn trace_pi(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { c * basis_at_zero(k) } else { -c * basis_at_zero(k) })
            .sum()
    }

    pub fn trace_zero(&self) -> f64 {
        self.coeffs.iter().enumerate().map(|(k, c)| c * basis_at_zero(k)).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `(Σ (1 + k²) ûₖ²)^{1/2}`.
    pub fn h1_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (1.0 + (k * k) as f64) * c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Spatial mean `ū = û₀/√π`.
    pub fn mean(&self) -> f64 {
        self.coeffs[0] / PI.sqrt()
    }
}

/// Time derivative of every coefficient.
pub fn rhs_coefficients(state: &SpectralState) -> Vec<f64> {
    let g = g_beta(state.beta, state.trace_pi());
    state
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| -((k * k) as f64) * c - basis_at_zero(k) * g)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    /// Exponential Euler: exact linear part, nonlinearity frozen at the
    /// start of the step.
    ImexEuler,
    /// Exponential trapezoid: Euler predictor, then the nonlinearity is
    /// interpolated linearly across the step.
    #[default]
    ImexTrapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub k: usize,
    pub dt: f64,
    pub horizon: f64,
    pub stepper: Stepper,
    pub snapshot_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            k: 64,
            dt: 0.005,
            horizon: 20.0,
            stepper: Stepper::default(),
            snapshot_every: 1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt) || !self.horizon.is_finite() {
            return Err(Error::Config(format!("horizon must be at least dt, got {}", self.horizon)));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("snapshot_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// `(1 - e^{-λh})/λ` and `(h - P₁)/λ` with their `λ → 0` limits.
fn etd_weights(lambda: f64, h: f64) -> (f64, f64) {
    let x = lambda * h;
    if x < 1e-3 {
        let p1 = h * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0);
        let p2 = h * h * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0);
        (p1, p2)
    } else {
        let p1 = -(-x).exp_m1() / lambda;
        (p1, (h - p1) / lambda)
    }
}

struct Propagator {
    decay: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
    phi0: Vec<f64>,
}

impl Propagator {
    fn new(k: usize, h: f64) -> Self {
        let mut decay = Vec::with_capacity(k + 1);
        let mut p1 = Vec::with_capacity(k + 1);
        let mut p2 = Vec::with_capacity(k + 1);
        for m in 0..=k {
            let lambda = (m * m) as f64;
            decay.push((-lambda * h).exp());
            let (a, b) = etd_weights(lambda, h);
            p1.push(a);
            p2.push(b);
        }
        let phi0 = (0..=k).map(basis_at_zero).collect();
        Self { decay, p1, p2, phi0 }
    }

    fn euler(&self, coeffs: &[f64], g: f64, out: &mut [f64]) {
        for m in 0..coeffs.len() {
            out[m] = self.decay[m] * coeffs[m] - self.phi0[m] * g * self.p1[m];
        }
    }
}

/// Integrates from `state0` with the given configuration. The state is
/// resized to `cfg.k` modes first. Snapshots include the initial state.
pub fn integrate(state0: &SpectralState, cfg: &SimConfig) -> Result<Vec<SpectralState>> {
    cfg.validate()?;
    if !(state0.beta >= 0.0) {
        return Err(Error::Config(format!("beta must be nonnegative, got {}", state0.beta)));
    }
    let steps = (cfg.horizon / cfg.dt).round() as usize;
    let h = cfg.dt;
    let beta = state0.beta;
    let prop = Propagator::new(cfg.k, h);

    let mut coeffs = state0.coeffs.clone();
    coeffs.resize(cfg.k + 1, 0.0);
    let mut state = SpectralState {
        t: state0.t,
        beta,
        coeffs,
    };
    let mut next = vec![0.0; cfg.k + 1];
    let mut snapshots = Vec::with_capacity(steps / cfg.snapshot_every + 2);
    snapshots.push(state.clone());

    for step in 1..=steps {
        let g0 = g_beta(beta, state.trace_pi());
        prop.euler(&state.coeffs, g0, &mut next);
        if cfg.stepper == Stepper::ImexTrapezoid {
            let predicted = SpectralState {
                t: 0.0,
                beta,
                coeffs: next.clone(),
            };
            let slope = (g_beta(beta, predicted.trace_pi()) - g0) / h;
            for m in 0..next.len() {
                next[m] -= prop.phi0[m] * slope * prop.p2[m];
            }
        }
        std::mem::swap(&mut state.coeffs, &mut next);
        state.t = state0.t + step as f64 * h;
        if state.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { step, t: state.t });
        }
        if step % cfg.snapshot_every == 0 {
            snapshots.push(state.clone());
        }
    }
    Ok(snapshots)
}

/// Residual of `½ d/dt ‖u‖² = -‖u_x‖² - u(0) g_β(u(π))` with the time
/// derivative taken by centred differences over interior snapshots.
/// Returns `(t, residual)` pairs.
pub fn dissipation_check(snapshots: &[SpectralState], beta: f64) -> Vec<(f64, f64)> {
    let energy: Vec<f64> = snapshots.iter().map(|s| 0.5 * s.l2_norm().powi(2)).collect();
    (1..snapshots.len().saturating_sub(1))
        .map(|i| {
            let s = &snapshots[i];
            let dt = snapshots[i + 1].t - snapshots[i - 1].t;
            let lhs = (energy[i + 1] - energy[i - 1]) / dt;
            let grad: f64 = s.coeffs.iter().enumerate().map(|(k, c)| ((k * k) as f64) * c * c).sum();
            let rhs = -grad - s.trace_zero() * g_beta(beta, s.trace_pi());
            (s.t, lhs - rhs)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEquivalence {
    pub trace_tail: f64,
    pub h1_tail: f64,
}

/// Trailing sup of `|u(π)|` and of the H¹ norm over the last `tail_fraction`
/// of the snapshots.
pub fn h1_decay_equivalence(snapshots: &[SpectralState], tail_fraction: f64) -> DecayEquivalence {
    let n = snapshots.len();
    let start = ((1.0 - tail_fraction.clamp(0.0, 1.0)) * n.saturating_sub(1) as f64).floor() as usize;
    let tail = &snapshots[start.min(n)..];
    DecayEquivalence {
        trace_tail: tail.iter().fold(0.0, |m: f64, s| m.max(s.trace_pi().abs())),
        h1_tail: tail.iter().fold(0.0, |m: f64, s| m.max(s.h1_norm())),
    }
}
