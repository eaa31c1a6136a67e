//! Truncation policy and summation helpers shared by every eigenfunction series.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation and representation-switch rules for series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPolicy {
    max_terms: usize,
    tail_tol: f64,
    t_switch: f64,
}

impl SeriesPolicy {
    pub fn new(max_terms: usize, tail_tol: f64, t_switch: f64) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::Config("max_terms must be at least 1".into()));
        }
        if !(tail_tol > 0.0) || !tail_tol.is_finite() {
            return Err(Error::Config(format!("tail_tol must be positive, got {tail_tol}")));
        }
        if !(t_switch > 0.0) || !t_switch.is_finite() {
            return Err(Error::Config(format!("t_switch must be positive, got {t_switch}")));
        }
        Ok(Self {
            max_terms,
            tail_tol,
            t_switch,
        })
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn t_switch(&self) -> f64 {
        self.t_switch
    }

    /// Same policy with a different absolute tail tolerance.
    pub fn with_tail_tol(self, tail_tol: f64) -> Result<Self> {
        Self::new(self.max_terms, tail_tol, self.t_switch)
    }
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        Self {
            max_terms: 1_000_000,
            tail_tol: 1e-13,
            t_switch: 1.0,
        }
    }
}

/// Result of a truncated summation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Summed<T> {
    pub value: T,
}

/// Number of repeated-averaging passes applied to the tail partial sums.
const AVERAGING_LEVELS: usize = 14;

/// Sums `Σ_{k≥1} (-1)^{k+1} c_k` for a sequence that is eventually smooth and
/// decreasing in `k`.
///
/// Terms are added directly up to `k_start` (callers pick it past the point
/// where `c_k` becomes monotone) and the remaining oscillating tail is
/// extrapolated by repeated averaging of consecutive partial sums
/// (Euler–van Wijngaarden). The start index doubles until the estimate
/// drops below the policy tolerance.
pub(crate) fn alternating_sum<F>(
    term: F,
    k_start: usize,
    policy: &SeriesPolicy,
    context: &'static str,
) -> Result<Summed<Complex64>>
where
    F: Fn(usize) -> Complex64,
{
    let levels = AVERAGING_LEVELS;
    let mut k0 = k_start.max(2 * levels).max(1);
    let mut partial = Complex64::new(0.0, 0.0);
    let mut summed_to = 0usize;
    let mut magnitude = 0.0f64;
    let mut last_estimate = f64::INFINITY;

    loop {
        if k0 + levels > policy.max_terms() {
            return Err(Error::Tolerance {
                context,
                tol: policy.tail_tol(),
                terms: policy.max_terms(),
                estimate: last_estimate,
            });
        }
        while summed_to < k0 {
            summed_to += 1;
            let c = term(summed_to);
            magnitude = magnitude.max(c.norm());
            partial += sign(summed_to) * c;
        }
        let mut sums = Vec::with_capacity(levels + 1);
        sums.push(partial);
        let mut running = partial;
        for k in k0 + 1..=k0 + levels {
            running += sign(k) * term(k);
            sums.push(running);
        }
        let mut previous = sums.clone();
        for _ in 0..levels {
            previous = sums.clone();
            sums = sums.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        let value = sums[0];
        let estimate = 0.5 * (previous[1] - previous[0]).norm();
        let floor = 64.0 * f64::EPSILON * (magnitude + value.norm());
        if estimate <= policy.tail_tol() || estimate <= floor {
            return Ok(Summed { value });
        }
        last_estimate = estimate;
        k0 *= 2;
    }
}

#[inline]
fn sign(k: usize) -> f64 {
    if k % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Logarithmically spaced grid with `n ≥ 2` points on `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / last).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_policy() {
        assert!(SeriesPolicy::new(0, 1e-10, 1.0).is_err());
        assert!(SeriesPolicy::new(10, 0.0, 1.0).is_err());
        assert!(SeriesPolicy::new(10, 1e-10, -1.0).is_err());
    }

    #[test]
    fn eta_two_matches_closed_form() {
        // Σ (-1)^{k+1} / k² = π²/12
        let p = SeriesPolicy::default();
        let s = alternating_sum(|k| Complex64::new(1.0 / (k * k) as f64, 0.0), 1, &p, "eta").unwrap();
        assert!((s.value.re - PI * PI / 12.0).abs() < 1e-13);
    }

    #[test]
    fn slowly_converging_log_two() {
        // Σ (-1)^{k+1} / k = ln 2; direct summation would need ~1e13 terms
        let p = SeriesPolicy::default();
        let s = alternating_sum(|k| Complex64::new(1.0 / k as f64, 0.0), 1, &p, "ln2").unwrap();
        assert!((s.value.re - 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn reports_exhausted_budget() {
        let p = SeriesPolicy::new(20, 1e-15, 1.0).unwrap();
        let r = alternating_sum(|k| Complex64::new(1.0 / k as f64, 0.0), 1, &p, "budget");
        assert!(matches!(r, Err(Error::Tolerance { .. })));
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(1e-3, 1e4, 2000);
        assert_eq!(g.len(), 2000);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[1999], 1e4);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
