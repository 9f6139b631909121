// SPDX-License-Identifier: Apache-2.0

use super::EstimatorError;
use crate::trigpoly::{linspace, Signal};

/// Points used to check that `f′` keeps its sign before bisecting.
const MONOTONICITY_CHECKS: usize = 64;

/// `r = (1/L) · sqrt(ln(2/δ) / (2m))`.
pub fn hoeffding_radius(sensitivity: f64, m: u64, delta: f64) -> Result<f64, EstimatorError> {
    if !(sensitivity > 0.0) {
        return Err(EstimatorError::Domain(format!(
            "L = {sensitivity} must be positive"
        )));
    }
    if m == 0 || !(delta > 0.0 && delta < 1.0) {
        return Err(EstimatorError::Domain(format!(
            "need m >= 1 and delta in (0, 1), got {m}, {delta}"
        )));
    }
    Ok(((2.0 / delta).ln() / (2.0 * m as f64)).sqrt() / sensitivity)
}

/// Bisection steps so that the final error is at most `r_next/η`.
pub fn bisection_steps(r_prior: f64, r_next: f64, eta: f64) -> usize {
    (eta * r_prior / r_next).log2().ceil().max(0.0) as usize
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub theta: f64,
    pub iterations: usize,
    /// `s` fell outside the signal's range and the estimate is an endpoint.
    pub clipped: bool,
}

/// Least-squares inversion of a monotone `f` on `[lo, hi]`.
pub fn invert_signal(
    f: &dyn Signal,
    bounds: (f64, f64),
    s: f64,
    r_prior: f64,
    r_next: f64,
    eta: f64,
) -> Result<Inversion, EstimatorError> {
    if !(eta > 1.0) {
        return Err(EstimatorError::Domain(format!("eta = {eta} must exceed 1")));
    }
    let (lo, hi) = bounds;
    let mut sign = 0.0;
    for t in linspace(lo, hi, MONOTONICITY_CHECKS) {
        let slope = f.derivative(t);
        if slope == 0.0 {
            continue;
        }
        if sign != 0.0 && slope.signum() != sign {
            return Err(EstimatorError::Monotonicity { at: t });
        }
        sign = slope.signum();
    }
    let (f_lo, f_hi) = (f.value(lo), f.value(hi));
    let increasing = f_hi >= f_lo;
    let (min, max) = if increasing {
        (f_lo, f_hi)
    } else {
        (f_hi, f_lo)
    };
    if s <= min || s >= max {
        let theta = if (f_lo - s).abs() <= (f_hi - s).abs() {
            lo
        } else {
            hi
        };
        return Ok(Inversion {
            theta,
            iterations: 0,
            clipped: s < min || s > max,
        });
    }
    let n = bisection_steps(r_prior, r_next, eta);
    let (mut a, mut b) = (lo, hi);
    for _ in 0..n {
        let mid = 0.5 * (a + b);
        if (f.value(mid) < s) == increasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Inversion {
        theta: 0.5 * (a + b),
        iterations: n,
        clipped: false,
    })
}

/// `θ̂₀ = ½ arccos(2s₀ - 1)` from the depth-1 signal `(1 + cos 2θ)/2`.
pub fn initial_estimate(s0: f64) -> f64 {
    0.5 * (2.0 * s0 - 1.0).clamp(-1.0, 1.0).acos()
}
