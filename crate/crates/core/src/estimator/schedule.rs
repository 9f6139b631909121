// SPDX-License-Identifier: Apache-2.0

use super::EstimatorError;
use serde::{Deserialize, Serialize};

/// Depths, shot counts and failure budgets of the iterative loop.
///
/// Index 0 is the depth-1 initial stage; stages `1..=K` use `d_k = round(q^k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub q: f64,
    pub stages: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub zeta: f64,
    pub kappa_planning: f64,
    pub depths: Vec<usize>,
    pub shots: Vec<u64>,
    /// Failure budget of stages `1..=K`.
    pub deltas: Vec<f64>,
}

/// `ceil(ζ² · 8q²/κ² · ln(2K/δ))`.
pub fn minimal_shots(q: f64, kappa: f64, stages: usize, delta: f64, zeta: f64) -> u64 {
    let m = zeta * zeta * 8.0 * q * q / (kappa * kappa) * (2.0 * stages as f64 / delta).ln();
    (m - 1e-9).ceil().max(1.0) as u64
}

/// `K = floor(log_q(1/(4ε)))`.
pub fn stage_count(epsilon: f64, q: f64) -> usize {
    let k = (1.0 / (4.0 * epsilon)).ln() / q.ln();
    (k + 1e-9).floor().max(0.0) as usize
}

fn check_common(delta: f64, q: f64, zeta: f64) -> Result<(), EstimatorError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(EstimatorError::Config(format!(
            "delta = {delta} outside (0, 1)"
        )));
    }
    if !(q >= 2.0) || !q.is_finite() {
        return Err(EstimatorError::Config(format!(
            "q = {q} must be at least 2"
        )));
    }
    if !(zeta >= 1.0) || !zeta.is_finite() {
        return Err(EstimatorError::Config(format!(
            "zeta = {zeta} must be at least 1"
        )));
    }
    Ok(())
}

fn geometric_depths(q: f64, stages: usize) -> Vec<usize> {
    (0..=stages)
        .map(|k| q.powi(k as i32).round() as usize)
        .collect()
}

pub fn build_schedule(
    epsilon: f64,
    delta: f64,
    q: f64,
    kappa_planning: f64,
    zeta: f64,
) -> Result<Schedule, EstimatorError> {
    if !(epsilon > 0.0) {
        return Err(EstimatorError::Config(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    if !(kappa_planning > 0.0 && kappa_planning <= 1.0) {
        return Err(EstimatorError::Config(format!(
            "planning kappa = {kappa_planning} outside (0, 1]"
        )));
    }
    check_common(delta, q, zeta)?;
    let stages = stage_count(epsilon, q);
    if stages < 1 {
        return Err(EstimatorError::Config(format!(
            "epsilon = {epsilon} too large for q = {q}: no refinement stage"
        )));
    }
    let m = minimal_shots(q, kappa_planning, stages, delta, zeta);
    Ok(Schedule {
        q,
        stages,
        epsilon,
        delta,
        zeta,
        kappa_planning,
        depths: geometric_depths(q, stages),
        shots: vec![m; stages + 1],
        deltas: vec![delta / stages as f64; stages],
    })
}

impl Schedule {
    /// A schedule with the same number of shots at every stage, up to depth
    /// `q^stages`.
    pub fn fixed_shots(
        q: f64,
        stages: usize,
        shots: u64,
        zeta: f64,
        delta: f64,
    ) -> Result<Schedule, EstimatorError> {
        check_common(delta, q, zeta)?;
        if stages < 1 || shots < 1 {
            return Err(EstimatorError::Config(
                "need at least one stage and one shot".into(),
            ));
        }
        let depths = geometric_depths(q, stages);
        let d_max = depths[stages] as f64;
        Ok(Schedule {
            q,
            stages,
            epsilon: 1.0 / (4.0 * d_max * q),
            delta,
            zeta,
            kappa_planning: std::f64::consts::FRAC_1_SQRT_2,
            depths,
            shots: vec![shots; stages + 1],
            deltas: vec![delta / stages as f64; stages],
        })
    }

    pub fn depth(&self, k: usize) -> usize {
        self.depths[k]
    }

    /// Depth of the stage after `k` (extrapolated past the last stage).
    pub fn next_depth(&self, k: usize) -> f64 {
        match self.depths.get(k + 1) {
            Some(&d) => d as f64,
            None => (self.q.powi(k as i32 + 1)).round(),
        }
    }

    /// `r_k = 1/(4ζ d_{k+1})`: radius of the interval after stage `k`.
    pub fn radius(&self, k: usize) -> f64 {
        1.0 / (4.0 * self.zeta * self.next_depth(k))
    }

    /// `Σ_{k≥1} d_k m_k`.
    pub fn total_queries(&self) -> u64 {
        (1..=self.stages)
            .map(|k| self.depths[k] as u64 * self.shots[k])
            .sum()
    }

    pub fn validate(&self) -> Result<(), EstimatorError> {
        check_common(self.delta, self.q, self.zeta)?;
        let n = self.stages + 1;
        if self.depths.len() != n || self.shots.len() != n || self.deltas.len() != self.stages {
            return Err(EstimatorError::Config(
                "schedule vectors have inconsistent lengths".into(),
            ));
        }
        if self.depths.windows(2).any(|w| w[1] <= w[0]) || self.depths[0] == 0 {
            return Err(EstimatorError::Config(
                "depths must be positive and strictly increasing".into(),
            ));
        }
        if self.shots.contains(&0) {
            return Err(EstimatorError::Config(
                "every stage needs at least one shot".into(),
            ));
        }
        if self.deltas.iter().sum::<f64>() > self.delta * (1.0 + 1e-12) {
            return Err(EstimatorError::Config(
                "stage failure budgets exceed delta".into(),
            ));
        }
        Ok(())
    }
}
