// SPDX-License-Identifier: Apache-2.0

//! Iterative phase estimation with designed signals, and the RPE baseline.
//!
//! Stage 0 measures the depth-1 signal `(1 + cos 2θ)/2`. Every later stage
//! designs a depth-`d_k` signal on the current interval, draws `m_k` shots of
//! it at the hidden phase, inverts the sample mean by bisection and shrinks the
//! interval to radius `1/(4ζ d_{k+1})`.
//!
//! Designed signals are symmetric about `π/2`, so QSP-PE estimates the folded
//! phase `min(θ*, π - θ*)`.

mod cache;
mod inversion;
mod sampling;
mod schedule;

pub use cache::DesignCache;
pub use inversion::{
    bisection_steps, hoeffding_radius, initial_estimate, invert_signal, Inversion,
};
pub use sampling::{sample_signal, stream_rng, Sampling};
pub use schedule::{build_schedule, minimal_shots, stage_count, Schedule};

use crate::design::{
    design_signal, DesignError, DesignRequest, DesignResult, PriorInterval, DEFAULT_MARGIN,
    DEFAULT_N_ALPHA, DEFAULT_N_AMP, DEFAULT_N_PRIOR,
};
use crate::exec::Execution;
use crate::trigpoly::{linspace, Signal, SineSignal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

pub const DEFAULT_ETA: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("invalid estimator configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("signal derivative changes sign near theta = {at}")]
    Monotonicity { at: f64 },
    #[error("design failed at stage {stage}: {source}")]
    Design { stage: usize, source: DesignError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    QspPe,
    Rpe,
}

impl std::str::FromStr for Method {
    type Err = EstimatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qsp-pe" => Ok(Method::QspPe),
            "rpe" => Ok(Method::Rpe),
            other => Err(EstimatorError::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// Which signal a stage measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Depth-1 `(1 + cos 2θ)/2`.
    Initial,
    /// A designed `g²`.
    Designed,
    /// `1/2 + sin(2dθ)/2`, used when the interval reaches the low margin.
    Plus,
    /// The RPE cosine/sine pair.
    Pair,
}

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    /// Bisection over-resolution factor.
    pub eta: f64,
    pub n_amp: usize,
    pub n_prior: usize,
    pub n_alpha: usize,
    pub margin: f64,
    pub sampling: Sampling,
    /// Switch to the `|+⟩`-basis signal when the interval touches `margin`.
    pub plus_basis_switch: bool,
    pub cache: Option<Arc<DesignCache>>,
    /// Execution of the sweep inside each design call.
    pub design_execution: Execution,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            eta: DEFAULT_ETA,
            n_amp: DEFAULT_N_AMP,
            n_prior: DEFAULT_N_PRIOR,
            n_alpha: DEFAULT_N_ALPHA,
            margin: DEFAULT_MARGIN,
            sampling: Sampling::Bernoulli,
            plus_basis_switch: true,
            cache: None,
            design_execution: Execution::Sequential,
        }
    }
}

impl EstimatorConfig {
    fn design(&self, depth: usize, prior: PriorInterval) -> Result<DesignResult, DesignError> {
        let mut req = DesignRequest::new(depth, prior).with_execution(self.design_execution);
        req.n_amp = self.n_amp.max(4 * depth);
        req.n_prior = self.n_prior;
        req.n_alpha = self.n_alpha;
        req.margin = self.margin;
        match &self.cache {
            Some(cache) => cache.design(&req),
            None => design_signal(&req),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub depth: usize,
    pub shots: u64,
    /// Sample mean (the cosine half for RPE).
    pub mean: f64,
    pub theta_hat: f64,
    pub radius: f64,
    pub sensitivity: f64,
    pub kappa: f64,
    pub bisections: usize,
    pub basis: Basis,
    /// The design was retried at `ζ = 1` after an infeasible sweep.
    pub retried: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationTrace {
    pub method: Method,
    pub trial: u64,
    pub theta_star: f64,
    /// The phase the method can identify (folded for QSP-PE).
    pub target: f64,
    pub stages: Vec<StageRecord>,
    pub theta_hat: f64,
    pub radius: f64,
    pub success: bool,
}

impl EstimationTrace {
    pub fn error(&self) -> f64 {
        self.theta_hat - self.target
    }

    /// Estimate error after the stage with the given depth.
    pub fn error_at_depth(&self, depth: usize) -> Option<f64> {
        self.stages
            .iter()
            .find(|s| s.depth == depth)
            .map(|s| s.theta_hat - self.target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub stages: usize,
    /// `Σ_{k≥1} d_k m_k`.
    pub total_queries: u64,
    /// `d₀ m₀` spent on the initial estimate.
    pub initial_queries: u64,
    /// Signal evaluations of degree `d_k` during bisection, weighted by `d_k + 1`.
    pub classical_ops: u64,
}

impl ResourceReport {
    fn from_stages(stages: &[StageRecord]) -> Self {
        let initial = stages.first().map_or(0, |s| s.depth as u64 * s.shots);
        Self {
            stages: stages.len().saturating_sub(1),
            total_queries: stages
                .iter()
                .skip(1)
                .map(|s| s.depth as u64 * s.shots)
                .sum(),
            initial_queries: initial,
            classical_ops: stages
                .iter()
                .map(|s| (s.depth as u64 + 1) * s.bisections as u64)
                .sum(),
        }
    }
}

fn check_theta(theta_star: f64, margin: f64) -> Result<(), EstimatorError> {
    if !(theta_star > margin && theta_star < PI - margin) {
        return Err(EstimatorError::Domain(format!(
            "theta* = {theta_star} outside ({margin}, pi - {margin})"
        )));
    }
    Ok(())
}

fn min_slope(f: &dyn Signal, bounds: (f64, f64)) -> f64 {
    linspace(bounds.0, bounds.1, DEFAULT_N_PRIOR)
        .map(|t| f.derivative(t).abs())
        .fold(f64::INFINITY, f64::min)
}

pub fn run_qsp_pe(
    theta_star: f64,
    schedule: &Schedule,
    config: &EstimatorConfig,
    seed: u64,
    trial: u64,
) -> Result<(EstimationTrace, ResourceReport), EstimatorError> {
    schedule.validate()?;
    check_theta(theta_star, config.margin)?;
    let target = theta_star.min(PI - theta_star);
    let mut stages = Vec::with_capacity(schedule.stages + 1);

    let m0 = schedule.shots[0];
    let p0 = 0.5 * (1.0 + (2.0 * theta_star).cos());
    let s0 = config
        .sampling
        .draw(p0, m0, &mut stream_rng(seed, trial, 0))?;
    let mut theta_hat = initial_estimate(s0);
    let mut radius = schedule.radius(0);
    let slope0 = (2.0 * theta_hat).sin().abs();
    stages.push(StageRecord {
        stage: 0,
        depth: schedule.depth(0),
        shots: m0,
        mean: s0,
        theta_hat,
        radius,
        sensitivity: slope0,
        kappa: slope0,
        bisections: 0,
        basis: Basis::Initial,
        retried: false,
    });

    for k in 1..=schedule.stages {
        let depth = schedule.depth(k);
        let shots = schedule.shots[k];
        let r_next = schedule.radius(k);
        let mut retried = false;
        let (signal, bounds, basis, r_prior): (Box<dyn Signal>, (f64, f64), Basis, f64) =
            if config.plus_basis_switch && theta_hat - radius < config.margin {
                let h = SineSignal { depth };
                let bounds = ((theta_hat - radius).max(0.0), theta_hat + radius);
                (Box::new(h), bounds, Basis::Plus, radius)
            } else {
                let prior = PriorInterval {
                    center: theta_hat,
                    radius,
                };
                let design = match config.design(depth, prior) {
                    Ok(d) => d,
                    Err(DesignError::AllInfeasible { .. }) => {
                        retried = true;
                        let wide = PriorInterval {
                            center: theta_hat,
                            radius: 1.0 / (4.0 * depth as f64),
                        };
                        config
                            .design(depth, wide)
                            .map_err(|source| EstimatorError::Design { stage: k, source })?
                    }
                    Err(source) => return Err(EstimatorError::Design { stage: k, source }),
                };
                let r_prior = design.prior.radius;
                let bounds = design.grid_bounds;
                (Box::new(design.signal()), bounds, Basis::Designed, r_prior)
            };
        let p = signal.value(theta_star).clamp(0.0, 1.0);
        let s = config
            .sampling
            .draw(p, shots, &mut stream_rng(seed, trial, k as u64))?;
        let inv = invert_signal(signal.as_ref(), bounds, s, r_prior, r_next, config.eta)?;
        let sensitivity = min_slope(signal.as_ref(), bounds);
        theta_hat = inv.theta;
        radius = r_next;
        stages.push(StageRecord {
            stage: k,
            depth,
            shots,
            mean: s,
            theta_hat,
            radius,
            sensitivity,
            kappa: sensitivity / depth as f64,
            bisections: inv.iterations,
            basis,
            retried,
        });
    }
    let report = ResourceReport::from_stages(&stages);
    let trace = EstimationTrace {
        method: Method::QspPe,
        trial,
        theta_star,
        target,
        success: (theta_hat - target).abs() <= radius,
        theta_hat,
        radius,
        stages,
    };
    Ok((trace, report))
}

/// Robust phase estimation with the cosine/sine pair, shots split evenly.
pub fn run_rpe(
    theta_star: f64,
    schedule: &Schedule,
    config: &EstimatorConfig,
    seed: u64,
    trial: u64,
) -> Result<(EstimationTrace, ResourceReport), EstimatorError> {
    schedule.validate()?;
    check_theta(theta_star, config.margin)?;
    if schedule.shots.iter().any(|&m| m < 2) {
        return Err(EstimatorError::Config(
            "RPE needs at least two shots per stage".into(),
        ));
    }
    let mut stages = Vec::with_capacity(schedule.stages + 1);
    let mut theta_hat = 0.0;
    let mut radius = 0.0;
    for k in 0..=schedule.stages {
        let depth = schedule.depth(k);
        let d = depth as f64;
        let m = schedule.shots[k];
        let (m_cos, m_sin) = (m.div_ceil(2), m / 2);
        let phase = 2.0 * d * theta_star;
        let s_cos = config.sampling.draw(
            0.5 * (1.0 + phase.cos()),
            m_cos,
            &mut stream_rng(seed, trial, 2 * k as u64),
        )?;
        let s_sin = config.sampling.draw(
            0.5 * (1.0 + phase.sin()),
            m_sin,
            &mut stream_rng(seed, trial, 2 * k as u64 + 1),
        )?;
        let phi = (2.0 * s_sin - 1.0)
            .atan2(2.0 * s_cos - 1.0)
            .rem_euclid(2.0 * PI);
        let base = phi / (2.0 * d);
        let period = PI / d;
        theta_hat = if k == 0 {
            base
        } else {
            base + ((theta_hat - base) / period).round() * period
        };
        radius = schedule.radius(k);
        stages.push(StageRecord {
            stage: k,
            depth,
            shots: m,
            mean: s_cos,
            theta_hat,
            radius,
            sensitivity: d * FRAC_1_SQRT_2,
            kappa: FRAC_1_SQRT_2,
            bisections: 0,
            basis: Basis::Pair,
            retried: false,
        });
    }
    let report = ResourceReport::from_stages(&stages);
    let trace = EstimationTrace {
        method: Method::Rpe,
        trial,
        theta_star,
        target: theta_star,
        success: (theta_hat - theta_star).abs() <= radius,
        theta_hat,
        radius,
        stages,
    };
    Ok((trace, report))
}

pub fn run_method(
    method: Method,
    theta_star: f64,
    schedule: &Schedule,
    config: &EstimatorConfig,
    seed: u64,
    trial: u64,
) -> Result<(EstimationTrace, ResourceReport), EstimatorError> {
    match method {
        Method::QspPe => run_qsp_pe(theta_star, schedule, config, seed, trial),
        Method::Rpe => run_rpe(theta_star, schedule, config, seed, trial),
    }
}

/// Runs `trials` independent trials; results are in trial order for any
/// execution mode.
pub fn run_trials(
    method: Method,
    theta_star: f64,
    schedule: &Schedule,
    config: &EstimatorConfig,
    seed: u64,
    trials: u64,
    execution: Execution,
) -> Vec<Result<(EstimationTrace, ResourceReport), EstimatorError>> {
    execution.map_range(trials as usize, |t| {
        run_method(method, theta_star, schedule, config, seed, t as u64)
    })
}

pub const TRACE_CSV_HEADER: &str = "trial,stage,d,m,s,theta_hat,r,L,kappa,n_bisect";

pub fn trace_csv<'a>(traces: impl IntoIterator<Item = &'a EstimationTrace>) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for trace in traces {
        for s in &trace.stages {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                trace.trial,
                s.stage,
                s.depth,
                s.shots,
                s.mean,
                s.theta_hat,
                s.radius,
                s.sensitivity,
                s.kappa,
                s.bisections
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact() -> EstimatorConfig {
        EstimatorConfig {
            sampling: Sampling::Exact,
            ..EstimatorConfig::default()
        }
    }

    #[test]
    fn noiseless_rpe_first_stage() {
        let sched = Schedule::fixed_shots(2.0, 1, 100, 1.0, 0.1).unwrap();
        let (trace, _) = run_rpe(0.7, &sched, &exact(), 0, 0).unwrap();
        assert!((trace.stages[0].theta_hat * 2.0 - 1.4).abs() < 1e-12);
        assert!(trace.success);
    }

    #[test]
    fn noiseless_qsp_pe_tracks_target() {
        let sched = build_schedule(1e-3, 0.1, 2.0, FRAC_1_SQRT_2, 1.0).unwrap();
        let cfg = exact();
        for theta in [0.5, 0.886_226_925_452_758, 2.3] {
            let (trace, report) = run_qsp_pe(theta, &sched, &cfg, 1, 0).unwrap();
            for s in &trace.stages[1..] {
                assert!(
                    (s.theta_hat - trace.target).abs() <= s.radius / cfg.eta * (1.0 + 1e-9),
                    "theta={theta} stage {} err {}",
                    s.stage,
                    s.theta_hat - trace.target
                );
            }
            assert!(trace.success);
            assert_eq!(report.total_queries, sched.total_queries());
        }
    }

    #[test]
    fn plus_basis_switch_near_zero() {
        let sched = build_schedule(1e-3, 0.1, 2.0, FRAC_1_SQRT_2, 1.0).unwrap();
        let (trace, _) = run_qsp_pe(0.004, &sched, &exact(), 1, 0).unwrap();
        assert!(trace.stages.iter().any(|s| s.basis == Basis::Plus));
        assert!(trace.success, "{trace:?}");
    }

    #[test]
    fn trials_are_reproducible_and_order_independent() {
        let sched = build_schedule(1.0 / 64.0, 0.1, 2.0, FRAC_1_SQRT_2, 1.0).unwrap();
        let cfg = EstimatorConfig::default();
        let a = run_trials(
            Method::QspPe,
            1.1,
            &sched,
            &cfg,
            5,
            6,
            Execution::Sequential,
        );
        let b = run_trials(Method::QspPe, 1.1, &sched, &cfg, 5, 6, Execution::Parallel);
        assert_eq!(a, b);
        let csv = trace_csv(a.iter().map(|r| &r.as_ref().unwrap().0));
        assert!(csv.starts_with(TRACE_CSV_HEADER));
        assert_eq!(csv.lines().count(), 1 + 6 * (sched.stages + 1));
    }

    #[test]
    fn cached_designs_are_consistent() {
        let sched = build_schedule(1.0 / 128.0, 0.1, 2.0, FRAC_1_SQRT_2, 1.0).unwrap();
        let cache = Arc::new(DesignCache::snapping(1e-4));
        let cfg = EstimatorConfig {
            cache: Some(cache.clone()),
            ..EstimatorConfig::default()
        };
        let a = run_trials(Method::QspPe, 0.9, &sched, &cfg, 3, 8, Execution::Parallel);
        let b = run_trials(
            Method::QspPe,
            0.9,
            &sched,
            &cfg,
            3,
            8,
            Execution::Sequential,
        );
        assert_eq!(a, b);
        let (hits, misses) = cache.stats();
        assert!(hits >= misses);
    }

    #[test]
    fn rejects_bad_theta() {
        let sched = build_schedule(1.0 / 64.0, 0.1, 2.0, FRAC_1_SQRT_2, 1.0).unwrap();
        assert!(run_qsp_pe(0.0, &sched, &exact(), 0, 0).is_err());
        assert!(run_rpe(PI, &sched, &exact(), 0, 0).is_err());
    }
}
