// SPDX-License-Identifier: Apache-2.0

//! Max-min signal design by linear programming.
//!
//! For a fixed amplitude floor `α` and sign pattern `(ι_g, ι_g′)` the problem
//! `max β` subject to `|g| ≤ 1` on an amplitude grid and `ι_g g ≥ α`,
//! `ι_g′ g′ ≥ β` on the prior grid is an LP in the cosine coefficients of `g`.
//! [`design_signal`] sweeps `α` and the sign patterns and keeps the best `2αβ`.

use crate::exec::Execution;
use crate::lp::{DualSimplex, InequalityLp, LpError, LpOptions, LpOutcome};
use crate::trigpoly::{
    linspace, parity_modes, CosineSignal, Signal, SineSignal, TrigPoly, TrigPolyError,
};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub const DEFAULT_MARGIN: f64 = 1e-3;
pub const DEFAULT_N_AMP: usize = 1000;
pub const DEFAULT_N_PRIOR: usize = 200;
pub const DEFAULT_N_ALPHA: usize = 50;
/// Slack used when re-verifying a design on a finer grid.
pub const VERIFY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("invalid design configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(
        "no admissible design for d={depth}, theta0={center}, r={radius}: \
         every alpha > 0 infeasible ({lps_solved} LPs solved)"
    )]
    AllInfeasible {
        depth: usize,
        center: f64,
        radius: f64,
        lps_solved: usize,
    },
    #[error("LP solver failure: {0}")]
    SolverFailure(#[from] LpError),
    #[error(transparent)]
    TrigPoly(#[from] TrigPolyError),
}

/// Confidence interval `[θ₀ - r, θ₀ + r]` for the unknown phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorInterval {
    pub center: f64,
    pub radius: f64,
}

impl PriorInterval {
    pub fn new(center: f64, radius: f64) -> Result<Self, DesignError> {
        let prior = Self { center, radius };
        prior.clamped(DEFAULT_MARGIN)?;
        Ok(prior)
    }

    /// Working-scale prior `r = 1/(4ζd)`.
    pub fn with_shrinkage(center: f64, depth: usize, zeta: f64) -> Result<Self, DesignError> {
        if !(zeta > 0.0) || depth == 0 {
            return Err(DesignError::Domain(format!(
                "need zeta > 0 and d >= 1, got zeta={zeta}, d={depth}"
            )));
        }
        Self::new(center, working_radius(depth, zeta))
    }

    /// The interval intersected with `[margin, π - margin]`.
    pub fn clamped(&self, margin: f64) -> Result<(f64, f64), DesignError> {
        if !(self.radius > 0.0) || !self.center.is_finite() {
            return Err(DesignError::Domain(format!(
                "prior needs r > 0 and finite center, got ({}, {})",
                self.center, self.radius
            )));
        }
        let lo = (self.center - self.radius).max(margin);
        let hi = (self.center + self.radius).min(PI - margin);
        if lo > hi {
            return Err(DesignError::Domain(format!(
                "prior [{}, {}] misses [{margin}, pi - {margin}]",
                self.center - self.radius,
                self.center + self.radius
            )));
        }
        Ok((lo, hi))
    }

    pub fn grid(&self, n: usize, margin: f64) -> Result<Vec<f64>, DesignError> {
        let (lo, hi) = self.clamped(margin)?;
        Ok(linspace(lo, hi, n).collect())
    }
}

/// `r = 1/(4ζd)`.
pub fn working_radius(depth: usize, zeta: f64) -> f64 {
    1.0 / (4.0 * zeta * depth as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignPattern {
    pub g: i8,
    pub gprime: i8,
}

impl SignPattern {
    /// Tie-break order of the sweep.
    pub const ALL: [SignPattern; 4] = [
        SignPattern { g: 1, gprime: 1 },
        SignPattern { g: 1, gprime: -1 },
        SignPattern { g: -1, gprime: 1 },
        SignPattern { g: -1, gprime: -1 },
    ];

    pub fn new(g: i8, gprime: i8) -> Result<Self, DesignError> {
        if g.abs() != 1 || gprime.abs() != 1 {
            return Err(DesignError::Config(format!(
                "sign pattern entries must be +1 or -1, got ({g}, {gprime})"
            )));
        }
        Ok(Self { g, gprime })
    }

    fn flipped(self) -> Self {
        Self {
            g: -self.g,
            gprime: -self.gprime,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignRequest {
    pub depth: usize,
    pub prior: PriorInterval,
    pub n_amp: usize,
    pub n_prior: usize,
    pub n_alpha: usize,
    pub tolerance: f64,
    pub margin: f64,
    /// Permit radii above the working scale `1/(4d)`.
    pub allow_wide_radius: bool,
    pub execution: Execution,
}

impl DesignRequest {
    pub fn new(depth: usize, prior: PriorInterval) -> Self {
        Self {
            depth,
            prior,
            n_amp: DEFAULT_N_AMP,
            n_prior: DEFAULT_N_PRIOR,
            n_alpha: DEFAULT_N_ALPHA,
            tolerance: 1e-9,
            margin: DEFAULT_MARGIN,
            allow_wide_radius: false,
            execution: Execution::default(),
        }
    }

    pub fn allow_wide_radius(mut self, allow: bool) -> Self {
        self.allow_wide_radius = allow;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        let d = self.depth;
        if d == 0 {
            return Err(DesignError::Config("depth must be at least 1".into()));
        }
        if self.n_amp < 4 * d {
            return Err(DesignError::Config(format!(
                "N_amp = {} must be at least 4d = {}",
                self.n_amp,
                4 * d
            )));
        }
        if self.n_prior < 2 || self.n_alpha < 2 {
            return Err(DesignError::Config(format!(
                "N_prior = {} and N_alpha = {} must both be at least 2",
                self.n_prior, self.n_alpha
            )));
        }
        if !(self.tolerance > 0.0) || !(self.margin >= 0.0) || self.margin >= PI / 2.0 {
            return Err(DesignError::Config(format!(
                "bad tolerance {} or margin {}",
                self.tolerance, self.margin
            )));
        }
        let limit = 1.0 / (4.0 * d as f64);
        if !self.allow_wide_radius && self.prior.radius > limit * (1.0 + 1e-12) {
            return Err(DesignError::Config(format!(
                "radius {} exceeds the working scale 1/(4d) = {limit}",
                self.prior.radius
            )));
        }
        self.prior.clamped(self.margin)?;
        Ok(())
    }

    pub fn zeta(&self) -> f64 {
        1.0 / (4.0 * self.depth as f64 * self.prior.radius)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub coefficients: TrigPoly,
    pub alpha: f64,
    pub beta: f64,
    /// Certified `min 2|g g′|` on the prior grid.
    pub sensitivity: f64,
    pub kappa: f64,
    /// `2 α β`.
    pub objective: f64,
    pub sign: SignPattern,
    pub feasible: bool,
    pub prior: PriorInterval,
    /// The clamped prior grid the certificate refers to.
    pub grid_bounds: (f64, f64),
}

impl DesignResult {
    pub fn depth(&self) -> usize {
        self.coefficients.degree()
    }

    pub fn signal(&self) -> crate::trigpoly::SignalFn {
        crate::trigpoly::SignalFn::new(self.coefficients.clone())
    }

    pub fn zeta(&self) -> f64 {
        1.0 / (4.0 * self.depth() as f64 * self.prior.radius)
    }

    /// Re-checks the constraints on fresh grids `factor` times finer.
    pub fn verify(&self, n_amp: usize, n_prior: usize, factor: usize) -> Verification {
        let g = &self.coefficients;
        let d = self.depth() as f64;
        let amplitude_excess = linspace(0.0, PI, n_amp * factor)
            .map(|t| g.value(t).abs() - 1.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = self.grid_bounds;
        let mut alpha_gap = f64::NEG_INFINITY;
        let mut beta_gap = f64::NEG_INFINITY;
        let mut sign_changes = false;
        let mut last_sign = 0.0;
        for t in linspace(lo, hi, n_prior * factor) {
            let (v, dv) = g.evaluate(t);
            alpha_gap = alpha_gap.max(self.alpha - f64::from(self.sign.g) * v);
            beta_gap = beta_gap.max(self.beta - f64::from(self.sign.gprime) * dv);
            let slope = (v * dv).signum();
            if last_sign != 0.0 && slope != last_sign && v * dv != 0.0 {
                sign_changes = true;
            }
            if v * dv != 0.0 {
                last_sign = slope;
            }
        }
        Verification {
            amplitude_excess,
            alpha_gap,
            beta_gap: beta_gap / d,
            slope_sign_change: sign_changes,
        }
    }

    pub fn to_record(&self) -> DesignRecord {
        DesignRecord {
            d: self.depth(),
            theta0: self.prior.center,
            r: self.prior.radius,
            zeta: self.zeta(),
            alpha: self.alpha,
            beta: self.beta,
            sensitivity: self.sensitivity,
            kappa: self.kappa,
            objective: self.objective,
            sign_g: self.sign.g,
            sign_gprime: self.sign.gprime,
            coefficients: self.coefficients.modes(),
        }
    }
}

/// Worst constraint slacks found by [`DesignResult::verify`]. Positive values
/// are violations; `beta_gap` is relative to the depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verification {
    pub amplitude_excess: f64,
    pub alpha_gap: f64,
    pub beta_gap: f64,
    pub slope_sign_change: bool,
}

impl Verification {
    pub fn passes(&self, tol: f64) -> bool {
        self.amplitude_excess <= tol
            && self.alpha_gap <= tol
            && self.beta_gap <= tol
            && !self.slope_sign_change
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRecord {
    pub d: usize,
    pub theta0: f64,
    pub r: f64,
    pub zeta: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "L")]
    pub sensitivity: f64,
    pub kappa: f64,
    pub objective: f64,
    pub sign_g: i8,
    pub sign_gprime: i8,
    pub coefficients: Vec<(usize, f64)>,
}

impl TryFrom<DesignRecord> for DesignResult {
    type Error = DesignError;

    fn try_from(rec: DesignRecord) -> Result<Self, Self::Error> {
        let coefficients = TrigPoly::new(rec.d, &rec.coefficients)?;
        let prior = PriorInterval::new(rec.theta0, rec.r)?;
        let grid_bounds = prior.clamped(DEFAULT_MARGIN)?;
        Ok(DesignResult {
            coefficients,
            alpha: rec.alpha,
            beta: rec.beta,
            sensitivity: rec.sensitivity,
            kappa: rec.kappa,
            objective: rec.objective,
            sign: SignPattern::new(rec.sign_g, rec.sign_gprime)?,
            feasible: rec.objective > 0.0,
            prior,
            grid_bounds,
        })
    }
}

/// LP for one sign pattern; columns are the parity coefficients then `β/d`.
struct PatternLp {
    lp: InequalityLp,
    alpha_rows: std::ops::Range<usize>,
}

impl PatternLp {
    fn build(depth: usize, prior_grid: &[f64], amp_grid: &[f64], sign: SignPattern) -> Self {
        let modes: Vec<usize> = parity_modes(depth).collect();
        let n = modes.len() + 1;
        let d = depth as f64;
        let mut objective = vec![0.0; n];
        objective[n - 1] = 1.0;
        let mut lp = InequalityLp::new(objective);
        let mut row = vec![0.0; n];

        // |g| is symmetric about π/2 for a definite-parity series, so a grid
        // symmetric about π/2 only needs its first half.
        let symmetric = amp_grid
            .iter()
            .zip(amp_grid.iter().rev())
            .all(|(a, b)| (a + b - PI).abs() < 1e-12);
        let amp = if symmetric {
            &amp_grid[..amp_grid.len().div_ceil(2)]
        } else {
            amp_grid
        };
        for &t in amp {
            for (c, &k) in row.iter_mut().zip(&modes) {
                *c = (k as f64 * t).cos();
            }
            row[n - 1] = 0.0;
            lp.push_row(&row, 1.0);
            for c in row.iter_mut() {
                *c = -*c;
            }
            lp.push_row(&row, 1.0);
        }

        let (ig, igp) = (f64::from(sign.g), f64::from(sign.gprime));
        let start = lp.num_rows();
        for &t in prior_grid {
            // -ι_g g(θ) ≤ -α
            for (c, &k) in row.iter_mut().zip(&modes) {
                *c = -ig * (k as f64 * t).cos();
            }
            row[n - 1] = 0.0;
            lp.push_row(&row, 0.0);
        }
        let alpha_rows = start..lp.num_rows();
        for &t in prior_grid {
            // β/d - ι_g′ g′(θ)/d ≤ 0 with g′ = -Σ k a_k sin kθ
            for (c, &k) in row.iter_mut().zip(&modes) {
                *c = igp * k as f64 * (k as f64 * t).sin() / d;
            }
            row[n - 1] = 1.0;
            lp.push_row(&row, 0.0);
        }
        row.iter_mut().for_each(|c| *c = 0.0);
        row[n - 1] = 1.0;
        lp.push_row(&row, 1.0);
        row[n - 1] = -1.0;
        lp.push_row(&row, 0.0);
        Self { lp, alpha_rows }
    }

    fn rhs_for(&self, alpha: f64) -> Vec<f64> {
        let mut rhs = self.lp.rhs().to_vec();
        for i in self.alpha_rows.clone() {
            rhs[i] = -alpha;
        }
        rhs
    }

    fn unpack(&self, depth: usize, x: &[f64]) -> (TrigPoly, f64) {
        let n = x.len();
        (
            TrigPoly::from_parity_coefficients(depth, &x[..n - 1]),
            x[n - 1] * depth as f64,
        )
    }
}

fn lp_options() -> LpOptions {
    LpOptions::default()
}

/// Maximizes `β` for a fixed `α` and sign pattern. `Ok(None)` means infeasible.
pub fn solve_fixed_alpha_lp(
    depth: usize,
    prior_grid: &[f64],
    amp_grid: &[f64],
    alpha: f64,
    sign: SignPattern,
) -> Result<Option<(TrigPoly, f64)>, DesignError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(DesignError::Domain(format!(
            "alpha = {alpha} outside [0, 1]"
        )));
    }
    if prior_grid.is_empty() || amp_grid.is_empty() {
        return Err(DesignError::Config("empty grid".into()));
    }
    let plp = PatternLp::build(depth, prior_grid, amp_grid, sign);
    let mut solver = DualSimplex::new(&plp.lp, lp_options())?;
    match solver.solve(&plp.rhs_for(alpha))? {
        LpOutcome::Optimal(sol) => Ok(Some(plp.unpack(depth, &sol.x))),
        LpOutcome::Infeasible => Ok(None),
    }
}

struct Candidate {
    alpha_index: usize,
    pattern_index: usize,
    objective: f64,
    coefficients: TrigPoly,
}

/// Runs the `α` sweep for one pattern with a warm-started solver.
fn sweep_pattern(
    depth: usize,
    prior_grid: &[f64],
    amp_grid: &[f64],
    alphas: &[f64],
    pattern_index: usize,
) -> Result<(Option<Candidate>, usize), DesignError> {
    let sign = SignPattern::ALL[pattern_index];
    let plp = PatternLp::build(depth, prior_grid, amp_grid, sign);
    let mut solver = DualSimplex::new(&plp.lp, lp_options())?;
    let mut best: Option<Candidate> = None;
    let mut solved = 0;
    for (i, &alpha) in alphas.iter().enumerate() {
        solved += 1;
        let sol = match solver.solve(&plp.rhs_for(alpha))? {
            LpOutcome::Optimal(sol) => sol,
            // Feasibility is monotone in α.
            LpOutcome::Infeasible => break,
        };
        let (coefficients, beta) = plp.unpack(depth, &sol.x);
        let objective = 2.0 * alpha * beta;
        match &best {
            Some(b) if objective <= b.objective => {
                // β(α) is concave, so 2αβ is unimodal: once clearly past the
                // peak nothing later can win.
                if objective < b.objective * (1.0 - 1e-6) {
                    break;
                }
            }
            _ => {
                best = Some(Candidate {
                    alpha_index: i,
                    pattern_index,
                    objective,
                    coefficients,
                })
            }
        }
    }
    Ok((best, solved))
}

pub fn design_signal(request: &DesignRequest) -> Result<DesignResult, DesignError> {
    request.validate()?;
    let depth = request.depth;
    let prior_grid = request.prior.grid(request.n_prior, request.margin)?;
    let grid_bounds = request.prior.clamped(request.margin)?;
    let amp_grid: Vec<f64> = linspace(0.0, PI, request.n_amp).collect();
    let alphas: Vec<f64> = (0..request.n_alpha)
        .map(|i| i as f64 / request.n_alpha as f64)
        .collect();

    // Patterns (-,+) and (-,-) mirror (+,-) and (+,+) under g -> -g with equal
    // objective, and come later in the tie-break order, so they never win.
    let sweeps = request.execution.map(&[0usize, 1], |&p| {
        sweep_pattern(depth, &prior_grid, &amp_grid, &alphas, p)
    });
    let mut best: Option<Candidate> = None;
    let mut lps_solved = 0;
    for sweep in sweeps {
        let (cand, solved) = sweep?;
        lps_solved += solved;
        if let Some(c) = cand {
            let wins = match &best {
                None => true,
                Some(b) => {
                    c.objective > b.objective
                        || (c.objective == b.objective
                            && (c.alpha_index, c.pattern_index) < (b.alpha_index, b.pattern_index))
                }
            };
            if wins {
                best = Some(c);
            }
        }
    }
    let best = match best {
        Some(b) if b.objective > 0.0 => b,
        _ => {
            return Err(DesignError::AllInfeasible {
                depth,
                center: request.prior.center,
                radius: request.prior.radius,
                lps_solved,
            })
        }
    };
    Ok(certify(
        best.coefficients,
        SignPattern::ALL[best.pattern_index],
        &prior_grid,
        request.prior,
        grid_bounds,
    ))
}

/// Normalizes `g` to `sup |g| ≤ 1` on the whole interval and recomputes the
/// certified bounds on the prior grid.
fn certify(
    g: TrigPoly,
    sign: SignPattern,
    prior_grid: &[f64],
    prior: PriorInterval,
    grid_bounds: (f64, f64),
) -> DesignResult {
    let sup = g.sup_norm();
    let g = if sup > 1.0 { g.scaled(1.0 / sup) } else { g };
    let (ig, igp) = (f64::from(sign.g), f64::from(sign.gprime));
    let mut alpha = f64::INFINITY;
    let mut beta = f64::INFINITY;
    let mut sensitivity = f64::INFINITY;
    for &t in prior_grid {
        let (v, dv) = g.evaluate(t);
        alpha = alpha.min(ig * v);
        beta = beta.min(igp * dv);
        sensitivity = sensitivity.min((2.0 * v * dv).abs());
    }
    let depth = g.degree();
    DesignResult {
        alpha,
        beta,
        sensitivity,
        kappa: sensitivity / depth as f64,
        objective: 2.0 * alpha * beta,
        sign,
        feasible: alpha > 0.0 && beta > 0.0,
        prior,
        grid_bounds,
        coefficients: g,
    }
}

/// Sign-flipped copy of a design (same signal `f = g²`).
pub fn mirrored(result: &DesignResult) -> DesignResult {
    DesignResult {
        coefficients: result.coefficients.scaled(-1.0),
        sign: result.sign.flipped(),
        ..result.clone()
    }
}

/// `min |f′| / d` over an equispaced grid of the clamped prior.
pub fn sensitivity_efficiency(
    signal: &dyn Signal,
    prior: &PriorInterval,
    depth: usize,
) -> Result<f64, DesignError> {
    sensitivity_efficiency_on(signal, &prior.grid(DEFAULT_N_PRIOR, DEFAULT_MARGIN)?, depth)
}

pub fn sensitivity_efficiency_on(
    signal: &dyn Signal,
    grid: &[f64],
    depth: usize,
) -> Result<f64, DesignError> {
    if depth == 0 {
        return Err(DesignError::Domain("depth must be at least 1".into()));
    }
    let l = grid
        .iter()
        .map(|&t| signal.derivative(t).abs())
        .fold(f64::INFINITY, f64::min);
    Ok(l / depth as f64)
}

/// The fixed Hadamard-test pair used by robust phase estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpeReference {
    pub real: CosineSignal,
    pub imag: SineSignal,
    /// Root-mean-square slope of the pair per unit depth.
    pub kappa_eff: f64,
}

pub fn rpe_reference_signals(depth: usize) -> Result<RpeReference, DesignError> {
    if depth == 0 {
        return Err(DesignError::Domain("depth must be at least 1".into()));
    }
    let real = CosineSignal { depth };
    let imag = SineSignal { depth };
    // The pair's squared slopes sum to d² at every θ; evaluate at a generic point.
    let t = 0.3;
    let (a, b) = (real.derivative(t), imag.derivative(t));
    let kappa_eff = ((a * a + b * b) / 2.0).sqrt() / depth as f64;
    Ok(RpeReference {
        real,
        imag,
        kappa_eff,
    })
}

/// Largest prior radius compatible with a design of amplitude floor `α` and
/// slope `γ d`: `(1 - α)/(2γd)`.
pub fn critical_radius(depth: usize, alpha: f64, gamma: f64) -> Result<f64, DesignError> {
    if depth == 0 {
        return Err(DesignError::Domain("depth must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&alpha) || !(gamma > 0.0 && gamma <= 1.0) {
        return Err(DesignError::Domain(format!(
            "need alpha in [0, 1) and gamma in (0, 1], got alpha={alpha}, gamma={gamma}"
        )));
    }
    Ok((1.0 - alpha) / (2.0 * gamma * depth as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grids(center: f64, radius: f64, depth: usize) -> (Vec<f64>, Vec<f64>) {
        let prior = PriorInterval::new(center, radius).unwrap();
        (
            prior.grid(DEFAULT_N_PRIOR, DEFAULT_MARGIN).unwrap(),
            linspace(0.0, PI, DEFAULT_N_AMP.max(4 * depth)).collect(),
        )
    }

    #[test]
    fn depth_one_at_half_pi_is_infeasible() {
        let (p, a) = grids(PI / 2.0, 0.1, 1);
        for sign in SignPattern::ALL {
            assert!(solve_fixed_alpha_lp(1, &p, &a, 0.3, sign)
                .unwrap()
                .is_none());
        }
        let err = design_signal(&DesignRequest::new(
            1,
            PriorInterval::new(PI / 2.0, 0.1).unwrap(),
        ))
        .unwrap_err();
        assert!(matches!(err, DesignError::AllInfeasible { depth: 1, .. }));
    }

    #[test]
    fn depth_one_single_variable_lp() {
        let (p, a) = grids(PI / 4.0, 0.25, 1);
        let (g, beta) = solve_fixed_alpha_lp(1, &p, &a, 0.5, SignPattern::new(1, -1).unwrap())
            .unwrap()
            .unwrap();
        assert_abs_diff_eq!(beta, (PI / 4.0 - 0.25).sin(), epsilon = 1e-9);
        assert_abs_diff_eq!(g.coefficient(1), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn alpha_zero_is_feasible() {
        for d in [1, 2, 5, 8] {
            let (p, a) = grids(1.1, 0.2 / d as f64, d);
            let (_, beta) = solve_fixed_alpha_lp(d, &p, &a, 0.0, SignPattern::ALL[0])
                .unwrap()
                .unwrap();
            assert!(beta >= -1e-12);
        }
    }

    #[test]
    fn rejects_bad_requests() {
        let prior = PriorInterval::new(1.0, 0.01).unwrap();
        let mut req = DesignRequest::new(8, prior);
        req.n_amp = 31;
        assert!(matches!(design_signal(&req), Err(DesignError::Config(_))));
        let req = DesignRequest::new(8, PriorInterval::new(1.0, 0.05).unwrap());
        assert!(matches!(design_signal(&req), Err(DesignError::Config(_))));
        assert!(PriorInterval::new(1.0, 0.0).is_err());
        assert!(PriorInterval::new(-1.0, 0.5).is_err());
    }

    #[test]
    fn design_certifies_itself() {
        let prior = PriorInterval::with_shrinkage(0.9, 8, 1.5).unwrap();
        let res = design_signal(&DesignRequest::new(8, prior)).unwrap();
        assert!(res.feasible);
        let ver = res.verify(DEFAULT_N_AMP, DEFAULT_N_PRIOR, 4);
        assert!(ver.passes(VERIFY_TOLERANCE), "{ver:?}");
        assert!(res.kappa > 0.7 && res.kappa <= 1.0 + 1e-9);
        assert_abs_diff_eq!(res.objective, 2.0 * res.alpha * res.beta, epsilon = 1e-12);
    }

    #[test]
    fn sequential_and_parallel_designs_agree() {
        let prior = PriorInterval::with_shrinkage(2.0, 16, 2.0).unwrap();
        let a = design_signal(&DesignRequest::new(16, prior).with_execution(Execution::Sequential))
            .unwrap();
        let b = design_signal(&DesignRequest::new(16, prior).with_execution(Execution::Parallel))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn record_round_trip() {
        let prior = PriorInterval::with_shrinkage(1.3, 4, 1.0).unwrap();
        let res = design_signal(&DesignRequest::new(4, prior)).unwrap();
        let text = toml::to_string(&res.to_record()).unwrap();
        assert!(text.contains("L = "));
        let back: DesignRecord = toml::from_str(&text).unwrap();
        let res2 = DesignResult::try_from(back).unwrap();
        assert_eq!(res2.coefficients, res.coefficients);
        assert_eq!(res2.sign, res.sign);
    }

    #[test]
    fn cosine_signal_efficiency_limits() {
        let d = 5;
        let f = CosineSignal { depth: d };
        let best = PriorInterval::new(PI / (4.0 * d as f64), 1e-6).unwrap();
        assert_abs_diff_eq!(
            sensitivity_efficiency(&f, &best, d).unwrap(),
            1.0,
            epsilon = 1e-5
        );
        let worst = PriorInterval::new(PI / (2.0 * d as f64), 1e-6).unwrap();
        assert!(sensitivity_efficiency(&f, &worst, d).unwrap() < 1e-4);
    }

    #[test]
    fn rpe_reference_values() {
        let r = rpe_reference_signals(1).unwrap();
        assert_abs_diff_eq!(r.real.value(0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.imag.value(0.0), 0.5, epsilon = 1e-15);
        let r3 = rpe_reference_signals(3).unwrap();
        assert_abs_diff_eq!(r3.real.value(PI / 12.0), 0.5, epsilon = 1e-15);
        for d in 1..40 {
            let k = rpe_reference_signals(d).unwrap().kappa_eff;
            assert!((k - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-12);
        }
    }

    #[test]
    fn critical_radius_values() {
        for d in [1, 3, 16] {
            assert_abs_diff_eq!(
                critical_radius(d, 0.5, 1.0).unwrap(),
                1.0 / (4.0 * d as f64),
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(
                critical_radius(d, 0.0, 0.5).unwrap(),
                1.0 / d as f64,
                epsilon = 1e-15
            );
        }
        assert_abs_diff_eq!(
            critical_radius(10, 0.5, 0.9).unwrap(),
            1.0 / 36.0,
            epsilon = 1e-15
        );
        assert!(critical_radius(10, 1.0, 0.5).is_err());
        assert!(critical_radius(10, 0.5, 0.0).is_err());
        assert!(critical_radius(10, 0.5, 1.2).is_err());
    }

    #[test]
    fn mirrored_design_has_same_signal() {
        let prior = PriorInterval::with_shrinkage(0.7, 4, 1.0).unwrap();
        let res = design_signal(&DesignRequest::new(4, prior)).unwrap();
        let m = mirrored(&res);
        for t in linspace(0.0, PI, 50) {
            assert_abs_diff_eq!(res.signal().value(t), m.signal().value(t), epsilon = 1e-14);
        }
        assert!(m
            .verify(DEFAULT_N_AMP, DEFAULT_N_PRIOR, 2)
            .passes(VERIFY_TOLERANCE));
    }
}
