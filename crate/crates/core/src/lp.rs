// SPDX-License-Identifier: Apache-2.0

//! Dense linear programs of the form `max cᵀx  s.t.  A x ≤ b`, `x` free.
//!
//! The solver is a revised dual simplex: it walks bases of the dual
//! `min bᵀy, Aᵀy = c, y ≥ 0` (`n` rows, one column per primal constraint),
//! which suits the tall problems produced by signal design (tens of variables,
//! thousands of sampled constraints). Dual feasibility does not depend on `b`,
//! so a [`DualSimplex`] can be re-solved for a new right-hand side starting from
//! the previous optimal basis.
//!
//! The starting basis comes from an artificial box `|x_i| ≤ box_bound`; a box
//! row left binding at the optimum is reported as [`LpError::Unbounded`].

#![allow(clippy::needless_range_loop)]

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("objective is unbounded (artificial box bound reached)")]
    Unbounded,
    #[error("numerical breakdown: {0}")]
    Breakdown(String),
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    /// Allowed violation of `A_j x ≤ b_j`, relative to `‖A_j‖`.
    pub feasibility_tol: f64,
    /// Smallest admissible pivot magnitude.
    pub pivot_tol: f64,
    pub box_bound: f64,
    pub max_iterations: usize,
    /// Pivots between explicit re-inversions of the basis.
    pub refactor_every: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-10,
            pivot_tol: 1e-9,
            box_bound: 1e4,
            max_iterations: 50_000,
            refactor_every: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            LpOutcome::Infeasible => None,
        }
    }
}

/// `max cᵀx s.t. A x ≤ b` with a dense row-major constraint matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityLp {
    n: usize,
    objective: Vec<f64>,
    rows: Vec<f64>,
    rhs: Vec<f64>,
}

impl InequalityLp {
    pub fn new(objective: Vec<f64>) -> Self {
        Self {
            n: objective.len(),
            objective,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    /// Adds `coeffs · x ≤ rhs` and returns its row index.
    pub fn push_row(&mut self, coeffs: &[f64], rhs: f64) -> usize {
        assert_eq!(coeffs.len(), self.n, "row width mismatch");
        self.rows.extend_from_slice(coeffs);
        self.rhs.push(rhs);
        self.rhs.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.n..(i + 1) * self.n]
    }

    pub fn maximize(&self) -> Result<LpOutcome, LpError> {
        self.maximize_with(LpOptions::default())
    }

    pub fn maximize_with(&self, options: LpOptions) -> Result<LpOutcome, LpError> {
        DualSimplex::new(self, options)?.solve(&self.rhs)
    }

    /// Largest violation `max_j (A_j x - b_j)` (negative when strictly feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        (0..self.num_rows())
            .map(|j| dot(self.row(j), x) - self.rhs[j])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Re-solvable dual simplex state for a fixed `(A, c)`.
pub struct DualSimplex {
    n: usize,
    /// Original rows followed by `2n` box rows `±e_i ≤ box_bound`.
    rows: Vec<f64>,
    norms: Vec<f64>,
    user_rows: usize,
    objective: Vec<f64>,
    basis: Vec<usize>,
    /// Inverse of the basis matrix whose i-th row is `rows[basis[i]]`.
    binv: Vec<f64>,
    options: LpOptions,
    since_refactor: usize,
}

impl DualSimplex {
    pub fn new(lp: &InequalityLp, options: LpOptions) -> Result<Self, LpError> {
        let n = lp.n;
        let m = lp.num_rows();
        let mut rows = Vec::with_capacity((m + 2 * n) * n);
        rows.extend_from_slice(&lp.rows);
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut r = vec![0.0; n];
                r[i] = sign;
                rows.extend_from_slice(&r);
            }
        }
        let total = m + 2 * n;
        let norms = (0..total)
            .map(|j| {
                let r = &rows[j * n..(j + 1) * n];
                dot(r, r).sqrt().max(f64::MIN_POSITIVE)
            })
            .collect();
        let mut basis = Vec::with_capacity(n);
        let mut binv = vec![0.0; n * n];
        for i in 0..n {
            let sign = if lp.objective[i] >= 0.0 { 1.0 } else { -1.0 };
            basis.push(m + 2 * i + usize::from(sign < 0.0));
            binv[i * n + i] = sign;
        }
        Ok(Self {
            n,
            rows,
            norms,
            user_rows: m,
            objective: lp.objective.clone(),
            basis,
            binv,
            options,
            since_refactor: 0,
        })
    }

    fn row(&self, j: usize) -> &[f64] {
        &self.rows[j * self.n..(j + 1) * self.n]
    }

    fn full_rhs(&self, rhs: &[f64], j: usize) -> f64 {
        if j < self.user_rows {
            rhs[j]
        } else {
            self.options.box_bound
        }
    }

    /// Solves with the given right-hand side (one entry per original row),
    /// starting from the current basis.
    pub fn solve(&mut self, rhs: &[f64]) -> Result<LpOutcome, LpError> {
        assert_eq!(rhs.len(), self.user_rows, "rhs length mismatch");
        let n = self.n;
        let total = self.rows.len() / n;
        let mut iterations = 0usize;
        let mut best_value = f64::INFINITY;
        let mut stalled = 0usize;
        let stall_limit = 4 * n + 10;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut y = vec![0.0; n];
        loop {
            self.primal_point(rhs, &mut x);
            let value = dot(&self.objective, &x);
            if value < best_value - 1e-12 * (1.0 + value.abs()) {
                best_value = value;
                stalled = 0;
            } else {
                stalled += 1;
            }
            let bland = stalled > stall_limit;

            // Pricing: most violated constraint, scaled by its row norm.
            let mut entering = None;
            let mut worst = 0.0;
            for j in 0..total {
                let slack = self.full_rhs(rhs, j) - dot(self.row(j), &x);
                let scaled = slack / self.norms[j];
                if scaled < -self.options.feasibility_tol {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if scaled < worst {
                        worst = scaled;
                        entering = Some(j);
                    }
                }
            }
            let Some(j) = entering else {
                if self.since_refactor > 0 {
                    // Confirm optimality with a fresh inverse before reporting.
                    self.refactor()?;
                    self.primal_point(rhs, &mut x);
                    if self.max_scaled_violation(rhs, &x) < -self.options.feasibility_tol {
                        continue;
                    }
                }
                return self.finish(x, iterations);
            };

            iterations += 1;
            if iterations > self.options.max_iterations {
                return Err(LpError::IterationLimit(self.options.max_iterations));
            }

            // w = A_j B⁻¹ (the entering column of the dual in basis coordinates),
            // y = B⁻ᵀ c (current dual values).
            let aj = self.row(j).to_vec();
            for k in 0..n {
                let mut s_w = 0.0;
                let mut s_y = 0.0;
                for r in 0..n {
                    let b = self.binv[r * n + k];
                    s_w += aj[r] * b;
                    s_y += self.objective[r] * b;
                }
                w[k] = s_w;
                y[k] = s_y.max(0.0);
            }

            // Harris two-pass ratio test.
            let tol = self.options.pivot_tol;
            let dual_tol = 1e-11;
            let mut bound = f64::INFINITY;
            for k in 0..n {
                if w[k] > tol {
                    bound = bound.min((y[k] + dual_tol) / w[k]);
                }
            }
            if !bound.is_finite() {
                return Ok(LpOutcome::Infeasible);
            }
            let mut leave = None;
            let mut best_pivot = 0.0;
            for k in 0..n {
                if w[k] > tol && y[k] / w[k] <= bound {
                    let better = if bland {
                        leave.is_none_or(|l: usize| self.basis[k] < self.basis[l])
                    } else {
                        w[k] > best_pivot
                    };
                    if better {
                        best_pivot = w[k];
                        leave = Some(k);
                    }
                }
            }
            let p = leave.ok_or_else(|| LpError::Breakdown("empty ratio test".into()))?;
            self.pivot(p, j, &w);
        }
    }

    fn finish(&self, x: Vec<f64>, iterations: usize) -> Result<LpOutcome, LpError> {
        let limit = self.options.box_bound * (1.0 - 1e-9);
        if x.iter().any(|v| v.abs() >= limit) {
            return Err(LpError::Unbounded);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LpError::Breakdown("non-finite primal point".into()));
        }
        let objective = dot(&self.objective, &x);
        Ok(LpOutcome::Optimal(LpSolution {
            x,
            objective,
            iterations,
        }))
    }

    fn max_scaled_violation(&self, rhs: &[f64], x: &[f64]) -> f64 {
        let total = self.rows.len() / self.n;
        (0..total)
            .map(|j| (self.full_rhs(rhs, j) - dot(self.row(j), x)) / self.norms[j])
            .fold(f64::INFINITY, f64::min)
    }

    fn primal_point(&self, rhs: &[f64], x: &mut [f64]) {
        let n = self.n;
        let b: Vec<f64> = self.basis.iter().map(|&j| self.full_rhs(rhs, j)).collect();
        for r in 0..n {
            x[r] = dot(&self.binv[r * n..(r + 1) * n], &b);
        }
    }

    fn pivot(&mut self, p: usize, entering: usize, w: &[f64]) {
        let n = self.n;
        let wp = w[p];
        let col: Vec<f64> = (0..n).map(|r| self.binv[r * n + p]).collect();
        for r in 0..n {
            let c = col[r];
            if c == 0.0 {
                continue;
            }
            let row = &mut self.binv[r * n..(r + 1) * n];
            for k in 0..n {
                let delta = if k == p { w[k] - 1.0 } else { w[k] };
                row[k] -= c * delta / wp;
            }
        }
        self.basis[p] = entering;
        self.since_refactor += 1;
        if self.since_refactor >= self.options.refactor_every {
            // A failed re-inversion keeps the updated inverse; the next solve
            // re-checks optimality anyway.
            let _ = self.refactor();
        }
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let n = self.n;
        let basis_matrix = DMatrix::from_fn(n, n, |i, k| self.rows[self.basis[i] * n + k]);
        let inv = basis_matrix
            .try_inverse()
            .ok_or_else(|| LpError::Breakdown("singular basis".into()))?;
        for r in 0..n {
            for k in 0..n {
                self.binv[r * n + k] = inv[(r, k)];
            }
        }
        self.since_refactor = 0;
        Ok(())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
