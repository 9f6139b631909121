// SPDX-License-Identifier: Apache-2.0

//! Parity-constrained cosine series `g(θ) = Σ a_k cos(kθ)` on `[0, π]`.
//!
//! A degree-`d` polynomial only carries modes with `k ≡ d (mod 2)`. Storage is
//! dense (index = mode) with the wrong-parity slots held at zero.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Angles this far outside `[0, π]` are still accepted (and evaluated as given).
pub const DEFAULT_WRAP_TOLERANCE: f64 = 1e-9;

/// Number of equispaced points (endpoints included) used for sup-norm checks.
pub const DEFAULT_NORM_GRID: usize = 2000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrigPolyError {
    #[error("mode {mode} has the wrong parity for degree {degree}")]
    ParityViolation { degree: usize, mode: usize },
    #[error("mode {mode} exceeds degree {degree}")]
    IndexOutOfRange { degree: usize, mode: usize },
    #[error("angle {theta} lies outside [0, pi]")]
    DomainError { theta: f64 },
    #[error("coefficient for mode {mode} is not finite")]
    NonFinite { mode: usize },
}

/// Evaluation strategy for the cosine series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalScheme {
    /// Clenshaw recurrence in `x = cos θ` (one `cos`/`sin` call per evaluation).
    #[default]
    Clenshaw,
    /// Direct summation of `a_k cos(kθ)`.
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly {
    degree: usize,
    coeffs: Vec<f64>,
}

impl TrigPoly {
    /// Builds a polynomial from `(mode, coefficient)` pairs. Repeated modes add up.
    pub fn new(degree: usize, modes: &[(usize, f64)]) -> Result<Self, TrigPolyError> {
        let mut coeffs = vec![0.0; degree + 1];
        for &(k, a) in modes {
            if k > degree {
                return Err(TrigPolyError::IndexOutOfRange { degree, mode: k });
            }
            if !(degree - k).is_multiple_of(2) {
                return Err(TrigPolyError::ParityViolation { degree, mode: k });
            }
            if !a.is_finite() {
                return Err(TrigPolyError::NonFinite { mode: k });
            }
            coeffs[k] += a;
        }
        Ok(Self { degree, coeffs })
    }

    /// Builds from the coefficients of the parity-admissible modes only,
    /// in increasing mode order (`d mod 2, d mod 2 + 2, ..., d`).
    pub fn from_parity_coefficients(degree: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), parity_modes(degree).count());
        let mut coeffs = vec![0.0; degree + 1];
        for (k, &a) in parity_modes(degree).zip(values) {
            coeffs[k] = a;
        }
        Self { degree, coeffs }
    }

    /// `g(θ) = cos(dθ) = T_d(cos θ)`.
    pub fn chebyshev(degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = 1.0;
        Self { degree, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Dense coefficient slice indexed by mode.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coefficient(&self, mode: usize) -> f64 {
        self.coeffs.get(mode).copied().unwrap_or(0.0)
    }

    /// `(mode, coefficient)` for every parity-admissible mode.
    pub fn modes(&self) -> Vec<(usize, f64)> {
        parity_modes(self.degree)
            .map(|k| (k, self.coeffs[k]))
            .collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| a * factor).collect(),
        }
    }

    /// Value and θ-derivative, rejecting angles outside `[0, π]`.
    pub fn eval_with_derivative(&self, theta: f64) -> Result<(f64, f64), TrigPolyError> {
        check_domain(theta, DEFAULT_WRAP_TOLERANCE)?;
        Ok(self.evaluate(theta))
    }

    /// Value and derivative without the domain check.
    #[inline]
    pub fn evaluate(&self, theta: f64) -> (f64, f64) {
        self.evaluate_with(theta, EvalScheme::Clenshaw)
    }

    pub fn evaluate_with(&self, theta: f64, scheme: EvalScheme) -> (f64, f64) {
        match scheme {
            EvalScheme::Clenshaw => self.clenshaw(theta),
            EvalScheme::Direct => self.direct(theta),
        }
    }

    #[inline]
    pub fn value(&self, theta: f64) -> f64 {
        self.clenshaw_value(theta.cos())
    }

    /// Evaluates the polynomial `u(x) = Σ a_k T_k(x)` for `x ∈ [-1, 1]`.
    pub fn value_at_cos(&self, x: f64) -> f64 {
        self.clenshaw_value(x)
    }

    fn clenshaw_value(&self, x: f64) -> f64 {
        let (mut b1, mut b2) = (0.0, 0.0);
        for &a in self.coeffs[1..].iter().rev() {
            let b0 = a + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + x * b1 - b2
    }

    fn clenshaw(&self, theta: f64) -> (f64, f64) {
        let (s, x) = theta.sin_cos();
        let value = self.clenshaw_value(x);
        // d/dθ T_k(cos θ) = -sin θ · k U_{k-1}(cos θ); sum Σ k a_k U_{k-1} by Clenshaw.
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (1..=self.degree).rev() {
            let b0 = k as f64 * self.coeffs[k] + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        // For a U-series the Clenshaw sum is b_0 itself.
        (value, -s * b1)
    }

    fn direct(&self, theta: f64) -> (f64, f64) {
        let mut value = 0.0;
        let mut derivative = 0.0;
        for (k, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let (s, c) = (k as f64 * theta).sin_cos();
            value += a * c;
            derivative -= a * k as f64 * s;
        }
        (value, derivative)
    }

    /// Max of `|g|` over `n` equispaced points of `[0, π]`.
    pub fn grid_sup_norm(&self, n: usize) -> f64 {
        linspace(0.0, PI, n)
            .map(|t| self.value(t).abs())
            .fold(0.0, f64::max)
    }

    /// Sup norm over `[0, π]`: a dense scan followed by golden-section polishing
    /// around the best samples.
    pub fn sup_norm(&self) -> f64 {
        let n = (16 * (self.degree + 1)).max(DEFAULT_NORM_GRID);
        let h = PI / (n - 1) as f64;
        let samples: Vec<f64> = linspace(0.0, PI, n).map(|t| self.value(t).abs()).collect();
        let mut best = samples.iter().cloned().fold(0.0, f64::max);
        for i in 0..n {
            let left = if i == 0 { 0.0 } else { samples[i - 1] };
            let right = if i + 1 == n { 0.0 } else { samples[i + 1] };
            if samples[i] >= left && samples[i] >= right && samples[i] > 0.9 * best {
                let lo = (i as f64 - 1.0).max(0.0) * h;
                let hi = ((i + 1) as f64 * h).min(PI);
                best = best.max(golden_max(|t| self.value(t).abs(), lo, hi));
            }
        }
        best
    }

    pub fn to_record(&self) -> TrigPolyRecord {
        TrigPolyRecord {
            degree: self.degree,
            coefficients: self.modes(),
        }
    }
}

/// Parity-admissible modes of a degree-`d` cosine series, ascending.
pub fn parity_modes(degree: usize) -> impl Iterator<Item = usize> + Clone {
    (degree % 2..=degree).step_by(2)
}

/// Serialized form `{degree, coefficients = [[k, a_k], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolyRecord {
    pub degree: usize,
    pub coefficients: Vec<(usize, f64)>,
}

impl TryFrom<TrigPolyRecord> for TrigPoly {
    type Error = TrigPolyError;

    fn try_from(record: TrigPolyRecord) -> Result<Self, Self::Error> {
        TrigPoly::new(record.degree, &record.coefficients)
    }
}

pub fn make_cosine_poly(degree: usize, modes: &[(usize, f64)]) -> Result<TrigPoly, TrigPolyError> {
    TrigPoly::new(degree, modes)
}

pub fn chebyshev_signal(degree: usize) -> TrigPoly {
    TrigPoly::chebyshev(degree)
}

pub(crate) fn check_domain(theta: f64, tolerance: f64) -> Result<(), TrigPolyError> {
    if theta.is_finite() && theta >= -tolerance && theta <= PI + tolerance {
        Ok(())
    } else {
        Err(TrigPolyError::DomainError { theta })
    }
}

/// A measurement probability as a function of the phase, with its slope.
pub trait Signal: Send + Sync {
    fn value(&self, theta: f64) -> f64;

    fn derivative(&self, theta: f64) -> f64;

    fn value_and_derivative(&self, theta: f64) -> (f64, f64) {
        (self.value(theta), self.derivative(theta))
    }

    /// Number of oracle queries per shot.
    fn depth(&self) -> usize;
}

/// `f = g²`, the `|0⟩ → |0⟩` probability of a QSP circuit realizing `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFn {
    base: TrigPoly,
}

impl SignalFn {
    pub fn new(base: TrigPoly) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &TrigPoly {
        &self.base
    }
}

impl Signal for SignalFn {
    fn value(&self, theta: f64) -> f64 {
        let g = self.base.value(theta);
        g * g
    }

    fn derivative(&self, theta: f64) -> f64 {
        let (g, dg) = self.base.evaluate(theta);
        2.0 * g * dg
    }

    fn value_and_derivative(&self, theta: f64) -> (f64, f64) {
        let (g, dg) = self.base.evaluate(theta);
        (g * g, 2.0 * g * dg)
    }

    fn depth(&self) -> usize {
        self.base.degree()
    }
}

/// `(1 + cos 2dθ)/2`: the Hadamard-test real-part signal (also the depth-`d`
/// Chebyshev signal `cos²(dθ)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineSignal {
    pub depth: usize,
}

impl Signal for CosineSignal {
    fn value(&self, theta: f64) -> f64 {
        0.5 * (1.0 + (2.0 * self.depth as f64 * theta).cos())
    }

    fn derivative(&self, theta: f64) -> f64 {
        let d = self.depth as f64;
        -d * (2.0 * d * theta).sin()
    }

    fn depth(&self) -> usize {
        self.depth
    }
}

/// `(1 + sin 2dθ)/2`: the Hadamard-test imaginary-part signal, and the
/// `|0⟩ → |+⟩` probability of the trivially-phased QSP circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineSignal {
    pub depth: usize,
}

impl Signal for SineSignal {
    fn value(&self, theta: f64) -> f64 {
        0.5 * (1.0 + (2.0 * self.depth as f64 * theta).sin())
    }

    fn derivative(&self, theta: f64) -> f64 {
        let d = self.depth as f64;
        d * (2.0 * d * theta).cos()
    }

    fn depth(&self) -> usize {
        self.depth
    }
}

/// `n` equispaced points on `[a, b]`, endpoints included.
pub fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    let step = if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| {
        if i + 1 == n && n > 1 {
            b
        } else {
            a + step * i as f64
        }
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = f(lo).max(f(hi)).max(f1).max(f2);
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        best = best.max(f1).max(f2);
        if hi - lo < 1e-15 {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut impl Rng, degree: usize) -> TrigPoly {
        let modes: Vec<(usize, f64)> = parity_modes(degree)
            .map(|k| (k, rng.random_range(-1.0..1.0)))
            .collect();
        TrigPoly::new(degree, &modes).unwrap()
    }

    #[test]
    fn half_plus_half_cos_two_theta() {
        let p = make_cosine_poly(2, &[(0, 0.5), (2, 0.5)]).unwrap();
        assert_abs_diff_eq!(p.value(0.0), 1.0, epsilon = 1e-15);
        let t = 0.37;
        assert_abs_diff_eq!(p.value(t), 0.5 * (1.0 + (2.0 * t).cos()), epsilon = 1e-15);
    }

    #[test]
    fn rejects_wrong_parity_and_out_of_range() {
        assert_eq!(
            make_cosine_poly(2, &[(1, 1.0)]),
            Err(TrigPolyError::ParityViolation { degree: 2, mode: 1 })
        );
        assert_eq!(
            make_cosine_poly(2, &[(4, 1.0)]),
            Err(TrigPolyError::IndexOutOfRange { degree: 2, mode: 4 })
        );
    }

    #[test]
    fn single_mode_identity() {
        let p = make_cosine_poly(1, &[(1, 1.0)]).unwrap();
        assert_abs_diff_eq!(p.value(PI / 3.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn cos_two_theta_derivative() {
        let p = chebyshev_signal(2);
        let (v, dv) = p.eval_with_derivative(0.0).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dv, 0.0, epsilon = 1e-15);
        let (v, dv) = p.eval_with_derivative(PI / 4.0).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dv, -2.0, epsilon = 1e-14);
    }

    #[test]
    fn domain_is_checked() {
        let p = chebyshev_signal(2);
        assert!(matches!(
            p.eval_with_derivative(-0.1),
            Err(TrigPolyError::DomainError { .. })
        ));
        assert!(p.eval_with_derivative(PI + 1e-12).is_ok());
        assert!(p.eval_with_derivative(f64::NAN).is_err());
    }

    #[test]
    fn five_mode_derivative_matches_finite_difference() {
        let p = TrigPoly::new(8, &[(0, 0.3), (2, -0.2), (4, 0.1), (6, 0.25), (8, -0.15)]).unwrap();
        let h = 1e-5;
        let t = 0.7;
        let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
        assert_abs_diff_eq!(p.evaluate(t).1, fd, epsilon = 1e-6);
    }

    #[test]
    fn chebyshev_degree_zero_and_zero_crossing() {
        assert_abs_diff_eq!(chebyshev_signal(0).value(1.234), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chebyshev_signal(3).value(PI / 6.0), 0.0, epsilon = 1e-15);
    }

    /// Independent oracle: T_5 by the three-term recurrence on x = cos θ.
    #[test]
    fn chebyshev_five_matches_recurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = chebyshev_signal(5);
        for _ in 0..100 {
            let t: f64 = rng.random_range(0.0..PI);
            let x = t.cos();
            let (mut t0, mut t1) = (1.0, x);
            for _ in 2..=5 {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            assert_abs_diff_eq!(p.value(t), t1, epsilon = 1e-12);
        }
    }

    #[test]
    fn schemes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [1usize, 7, 32, 128] {
            let p = random_poly(&mut rng, d);
            for t in linspace(0.0, PI, 97) {
                let (a, da) = p.evaluate_with(t, EvalScheme::Clenshaw);
                let (b, db) = p.evaluate_with(t, EvalScheme::Direct);
                assert_abs_diff_eq!(a, b, epsilon = 1e-11);
                assert_abs_diff_eq!(da, db, epsilon = 1e-9 * d as f64);
            }
        }
    }

    #[test]
    fn parity_symmetry_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [3usize, 4, 17, 30] {
            let p = random_poly(&mut rng, d);
            let sign = if d % 2 == 1 { -1.0 } else { 1.0 };
            for t in linspace(0.0, PI, 1000) {
                assert_abs_diff_eq!(p.value(PI - t), sign * p.value(t), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn derivative_consistency_random_polys() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for _ in 0..100 {
            let d = rng.random_range(0..=64usize);
            let p = random_poly(&mut rng, d).scaled(1.0 / (d as f64 + 1.0));
            let t: f64 = rng.random_range(0.01..PI - 0.01);
            let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            assert_abs_diff_eq!(p.evaluate(t).1, fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn bernstein_bound_for_normalized_signals() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for d in [2usize, 5, 16, 40] {
            let p = random_poly(&mut rng, d);
            let p = p.scaled(1.0 / p.sup_norm());
            assert!(p.grid_sup_norm(DEFAULT_NORM_GRID) <= 1.0 + 1e-12);
            let f = SignalFn::new(p);
            let max_slope = linspace(0.0, PI, 2000)
                .map(|t| f.derivative(t).abs())
                .fold(0.0, f64::max);
            assert!(
                max_slope <= d as f64 * (1.0 + 1e-6),
                "d={d} slope={max_slope}"
            );
            for t in linspace(0.0, PI, 2000) {
                let v = f.value(t);
                assert!((0.0..=1.0 + 1e-9).contains(&v));
            }
        }
    }

    #[test]
    fn sup_norm_finds_peak_between_samples() {
        let p = chebyshev_signal(127).scaled(0.5);
        assert_abs_diff_eq!(p.sup_norm(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn record_round_trip_keeps_modes() {
        let p = TrigPoly::new(3, &[(1, 0.25), (3, -0.5)]).unwrap();
        let text = toml::to_string(&p.to_record()).unwrap();
        let back: TrigPolyRecord = toml::from_str(&text).unwrap();
        assert_eq!(TrigPoly::try_from(back).unwrap(), p);
    }

    proptest! {
        #[test]
        fn parity_coefficients_only_touch_admissible_modes(d in 0usize..40, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vals: Vec<f64> = parity_modes(d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = TrigPoly::from_parity_coefficients(d, &vals);
            for (k, &a) in p.coefficients().iter().enumerate() {
                if (d - k) % 2 != 0 {
                    prop_assert_eq!(a, 0.0);
                }
            }
            let g_direct = p.evaluate_with(0.9, EvalScheme::Direct).0;
            prop_assert!((p.value(0.9) - g_direct).abs() < 1e-12);
        }
    }
}
