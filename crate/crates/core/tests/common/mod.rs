//! Reference implementations used by the integration tests. Nothing here
//! calls into the library's numerics.

#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

pub type C = Complex64;
pub type M2 = Matrix2<C>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn pauli_x() -> M2 {
    M2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn pauli_z() -> M2 {
    M2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

pub fn hadamard() -> M2 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    M2::new(c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0))
}

/// `e^{iφP}` for an involution `P`.
pub fn exp_i(phi: f64, p: &M2) -> M2 {
    M2::identity() * c(phi.cos(), 0.0) + p * c(0.0, phi.sin())
}

/// `e^{iφ₀ A} Π e^{iθ B} e^{iφ_j A}`.
pub fn alternating(theta: f64, phases: &[f64], a: &M2, b: &M2) -> M2 {
    let signal = exp_i(theta, b);
    phases[1..]
        .iter()
        .fold(exp_i(phases[0], a), |acc, &p| acc * signal * exp_i(p, a))
}

/// Z-convention product: X-rotation phases, Z-rotation signal.
pub fn q_z(theta: f64, phases: &[f64]) -> M2 {
    alternating(theta, phases, &pauli_x(), &pauli_z())
}

/// X-convention product: Z-rotation phases, X-rotation signal.
pub fn q_x(theta: f64, phases: &[f64]) -> M2 {
    alternating(theta, phases, &pauli_z(), &pauli_x())
}

pub fn max_diff(a: &M2, b: &M2) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `Σ a_k cos kθ` and its derivative, summed directly.
pub fn cosine_series(coeffs: &[(usize, f64)], theta: f64) -> (f64, f64) {
    coeffs.iter().fold((0.0, 0.0), |(v, dv), &(k, a)| {
        let k = k as f64;
        (v + a * (k * theta).cos(), dv - a * k * (k * theta).sin())
    })
}

/// `min_θ |d/dθ g²| / d` over `n` equispaced points of `[lo, hi]`.
pub fn kappa_of(coeffs: &[(usize, f64)], depth: usize, lo: f64, hi: f64, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let (g, dg) = cosine_series(coeffs, t);
            (2.0 * g * dg).abs()
        })
        .fold(f64::INFINITY, f64::min)
        / depth as f64
}

/// Ordinary least squares: `(slope, intercept, r²)`.
pub fn ols(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let syy: f64 = points.iter().map(|p| p.1 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let r = (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt();
    (slope, intercept, r * r)
}

/// Kronecker product of dense complex matrices.
pub fn kron(a: &DMatrix<C>, b: &DMatrix<C>) -> DMatrix<C> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn dense(m: &M2) -> DMatrix<C> {
    DMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}
