// SPDX-License-Identifier: Apache-2.0

//! Single-qubit QSP sequences.
//!
//! Z convention: `Q(θ, Φ) = e^{iφ₀X} Π_j e^{iθZ} e^{iφ_jX}`.
//! X convention: `X(θ, Ψ) = e^{iψ₀Z} Π_j e^{iθX} e^{iψ_jZ}`.
//!
//! The two are related by `Q(θ, Φ) = F† X(θ, Ψ) F` with `F = e^{iπ/4 Z} H` and
//! `Φ = (ψ₀ - π/4, ψ₁, ..., ψ_{d-1}, ψ_d + π/4)`.

use crate::trigpoly::{check_domain, TrigPoly};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::ops::Mul;
use thiserror::Error;

/// Default size of the representation grid.
pub const DEFAULT_GRID: usize = 512;
const PHASE_FIT_FLOOR: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QspError {
    #[error("expected {expected:?}-convention phase factors")]
    Convention { expected: Convention },
    #[error("phase factors are not {0}-symmetric")]
    Symmetry(&'static str),
    #[error("phase factor list is empty")]
    Empty,
    #[error("theta = {0} outside [0, pi]")]
    Domain(f64),
    #[error("no grid point with |<0|Q|0>| > 1e-8; u is identically zero")]
    PhaseFit { fallback: Box<QspRepresentation> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    Z,
    X,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseFactors {
    pub convention: Convention,
    pub angles: Vec<f64>,
}

impl PhaseFactors {
    pub fn new(convention: Convention, angles: Vec<f64>) -> Result<Self, QspError> {
        if angles.is_empty() {
            return Err(QspError::Empty);
        }
        Ok(Self { convention, angles })
    }

    pub fn depth(&self) -> usize {
        self.angles.len() - 1
    }

    /// `φ_d = φ₀ + π/2` and `φ_j = φ_{d-j}` for interior `j`.
    pub fn is_z_symmetric(&self) -> bool {
        let a = &self.angles;
        let d = self.depth();
        if d == 0 {
            return false;
        }
        (a[d] - a[0] - FRAC_PI_2).abs() <= SYMMETRY_TOL
            && (1..d).all(|j| (a[j] - a[d - j]).abs() <= SYMMETRY_TOL)
    }

    /// `ψ_j = ψ_{d-j}` for all `j`.
    pub fn is_x_symmetric(&self) -> bool {
        let a = &self.angles;
        let d = self.depth();
        (0..=d).all(|j| (a[j] - a[d - j]).abs() <= SYMMETRY_TOL)
    }
}

/// A 2×2 complex matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    pub m: [[Complex64; 2]; 2],
}

impl Unitary2 {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self {
            m: [[a, b], [c, d]],
        }
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self::new(o, z, z, o)
    }

    /// `e^{iφX}`.
    pub fn rx(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        let (re, im) = (Complex64::new(c, 0.0), Complex64::new(0.0, s));
        Self::new(re, im, im, re)
    }

    /// `e^{iφZ}`.
    pub fn rz(phi: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new(Complex64::cis(phi), z, z, Complex64::cis(-phi))
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new(h, h, h, -h)
    }

    pub fn pauli_z() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new(Complex64::new(1.0, 0.0), z, z, Complex64::new(-1.0, 0.0))
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self::new(
            m[0][0].conj(),
            m[1][0].conj(),
            m[0][1].conj(),
            m[1][1].conj(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let m = &self.m;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    /// Largest entry magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.m[i][j] - other.m[i][j]).norm());
            }
        }
        worst
    }

    /// `‖U†U - I‖_max`.
    pub fn unitarity_error(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    /// The state `U|0⟩`.
    pub fn column0(&self) -> [Complex64; 2] {
        [self.m[0][0], self.m[1][0]]
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let (a, b) = (&self.m, &rhs.m);
        Unitary2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// The QSP product for either convention. `θ` must lie in `[0, π]`.
pub fn qsp_unitary(theta: f64, phases: &PhaseFactors) -> Result<Unitary2, QspError> {
    check_domain(theta, 1e-9).map_err(|_| QspError::Domain(theta))?;
    Ok(qsp_unitary_unchecked(theta, phases))
}

pub(crate) fn qsp_unitary_unchecked(theta: f64, phases: &PhaseFactors) -> Unitary2 {
    let (phase_gate, signal): (fn(f64) -> Unitary2, Unitary2) = match phases.convention {
        Convention::Z => (Unitary2::rx, Unitary2::rz(theta)),
        Convention::X => (Unitary2::rz, Unitary2::rx(theta)),
    };
    let mut u = phase_gate(phases.angles[0]);
    for &a in &phases.angles[1..] {
        u = u * signal * phase_gate(a);
    }
    u
}

/// `F = e^{iπ/4 Z} H`, so that `Q(θ, Φ) = F† X(θ, Ψ) F`.
pub fn conversion_frame() -> Unitary2 {
    Unitary2::rz(FRAC_PI_4) * Unitary2::hadamard()
}

/// `Φ = (ψ₀ - π/4, ψ₁, ..., ψ_{d-1}, ψ_d + π/4)` for X-symmetric `Ψ`.
pub fn convert_x_to_z(psi: &PhaseFactors) -> Result<PhaseFactors, QspError> {
    if psi.convention != Convention::X {
        return Err(QspError::Convention {
            expected: Convention::X,
        });
    }
    if !psi.is_x_symmetric() {
        return Err(QspError::Symmetry("X"));
    }
    let mut angles = psi.angles.clone();
    let d = psi.depth();
    angles[0] -= FRAC_PI_4;
    angles[d] += FRAC_PI_4;
    if d == 0 {
        // Both shifts hit the same angle.
        angles[0] = psi.angles[0];
    }
    Ok(PhaseFactors {
        convention: Convention::Z,
        angles,
    })
}

/// The Z-convention image of the all-zero X-convention sequence of depth `d`,
/// for which `⟨0|Q|0⟩ = cos dθ` and `⟨1|Q|0⟩ = sin dθ`.
pub fn trivial_z_phases(depth: usize) -> PhaseFactors {
    let psi = PhaseFactors {
        convention: Convention::X,
        angles: vec![0.0; depth + 1],
    };
    convert_x_to_z(&psi).expect("zero phases are symmetric")
}

/// `(p₀₀, p₀₊) = (|⟨0|Q|0⟩|², |⟨+|Q|0⟩|²)`.
pub fn measurement_probs(theta: f64, phases: &PhaseFactors) -> Result<(f64, f64), QspError> {
    if phases.convention != Convention::Z {
        return Err(QspError::Convention {
            expected: Convention::Z,
        });
    }
    let q = qsp_unitary(theta, phases)?;
    let [a, c] = q.column0();
    let plus = (a + c) * FRAC_1_SQRT_2;
    Ok((a.norm_sqr().min(1.0), plus.norm_sqr().min(1.0)))
}

/// Samples of `(u, v, w)` with `⟨0|Q|0⟩ = c·u`, `⟨1|Q|0⟩ = c·(sinθ·w + i v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QspRepresentation {
    pub theta: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// The removed unimodular global phase `c`.
    pub phase: Complex64,
}

impl QspRepresentation {
    /// `max |u² + v² + sin²θ w² - 1|`.
    pub fn normalization_error(&self) -> f64 {
        (0..self.theta.len())
            .map(|i| {
                let s = self.theta[i].sin() * self.w[i];
                (self.u[i] * self.u[i] + self.v[i] * self.v[i] + s * s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Cosine-series coefficients of `u` (all modes below the grid size);
    /// only meaningful on [`chebyshev_grid`].
    pub fn u_cosine_coefficients(&self) -> Vec<f64> {
        cosine_transform(&self.u)
    }

    /// Fits `u` as a depth-`d` parity series, returning it with the energy
    /// found in modes the depth and parity rule out.
    pub fn fit_u(&self, depth: usize) -> (TrigPoly, f64) {
        let all = self.u_cosine_coefficients();
        let mut leak = 0.0;
        let mut modes = Vec::new();
        for (k, &a) in all.iter().enumerate() {
            if k <= depth && k % 2 == depth % 2 {
                modes.push((k, a));
            } else {
                leak += a * a;
            }
        }
        let poly = TrigPoly::new(depth, &modes).expect("modes are admissible");
        (poly, leak)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,u,v,w\n");
        for i in 0..self.theta.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                self.theta[i], self.u[i], self.v[i], self.w[i]
            );
        }
        out
    }
}

/// `θ_j = (j + ½)π/n`, the nodes of the discrete cosine transform.
pub fn chebyshev_grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) * PI / n as f64).collect()
}

/// Coefficients `a_k` of `Σ a_k cos kθ` interpolating `values` on [`chebyshev_grid`].
pub fn cosine_transform(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let grid = chebyshev_grid(n);
    (0..n)
        .map(|k| {
            let s: f64 = values
                .iter()
                .zip(&grid)
                .map(|(v, t)| v * (k as f64 * t).cos())
                .sum();
            if k == 0 {
                s / n as f64
            } else {
                2.0 * s / n as f64
            }
        })
        .collect()
}

/// Picks the representative of `±z/|z|` with positive real part (or positive
/// imaginary part when the real part vanishes).
fn canonical_phase(z: Complex64) -> Complex64 {
    let c = z / z.norm();
    if c.re < -1e-12 || (c.re.abs() <= 1e-12 && c.im < 0.0) {
        -c
    } else {
        c
    }
}

pub fn extract_representation(
    phases: &PhaseFactors,
    grid: &[f64],
) -> Result<QspRepresentation, QspError> {
    if phases.convention != Convention::Z {
        return Err(QspError::Convention {
            expected: Convention::Z,
        });
    }
    if !phases.is_z_symmetric() {
        return Err(QspError::Symmetry("Z"));
    }
    let mats: Vec<Unitary2> = grid
        .iter()
        .map(|&t| qsp_unitary(t, phases))
        .collect::<Result<_, _>>()?;
    let (peak, imax) = mats
        .iter()
        .enumerate()
        .map(|(i, q)| (q.entry(0, 0).norm(), i))
        .fold((0.0, 0), |acc, x| if x.0 > acc.0 { x } else { acc });

    let (phase, degenerate) = if peak > PHASE_FIT_FLOOR {
        (canonical_phase(mats[imax].entry(0, 0)), false)
    } else {
        // Q10 - Q01 = 2c·sinθ·w and Q10 + Q01 = 2ic·v.
        let (best, _) = mats
            .iter()
            .map(|q| {
                let a = (q.entry(1, 0) - q.entry(0, 1)) * 0.5;
                let b = (q.entry(1, 0) + q.entry(0, 1)) * Complex64::new(0.0, -0.5);
                if a.norm() >= b.norm() {
                    (a, a.norm())
                } else {
                    (b, b.norm())
                }
            })
            .fold((Complex64::new(1.0, 0.0), 0.0), |acc, x| {
                if x.1 > acc.1 {
                    x
                } else {
                    acc
                }
            });
        (canonical_phase(best), true)
    };

    let inv = phase.conj();
    let mut rep = QspRepresentation {
        theta: grid.to_vec(),
        u: Vec::with_capacity(grid.len()),
        v: Vec::with_capacity(grid.len()),
        w: Vec::with_capacity(grid.len()),
        phase,
    };
    for (q, &t) in mats.iter().zip(grid) {
        let u = if degenerate {
            0.0
        } else {
            (q.entry(0, 0) * inv).re
        };
        let off = q.entry(1, 0) * inv;
        let s = t.sin();
        rep.u.push(u);
        rep.v.push(off.im);
        rep.w.push(if s.abs() > 1e-300 { off.re / s } else { 0.0 });
    }
    if degenerate {
        Err(QspError::PhaseFit {
            fallback: Box::new(rep),
        })
    } else {
        Ok(rep)
    }
}
