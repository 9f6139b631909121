// SPDX-License-Identifier: Apache-2.0

//! Phase factors for a target `u`, so that `⟨0|Q(θ, Φ)|0⟩ = u(cos θ)`.
//!
//! Works on the symmetric X-convention sequence: with `Ψ` palindromic,
//! `u = Re ⟨0|X(θ, Ψ)|0⟩`, and the free half of `Ψ` is fitted by damped Newton
//! iterations on Chebyshev nodes. The result is mapped to the Z convention.

use crate::qsp::{chebyshev_grid, qsp_unitary, Convention, PhaseFactors, Unitary2, DEFAULT_GRID};
use crate::trigpoly::{parity_modes, TrigPoly};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use thiserror::Error;

/// Targets are kept at least this far below 1 in sup norm.
pub const HEADROOM: f64 = 1e-8;
/// Inputs above `1 + NORM_SLACK` are rejected rather than rescaled.
pub const NORM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthesisError {
    #[error("sup |u| = {sup} exceeds 1")]
    NormViolation { sup: f64 },
    #[error("coefficient at mode {mode} breaks the parity of degree {degree}")]
    ParityMismatch { degree: usize, mode: usize },
    #[error("degree must be at least 1")]
    ZeroDegree,
    #[error("no convergence after {} iterations (residual {:.3e})", .0.iterations, .0.residual)]
    NonConvergence(Box<SynthesisReport>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub phases: PhaseFactors,
    /// Max deviation from the (headroom-scaled) target on the verification grid.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Factor applied to the input to enforce the headroom.
    pub target_scale: f64,
}

/// Maps the free half of `Ψ` to the full palindrome.
fn full_phases(reduced: &[f64], depth: usize) -> Vec<f64> {
    (0..=depth).map(|j| reduced[j.min(depth - j)]).collect()
}

/// Residuals `Re⟨0|X|0⟩ - u` and their Jacobian in the reduced phases.
fn residual_and_jacobian(
    reduced: &[f64],
    depth: usize,
    nodes: &[f64],
    targets: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let n = reduced.len();
    let psi = full_phases(reduced, depth);
    let mut r = DVector::zeros(nodes.len());
    let mut jac = DMatrix::zeros(nodes.len(), n);
    let mut prefix_row = vec![[Complex64::new(0.0, 0.0); 2]; depth + 1];
    for (row, (&theta, &target)) in nodes.iter().zip(targets).enumerate() {
        let signal = Unitary2::rx(theta);
        // prefix_k = rz(ψ₀) W rz(ψ₁) ... W rz(ψ_k); keep its first row.
        let mut prefix = Unitary2::rz(psi[0]);
        prefix_row[0] = prefix.m[0];
        for k in 1..=depth {
            prefix = prefix * signal * Unitary2::rz(psi[k]);
            prefix_row[k] = prefix.m[0];
        }
        r[row] = prefix.m[0][0].re - target;
        // suffix_k = W rz(ψ_{k+1}) ... W rz(ψ_d); walk it backwards by its first column.
        let mut suffix = Unitary2::identity();
        for k in (0..=depth).rev() {
            let a = prefix_row[k];
            let col = [suffix.m[0][0], suffix.m[1][0]];
            // (prefix_k · iZ · suffix_k)₀₀
            let dz = Complex64::new(0.0, 1.0) * (a[0] * col[0] - a[1] * col[1]);
            jac[(row, k.min(depth - k))] += dz.re;
            if k > 0 {
                suffix = signal * Unitary2::rz(psi[k]) * suffix;
            }
        }
    }
    (r, jac)
}

/// Z-convention phases for `u`; `tolerance` bounds the verified residual.
pub fn synthesize_phase_factors(
    u: &TrigPoly,
    tolerance: f64,
    max_iterations: usize,
) -> Result<SynthesisReport, SynthesisError> {
    let depth = u.degree();
    if depth == 0 {
        return Err(SynthesisError::ZeroDegree);
    }
    let admissible: Vec<usize> = parity_modes(depth).collect();
    for (mode, &a) in u.coefficients().iter().enumerate() {
        if a != 0.0 && !admissible.contains(&mode) {
            return Err(SynthesisError::ParityMismatch {
                degree: depth,
                mode,
            });
        }
    }
    let sup = u.sup_norm();
    if sup > 1.0 + NORM_SLACK {
        return Err(SynthesisError::NormViolation { sup });
    }
    let target_scale = if sup > 1.0 - HEADROOM {
        (1.0 - HEADROOM) / sup
    } else {
        1.0
    };
    let target = u.scaled(target_scale);

    let n = depth / 2 + 1;
    let nodes: Vec<f64> = (1..=n)
        .map(|j| (2 * j - 1) as f64 * PI / (4 * n) as f64)
        .collect();
    let values: Vec<f64> = nodes.iter().map(|&t| target.value(t)).collect();

    // (π/4, 0, ..., 0, π/4) gives Re⟨0|X|0⟩ ≡ 0 with a regular Jacobian.
    let mut reduced = vec![0.0; n];
    reduced[0] = FRAC_PI_4;
    let (mut r, mut jac) = residual_and_jacobian(&reduced, depth, &nodes, &values);
    let mut norm = r.norm();
    let mut iterations = 0;
    let inner_tol = (tolerance * 1e-3).max(1e-15);
    while r.amax() > inner_tol && iterations < max_iterations {
        iterations += 1;
        let step = match jac.clone().lu().solve(&(-&r)) {
            Some(s) => s,
            None => {
                // Levenberg-Marquardt step when the Jacobian is singular.
                let jt = jac.transpose();
                let mut normal = &jt * &jac;
                for i in 0..n {
                    normal[(i, i)] += 1e-8;
                }
                match normal.lu().solve(&(-(&jt * &r))) {
                    Some(s) => s,
                    None => break,
                }
            }
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = reduced
                .iter()
                .zip(step.iter())
                .map(|(p, s)| p + lambda * s)
                .collect();
            let (rt, jt) = residual_and_jacobian(&trial, depth, &nodes, &values);
            if rt.norm() < norm || rt.amax() <= inner_tol {
                reduced = trial;
                r = rt;
                jac = jt;
                norm = r.norm();
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let phases = z_phases_from_reduced(&reduced, depth);
    let residual = verification_residual(&phases, &target);
    let report = SynthesisReport {
        phases,
        residual,
        iterations,
        converged: residual <= tolerance,
        target_scale,
    };
    if report.converged {
        Ok(report)
    } else {
        Err(SynthesisError::NonConvergence(Box::new(report)))
    }
}

/// Builds Z-symmetric `Φ` exactly from the reduced X-convention phases.
fn z_phases_from_reduced(reduced: &[f64], depth: usize) -> PhaseFactors {
    let mut angles = full_phases(reduced, depth);
    angles[0] -= FRAC_PI_4;
    angles[depth] = angles[0] + FRAC_PI_2;
    PhaseFactors {
        convention: Convention::Z,
        angles,
    }
}

/// `max |⟨0|Q|0⟩ c̄ - u|` over the default verification grid, with the global
/// phase canonicalized as in representation extraction.
pub fn verification_residual(phases: &PhaseFactors, u: &TrigPoly) -> f64 {
    let grid = chebyshev_grid(DEFAULT_GRID);
    let diag: Vec<Complex64> = grid
        .iter()
        .map(|&t| {
            qsp_unitary(t, phases)
                .expect("grid inside [0, pi]")
                .entry(0, 0)
        })
        .collect();
    let residual_with = |c: Complex64| {
        diag.iter()
            .zip(&grid)
            .map(|(z, &t)| (z * c.conj() - u.value(t)).norm())
            .fold(0.0, f64::max)
    };
    let plus = residual_with(Complex64::new(1.0, 0.0));
    let minus = residual_with(Complex64::new(-1.0, 0.0));
    plus.min(minus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsp::measurement_probs;
    use crate::trigpoly::{chebyshev_signal, linspace};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bounded(rng: &mut impl Rng, d: usize, level: f64) -> TrigPoly {
        let k = parity_modes(d).count();
        let vals: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = TrigPoly::from_parity_coefficients(d, &vals);
        p.scaled(level / p.sup_norm())
    }

    #[test]
    fn chebyshev_target_round_trip() {
        let u = chebyshev_signal(2).scaled(1.0 - 1e-8);
        let rep = synthesize_phase_factors(&u, 1e-8, 50).unwrap();
        assert!(rep.converged && rep.residual <= 1e-8);
        assert!(rep.phases.is_z_symmetric());
        for t in linspace(0.0, PI, 64) {
            let (p00, _) = measurement_probs(t, &rep.phases).unwrap();
            assert!((p00 - u.value(t).powi(2)).abs() <= 1e-8);
        }
    }

    #[test]
    fn rejects_norm_violation() {
        let u = TrigPoly::new(3, &[(1, 0.6), (3, 0.45)]).unwrap();
        assert!(u.sup_norm() > 1.04);
        assert!(matches!(
            synthesize_phase_factors(&u, 1e-8, 50),
            Err(SynthesisError::NormViolation { .. })
        ));
    }

    #[test]
    fn random_targets_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let d = rng.random_range(1..=40);
            let level = rng.random_range(0.3..1.0);
            let u = random_bounded(&mut rng, d, level);
            let rep =
                synthesize_phase_factors(&u, 1e-9, 100).unwrap_or_else(|e| panic!("d={d}: {e}"));
            assert!(rep.residual <= 1e-9);
            assert!(rep.phases.is_z_symmetric());
        }
    }

    #[test]
    fn deterministic_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_bounded(&mut rng, 12, 0.9);
        let a = synthesize_phase_factors(&u, 1e-9, 100).unwrap();
        let b = synthesize_phase_factors(&u, 1e-9, 100).unwrap();
        assert_eq!(
            a.phases
                .angles
                .iter()
                .map(|x| x.to_bits())
                .collect::<Vec<_>>(),
            b.phases
                .angles
                .iter()
                .map(|x| x.to_bits())
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let depth = 7;
        let n = depth / 2 + 1;
        let reduced: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nodes = vec![0.3, 0.9, 1.4, 2.2];
        let targets = vec![0.0; 4];
        let (r0, jac) = residual_and_jacobian(&reduced, depth, &nodes, &targets);
        let h = 1e-6;
        for m in 0..n {
            let mut p = reduced.clone();
            p[m] += h;
            let (r1, _) = residual_and_jacobian(&p, depth, &nodes, &targets);
            for i in 0..nodes.len() {
                let fd = (r1[i] - r0[i]) / h;
                assert!((fd - jac[(i, m)]).abs() < 1e-5, "m={m} i={i}");
            }
        }
    }
}
