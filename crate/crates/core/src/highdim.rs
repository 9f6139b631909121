// SPDX-License-Identifier: Apache-2.0

//! Measurement probabilities for a Hamiltonian given by its spectrum.
//!
//! On an eigenstate with eigenvalue `λ` the controlled evolution acts on the
//! ancilla as a single-qubit signal rotation with `θ = λ/2`, so a superposition
//! input yields the weight-averaged single-qubit probabilities.

use crate::qsp::{measurement_probs, Convention, PhaseFactors, QspError};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HighDimError {
    #[error("invalid weights: {0}")]
    Weight(String),
    #[error("eigenvalue {0} outside (0, pi/2)")]
    Eigenvalue(f64),
    #[error("depth must be at least 1")]
    Depth,
    #[error(transparent)]
    Qsp(#[from] QspError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralHamiltonian {
    pub eigenvalues: Vec<f64>,
    /// `|⟨ψ_i|ψ⟩|²` for the input state.
    pub weights: Vec<f64>,
}

impl SpectralHamiltonian {
    pub fn new(eigenvalues: Vec<f64>, weights: Vec<f64>) -> Result<Self, HighDimError> {
        let h = Self {
            eigenvalues,
            weights,
        };
        h.validate()?;
        Ok(h)
    }

    /// An eigenstate input.
    pub fn eigenstate(lambda: f64) -> Result<Self, HighDimError> {
        Self::new(vec![lambda], vec![1.0])
    }

    pub fn validate(&self) -> Result<(), HighDimError> {
        if self.eigenvalues.is_empty() || self.eigenvalues.len() != self.weights.len() {
            return Err(HighDimError::Weight(format!(
                "{} eigenvalues but {} weights",
                self.eigenvalues.len(),
                self.weights.len()
            )));
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w >= 0.0)) {
            return Err(HighDimError::Weight(format!("negative weight {w}")));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(HighDimError::Weight(format!("weights sum to {total}")));
        }
        if let Some(&l) = self
            .eigenvalues
            .iter()
            .find(|&&l| !(l > 0.0 && l < FRAC_PI_2))
        {
            return Err(HighDimError::Eigenvalue(l));
        }
        Ok(())
    }

    fn mix(
        &self,
        f: impl Fn(f64) -> Result<(f64, f64), HighDimError>,
    ) -> Result<(f64, f64), HighDimError> {
        self.validate()?;
        let mut acc = (0.0, 0.0);
        for (&l, &w) in self.eigenvalues.iter().zip(&self.weights) {
            let (a, b) = f(l)?;
            acc.0 += w * a;
            acc.1 += w * b;
        }
        Ok((acc.0.clamp(0.0, 1.0), acc.1.clamp(0.0, 1.0)))
    }
}

/// `(p_Re, p_Im) = (1/2 + Σ w cos(dλ)/2, 1/2 + Σ w sin(dλ)/2)`.
pub fn hadamard_test_probs(
    h: &SpectralHamiltonian,
    depth: usize,
) -> Result<(f64, f64), HighDimError> {
    if depth == 0 {
        return Err(HighDimError::Depth);
    }
    let d = depth as f64;
    h.mix(|l| {
        let (s, c) = (d * l).sin_cos();
        Ok((0.5 + 0.5 * c, 0.5 + 0.5 * s))
    })
}

/// `(p₀₀, p₀₊)` of the QETU circuit: spectral average of the single-qubit
/// probabilities at `θ = λ/2`.
pub fn qetu_probs(
    h: &SpectralHamiltonian,
    phases: &PhaseFactors,
) -> Result<(f64, f64), HighDimError> {
    if phases.convention != Convention::Z {
        return Err(QspError::Convention {
            expected: Convention::Z,
        }
        .into());
    }
    if !phases.is_z_symmetric() {
        return Err(QspError::Symmetry("Z").into());
    }
    h.mix(|l| Ok(measurement_probs(0.5 * l, phases)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsp::trivial_z_phases;

    #[test]
    fn near_zero_eigenvalue() {
        let h = SpectralHamiltonian::eigenstate(1e-9).unwrap();
        let (re, im) = hadamard_test_probs(&h, 5).unwrap();
        assert!((re - 1.0).abs() < 1e-12 && (im - 0.5).abs() < 1e-8);
    }

    #[test]
    fn mixture_is_convex_combination() {
        let h = SpectralHamiltonian::new(vec![0.4, 1.1], vec![0.25, 0.75]).unwrap();
        let a = hadamard_test_probs(&SpectralHamiltonian::eigenstate(0.4).unwrap(), 3).unwrap();
        let b = hadamard_test_probs(&SpectralHamiltonian::eigenstate(1.1).unwrap(), 3).unwrap();
        let (re, im) = hadamard_test_probs(&h, 3).unwrap();
        assert!((re - (0.25 * a.0 + 0.75 * b.0)).abs() < 1e-15);
        assert!((im - (0.25 * a.1 + 0.75 * b.1)).abs() < 1e-15);
        let phi = trivial_z_phases(4);
        let qa = qetu_probs(&SpectralHamiltonian::eigenstate(0.4).unwrap(), &phi).unwrap();
        let qb = qetu_probs(&SpectralHamiltonian::eigenstate(1.1).unwrap(), &phi).unwrap();
        let q = qetu_probs(&h, &phi).unwrap();
        assert!((q.0 - (0.25 * qa.0 + 0.75 * qb.0)).abs() < 1e-14);
    }

    #[test]
    fn validation() {
        assert!(matches!(
            SpectralHamiltonian::new(vec![0.3, 0.5], vec![0.5, 0.4]),
            Err(HighDimError::Weight(_))
        ));
        assert!(matches!(
            SpectralHamiltonian::new(vec![1.7], vec![1.0]),
            Err(HighDimError::Eigenvalue(_))
        ));
        let h = SpectralHamiltonian::eigenstate(0.3).unwrap();
        let x = PhaseFactors::new(Convention::X, vec![0.0; 3]).unwrap();
        assert!(matches!(
            qetu_probs(&h, &x),
            Err(HighDimError::Qsp(QspError::Convention { .. }))
        ));
        assert_eq!(hadamard_test_probs(&h, 0), Err(HighDimError::Depth));
    }
}
