// SPDX-License-Identifier: Apache-2.0

//! Heisenberg-limited phase estimation with designed QSP signals.
//!
//! The pipeline: [`design`] picks a squared trigonometric polynomial that is
//! steep and monotone over a prior interval, [`synthesis`] finds phase factors
//! realizing it, [`estimator`] runs the multi-stage protocol on simulated
//! measurements, and [`experiments`] sweeps parameters for benchmarking.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` rejects NaN on purpose

pub mod design;
pub mod estimator;
pub mod exec;
pub mod experiments;
pub mod highdim;
pub mod lp;
pub mod qsp;
pub mod synthesis;
pub mod trigpoly;

pub use design::{design_signal, DesignRequest, DesignResult, PriorInterval};
pub use estimator::{build_schedule, run_qsp_pe, run_rpe, EstimatorConfig, Method, Schedule};
pub use exec::Execution;
pub use qsp::{qsp_unitary, Convention, PhaseFactors};
pub use synthesis::synthesize_phase_factors;
pub use trigpoly::TrigPoly;
