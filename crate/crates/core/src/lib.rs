//! Fast-forward scaling of quantum dynamics.
//!
//! A reference evolution ψ(t, x) (Schrödinger) or φ(t, x) (Klein-Gordon on a
//! fixed metric background) is remapped in time through the advance function
//! Λ(t) = ∫₀ᵗ α, or in space through Λ⁽ˣ⁾(x). The crate computes the system
//! parameters that realize the remapped dynamics and integrates the resulting
//! equations numerically so the claim can be checked against the reference:
//!
//! - [`scaling`]: speed-control profiles α(u) and their advance functions.
//! - [`fields`]: grids, complex fields, trajectories, norms, remapped sampling.
//! - [`schrodinger`]: Crank-Nicolson solver, scaled mass/potential route and
//!   the additional-phase/driving-potential route.
//! - [`kleingordon`]: method-of-lines solver on a diagonal 1+1D metric, the
//!   metric and covector pullbacks, spatial scaling, and the phase-obstruction
//!   residual.
//! - [`gravity`]: Newtonian-limit potentials and the classical falling particle.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fields;
pub mod gravity;
pub mod initial;
pub mod kleingordon;
mod linalg;
pub mod scaling;
pub mod schrodinger;

pub use error::{Error, Result};
pub use fields::{
    aligned_l2_distance, convergence_order, extract_phase_gradients,
    extract_phase_gradients_centered, l2_distance, norm_squared, Boundary, ComplexField, Grid1D,
    PhaseGradients, Trajectory,
};
pub use kleingordon::{DiagonalMetric, KgParams, KgState};
pub use num_complex::Complex64;
pub use scaling::{Axis, ProfileKind, SpeedProfile};
pub use schrodinger::{Potential, SchrodingerParams};

/// Error report shared by every fast-forward and spatial-scaling run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ErrorReport {
    /// Output times of the controlled run.
    pub times: Vec<f64>,
    /// L2 distance to the remapped reference at each output time.
    pub l2: Vec<f64>,
    pub max_l2: f64,
    pub final_l2: f64,
    /// Largest |‖ψ(t)‖² − ‖ψ(0)‖²| over the run, when the equation conserves the norm.
    pub norm_drift: Option<f64>,
    /// Grid points whose phase was masked (node guard) at any step.
    pub masked_points: usize,
}

impl ErrorReport {
    pub(crate) fn from_samples(times: Vec<f64>, l2: Vec<f64>) -> Self {
        let max_l2 = l2.iter().copied().fold(0.0, f64::max);
        let final_l2 = l2.last().copied().unwrap_or(0.0);
        Self {
            times,
            l2,
            max_l2,
            final_l2,
            norm_drift: None,
            masked_points: 0,
        }
    }
}

/// A controlled run and its comparison against the remapped reference.
#[derive(Debug, Clone)]
pub struct ControlledRun {
    pub trajectory: Trajectory,
    pub report: ErrorReport,
}
