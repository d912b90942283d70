//! Exact Minkowski Klein-Gordon evolution of band-limited periodic data.
//!
//! Each Fourier mode evolves as φₖ(t) = Fₖ cos ωₖt + Gₖ sin ωₖt / ωₖ with
//! ωₖ = c·sqrt(k² + κ²), so the solution is exact up to rounding for data
//! represented by its grid samples.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{KgParams, KgReference, KgState};
use crate::error::{Error, Result};
use crate::fields::{Boundary, ComplexField, Grid1D};

#[derive(Clone)]
pub struct SpectralKgSolution {
    grid: Grid1D,
    t0: f64,
    phi_hat: Vec<Complex64>,
    dphi_hat: Vec<Complex64>,
    omega: Vec<f64>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralKgSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralKgSolution")
            .field("grid", &self.grid)
            .field("t0", &self.t0)
            .finish_non_exhaustive()
    }
}

fn wavenumbers(grid: &Grid1D) -> Vec<f64> {
    let n = grid.len();
    let base = 2.0 * PI / grid.length();
    (0..n)
        .map(|j| if j <= n / 2 { j as f64 } else { j as f64 - n as f64 } * base)
        .collect()
}

fn forward(grid: &Grid1D, values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(grid.len()).process(&mut buf);
    buf
}

fn require_periodic(grid: &Grid1D) -> Result<()> {
    if grid.boundary() != Boundary::Periodic {
        return Err(Error::Parameter("the spectral solution needs a periodic grid".into()));
    }
    Ok(())
}

impl SpectralKgSolution {
    /// Minkowski evolution of the Cauchy data `state` (taken at `state` time).
    pub fn new(state: &KgState, params: &KgParams) -> Result<Self> {
        let grid = state.phi.grid;
        require_periodic(&grid)?;
        let kappa2 = params.kappa().powi(2);
        let omega = wavenumbers(&grid)
            .into_iter()
            .map(|k| params.c * (k * k + kappa2).sqrt())
            .collect();
        Ok(Self {
            grid,
            t0: state.phi.time,
            phi_hat: forward(&grid, &state.phi.values),
            dphi_hat: forward(&grid, &state.dphi_dt.values),
            omega,
            inverse: FftPlanner::new().plan_fft_inverse(grid.len()),
        })
    }

    fn synthesize(&self, hat: Vec<Complex64>, t: f64) -> ComplexField {
        let mut buf = hat;
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.grid.len() as f64;
        buf.iter_mut().for_each(|z| *z *= scale);
        ComplexField {
            grid: self.grid,
            values: buf,
            time: t,
        }
    }
}

impl KgReference for SpectralKgSolution {
    fn grid(&self) -> Grid1D {
        self.grid
    }

    fn time_range(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn state_at(&self, t: f64) -> Result<KgState> {
        let tau = t - self.t0;
        let mut phi = Vec::with_capacity(self.omega.len());
        let mut dphi = Vec::with_capacity(self.omega.len());
        for ((f, g), &w) in self.phi_hat.iter().zip(&self.dphi_hat).zip(&self.omega) {
            let (s, c) = (w * tau).sin_cos();
            // sin(ωτ)/ω → τ as ω → 0
            let sinc = if w == 0.0 { tau } else { s / w };
            phi.push(f * c + g * sinc);
            dphi.push(-f * (w * s) + g * c);
        }
        Ok(KgState {
            phi: self.synthesize(phi, t),
            dphi_dt: self.synthesize(dphi, t),
        })
    }
}

/// ∂ₜφ for a purely positive-frequency Minkowski solution with data φ:
/// each mode gets −iωₖ·φₖ.
pub fn positive_frequency_derivative(phi: &ComplexField, params: &KgParams) -> Result<ComplexField> {
    let grid = phi.grid;
    require_periodic(&grid)?;
    let kappa2 = params.kappa().powi(2);
    let mut hat = forward(&grid, &phi.values);
    for (z, k) in hat.iter_mut().zip(wavenumbers(&grid)) {
        *z *= Complex64::new(0.0, -params.c * (k * k + kappa2).sqrt());
    }
    FftPlanner::new().plan_fft_inverse(grid.len()).process(&mut hat);
    let scale = 1.0 / grid.len() as f64;
    Ok(ComplexField {
        grid,
        values: hat.into_iter().map(|z| z * scale).collect(),
        time: phi.time,
    })
}
