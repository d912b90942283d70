//! Initial states used by the scenarios and verification runs.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fields::{ComplexField, Grid1D};

/// Normalized Gaussian packet ψ ∝ exp(−(x − x₀)²/(4σ²) + ik₀x), so that σ is
/// the standard deviation of |ψ|².
pub fn gaussian_packet(grid: Grid1D, center: f64, width: f64, momentum: f64) -> ComplexField {
    let amp = (2.0 * PI * width * width).powf(-0.25);
    ComplexField::from_fn(grid, 0.0, |x| {
        let d = x - center;
        Complex64::from_polar(amp * (-d * d / (4.0 * width * width)).exp(), momentum * x)
    })
}

/// Coherent state of the trap V = ½mω²x²: the ground state displaced to `center`
/// with mean momentum `momentum`.
pub fn coherent_state(grid: Grid1D, mass: f64, omega: f64, hbar: f64, center: f64, momentum: f64) -> ComplexField {
    let sigma = (hbar / (2.0 * mass * omega)).sqrt();
    gaussian_packet(grid, center, sigma, momentum / hbar)
}

pub fn plane_wave(grid: Grid1D, k: f64) -> ComplexField {
    ComplexField::from_fn(grid, 0.0, |x| Complex64::from_polar(1.0, k * x))
}

/// Standard deviation of |ψ|² about its mean.
pub fn position_spread(psi: &ComplexField) -> f64 {
    let w: Vec<f64> = psi.values.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = w.iter().sum();
    let xs: Vec<f64> = psi.grid.points().collect();
    let mean = xs.iter().zip(&w).map(|(x, p)| x * p).sum::<f64>() / total;
    let var = xs.iter().zip(&w).map(|(x, p)| (x - mean).powi(2) * p).sum::<f64>() / total;
    var.sqrt()
}

/// Initial-condition block of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default)]
        momentum: f64,
    },
    PlaneWave {
        k: f64,
    },
    StandingWave {
        k: f64,
    },
}

impl InitialCondition {
    /// Field at t = 0 (a standing wave is cos(kx)).
    pub fn field(&self, grid: Grid1D) -> ComplexField {
        match *self {
            InitialCondition::Gaussian { center, width, momentum } => gaussian_packet(grid, center, width, momentum),
            InitialCondition::PlaneWave { k } => plane_wave(grid, k),
            InitialCondition::StandingWave { k } => {
                ComplexField::from_fn(grid, 0.0, |x| Complex64::new((k * x).cos(), 0.0))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::norm_squared;

    #[test]
    fn packet_is_normalized_with_requested_spread() {
        let g = Grid1D::periodic(-20.0, 20.0, 2048).unwrap();
        let psi = gaussian_packet(g, 1.0, 1.5, 2.0);
        assert!((norm_squared(&psi) - 1.0).abs() < 1e-10);
        assert!((position_spread(&psi) - 1.5).abs() < 1e-8);
    }
}
