//! Core objects built from scenario blocks.

use ffscale_core::kleingordon::{positive_frequency_derivative, spatial_metric as core_spatial_metric, PlaneWave, StandingWave, AnalyticKgReference};
use ffscale_core::initial::InitialCondition;
use ffscale_core::{
    Boundary, ComplexField, DiagonalMetric, Grid1D, KgParams, KgState, Potential, Result, SchrodingerParams,
    SpeedProfile,
};

use crate::scenario::{MetricBlock, PotentialBlock, Scenario};

pub fn grid(s: &Scenario) -> Result<Grid1D> {
    let g = s
        .grid
        .as_ref()
        .ok_or_else(|| ffscale_core::Error::Parameter("missing grid block".into()))?;
    Grid1D::new(g.x_min, g.x_max, g.n_points, g.boundary)
}

pub fn schrodinger_params(s: &Scenario, _grid: Option<&Grid1D>) -> Result<SchrodingerParams> {
    let u = &s.units;
    let potential = match s.potential.as_ref().unwrap_or(&PotentialBlock::Zero) {
        PotentialBlock::Zero => Potential::Zero,
        PotentialBlock::Harmonic { omega, center } => Potential::harmonic_trap(u.mass, *omega, *center),
    };
    SchrodingerParams::new(u.mass, u.hbar, potential)
}

pub fn kg_params(s: &Scenario) -> Result<KgParams> {
    KgParams::new(s.units.mass, s.units.c, s.units.hbar)
}

pub fn base_metric(s: &Scenario) -> DiagonalMetric {
    match s.metric.as_ref().unwrap_or(&MetricBlock::Minkowski) {
        MetricBlock::Minkowski => DiagonalMetric::minkowski(),
        &MetricBlock::GaussianWell { depth, center, width } => {
            let c2 = s.units.c * s.units.c;
            DiagonalMetric::from_static(
                move |x| -1.0 + 2.0 * depth / c2 * (-(x - center).powi(2) / (2.0 * width * width)).exp(),
                |_| 1.0,
            )
        }
    }
}

pub fn spatial_metric(profile: &SpeedProfile) -> Result<DiagonalMetric> {
    Ok(core_spatial_metric(std::slice::from_ref(profile))?.to_diagonal())
}

pub fn is_minkowski(s: &Scenario) -> bool {
    matches!(s.metric.as_ref().unwrap_or(&MetricBlock::Minkowski), MetricBlock::Minkowski)
}

/// A flat periodic background admits the exact spectral reference.
pub fn has_spectral_reference(s: &Scenario) -> bool {
    is_minkowski(s) && s.grid.as_ref().is_some_and(|g| g.boundary == Boundary::Periodic)
}

fn sampled<R: AnalyticKgReference>(reference: &R, grid: Grid1D) -> Result<KgState> {
    let (phi, dphi): (Vec<_>, Vec<_>) = grid.points().map(|x| reference.eval(0.0, x)).unzip();
    KgState::new(ComplexField::new(grid, phi, 0.0)?, ComplexField::new(grid, dphi, 0.0)?)
}

/// Klein-Gordon Cauchy data at t = 0. Gaussians get the positive-frequency
/// ∂ₜφ of the flat equation; plane and standing waves their exact one.
pub fn kg_initial_state(s: &Scenario, grid: Grid1D, params: &KgParams) -> Result<KgState> {
    match s.initial.as_ref() {
        Some(ic @ InitialCondition::Gaussian { .. }) => {
            let phi = ic.field(grid);
            let dphi = positive_frequency_derivative(&phi, params)?;
            KgState::new(phi, dphi)
        }
        Some(&InitialCondition::PlaneWave { k }) => sampled(&PlaneWave::new(k, params), grid),
        Some(&InitialCondition::StandingWave { k }) => sampled(&StandingWave::new(k, params), grid),
        None => Err(ffscale_core::Error::Parameter("missing initial block".into())),
    }
}
