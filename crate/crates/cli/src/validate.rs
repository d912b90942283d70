//! Pre-run checks. Every violated precondition is reported with the path of
//! the offending field; an empty report means the scenario is runnable.

use std::fmt;

use ffscale_core::gravity::WEAK_FIELD_THRESHOLD;
use ffscale_core::initial::InitialCondition;
use ffscale_core::kleingordon::max_stable_dt;
use ffscale_core::{Axis, Boundary, DiagonalMetric, Grid1D, KgParams, SpeedProfile};
use serde::Serialize;

use crate::build;
use crate::scenario::{MetricBlock, ObstructionMetric, RunKind, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub issues: Vec<Issue>,
}

impl Report {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.issues.push(Issue {
            path: path.to_string(),
            message: message.into(),
        });
    }

    pub fn mentions(&self, path: &str) -> bool {
        self.issues.iter().any(|i| i.path == path)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Number of times at which the CFL limit is sampled over a run.
const CFL_SAMPLES: usize = 64;

pub fn validate(s: &Scenario) -> Report {
    let mut r = Report::default();
    let kind = s.run_kind;

    if let Some(tol) = s.tolerance {
        if !(tol > 0.0 && tol.is_finite()) {
            r.push("tolerance", format!("must be > 0, got {tol}"));
        }
    }
    check_time(s, &mut r);
    check_units(s, &mut r);

    let grid = if kind.needs_grid() {
        match &s.grid {
            None => {
                r.push("grid", format!("block required for run_kind {kind}"));
                None
            }
            Some(_) => match build::grid(s) {
                Ok(g) => Some(g),
                Err(e) => {
                    r.push("grid", e.to_string());
                    None
                }
            },
        }
    } else {
        None
    };

    let profile = if kind.needs_profile() {
        match &s.profile {
            None => {
                r.push("profile", format!("block required for run_kind {kind}"));
                None
            }
            Some(p) => Some(p),
        }
    } else {
        None
    };
    if let Some(p) = profile {
        check_profile(s, p, grid.as_ref(), &mut r);
    }

    if kind.needs_initial() {
        match &s.initial {
            None => r.push("initial", format!("block required for run_kind {kind}")),
            Some(ic) => check_initial(s, ic, grid.as_ref(), &mut r),
        }
    }

    if kind.is_schrodinger() {
        check_reference_block(s, &mut r);
        if build::schrodinger_params(s, grid.as_ref()).is_err() {
            r.push("potential", "cannot build the Schrödinger potential");
        }
    }
    if kind.is_kg() || kind == RunKind::NewtonianCheck {
        check_metric(s, grid.as_ref(), &mut r);
    }
    if kind.is_kg() {
        if let (Some(grid), Ok(params)) = (grid.as_ref(), build::kg_params(s)) {
            check_kg_cfl(s, grid, &params, &mut r);
        }
        if matches!(kind, RunKind::KgFfMetric | RunKind::KgObstruction) {
            check_kg_reference(s, grid.as_ref(), &mut r);
        }
    }
    match kind {
        RunKind::KgObstruction => check_obstruction(s, &mut r),
        RunKind::NewtonianCheck => check_newtonian(s, grid.as_ref(), &mut r),
        RunKind::ClassicalCheck => {
            if s.classical.is_none() {
                r.push("classical", "block required for run_kind classical_check");
            } else if let Some(c) = &s.classical {
                for (name, v) in [("x0", c.x0), ("v0", c.v0), ("g", c.g)] {
                    if !v.is_finite() {
                        r.push(&format!("classical.{name}"), format!("must be finite, got {v}"));
                    }
                }
            }
        }
        _ => {}
    }
    r
}

fn check_time(s: &Scenario, r: &mut Report) {
    let t = &s.time;
    if !(t.dt > 0.0 && t.dt.is_finite()) {
        r.push("time.dt", format!("must be > 0, got {}", t.dt));
    }
    if t.n_steps == 0 {
        r.push("time.n_steps", "must be at least 1");
    }
    if t.stride == 0 {
        r.push("time.stride", "must be at least 1");
    }
}

fn check_units(s: &Scenario, r: &mut Report) {
    let u = &s.units;
    if !(u.hbar > 0.0 && u.hbar.is_finite()) {
        r.push("units.hbar", format!("must be > 0, got {}", u.hbar));
    }
    if !(u.c > 0.0 && u.c.is_finite()) {
        r.push("units.c", format!("must be > 0, got {}", u.c));
    }
    if s.run_kind.is_schrodinger() && !(u.mass != 0.0 && u.mass.is_finite()) {
        r.push("units.mass", format!("must be finite and non-zero, got {}", u.mass));
    }
    if s.run_kind.is_kg() && !(u.mass >= 0.0 && u.mass.is_finite()) {
        r.push("units.mass", format!("must be finite and ≥ 0, got {}", u.mass));
    }
}

fn check_profile(s: &Scenario, p: &SpeedProfile, grid: Option<&Grid1D>, r: &mut Report) {
    let kind = s.run_kind;
    let want = if kind == RunKind::KgSpatialScaling { Axis::X } else { Axis::Time };
    if p.axis() != want {
        r.push("profile.axis", format!("run_kind {kind} needs a {want:?} profile, got {:?}", p.axis()));
        return;
    }
    if want == Axis::Time {
        let duration = s.duration();
        if p.length() < duration * (1.0 - 1e-9) {
            r.push(
                "profile.length",
                format!("profile covers [0, {}] but the run lasts n_steps·dt = {duration}", p.length()),
            );
        }
    } else if let Some(g) = grid {
        let (lo, hi) = p.domain();
        let last = g.x(g.len() - 1);
        if g.x_min() < lo || last > hi {
            r.push(
                "profile.length",
                format!("x profile covers [{lo}, {hi}] but grid samples span [{}, {last}]", g.x_min()),
            );
        }
    }
    let (lo, hi) = p.alpha_bounds();
    match kind {
        RunKind::SchrodingerFfScaledmass if p.crosses_zero() => r.push(
            "profile",
            format!("α reaches 0 (range [{lo}, {hi}]); the scaled mass m_α = m/α is undefined there"),
        ),
        RunKind::SchrodingerFfPotential if p.crosses_zero() => r.push(
            "profile",
            format!("α reaches 0 (range [{lo}, {hi}]); the driving potential contains (α² − 1)/α"),
        ),
        RunKind::SchrodingerFfPotential if !p.is_continuously_differentiable() => r.push(
            "profile",
            "the driving potential contains ∂ₜα; a kinked or discontinuous tabulated α is not supported",
        ),
        RunKind::KgFfMetric | RunKind::KgObstruction if p.crosses_zero() => r.push(
            "profile",
            format!("α reaches 0 (range [{lo}, {hi}]); the pulled-back g00 = α²g00 is degenerate there"),
        ),
        RunKind::KgSpatialScaling if lo <= 0.0 => {
            r.push("profile", format!("spatial factor must stay positive, minimum is {lo}"))
        }
        RunKind::NewtonianCheck | RunKind::ClassicalCheck if p.crosses_zero() => {
            r.push("profile", format!("α reaches 0 (range [{lo}, {hi}])"))
        }
        RunKind::NewtonianCheck if !p.is_constant() => r.push(
            "profile",
            "the Newtonian comparison assumes a static metric and needs a constant α",
        ),
        _ => {}
    }
}

fn check_initial(s: &Scenario, ic: &InitialCondition, grid: Option<&Grid1D>, r: &mut Report) {
    if let InitialCondition::Gaussian { width, .. } = ic {
        if !(*width > 0.0 && width.is_finite()) {
            r.push("initial.width", format!("must be > 0, got {width}"));
        }
        if s.run_kind.is_kg() && grid.is_some_and(|g| g.boundary() != Boundary::Periodic) {
            r.push(
                "initial",
                "a Klein-Gordon gaussian takes its positive-frequency ∂ₜφ from a periodic grid; set grid.boundary = \"periodic\"",
            );
        }
    }
    if s.run_kind == RunKind::KgSpatialScaling && matches!(ic, InitialCondition::Gaussian { .. }) {
        r.push(
            "initial",
            "spatial scaling compares against a closed-form reference; use plane_wave or standing_wave",
        );
    }
}

fn check_reference_block(s: &Scenario, r: &mut Report) {
    if let Some(rb) = &s.reference {
        if let Some(dt) = rb.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                r.push("reference.dt", format!("must be > 0, got {dt}"));
            }
        }
        if rb.stride == 0 {
            r.push("reference.stride", "must be at least 1");
        }
    }
}

fn check_metric(s: &Scenario, grid: Option<&Grid1D>, r: &mut Report) {
    if let Some(MetricBlock::GaussianWell { depth, center, width }) = &s.metric {
        if !(*width > 0.0 && width.is_finite()) {
            r.push("metric.width", format!("must be > 0, got {width}"));
        }
        if !(depth.is_finite() && center.is_finite()) {
            r.push("metric", "depth and center must be finite");
        }
    }
    let Some(grid) = grid else { return };
    let metric = build::base_metric(s);
    if let Some(bad) = grid.points().find_map(|x| metric.components(0.0, x).err()) {
        r.push("metric", bad.to_string());
    }
}

fn run_metric(s: &Scenario) -> Option<DiagonalMetric> {
    let base = build::base_metric(s);
    match s.run_kind {
        RunKind::KgReference => Some(base),
        RunKind::KgFfMetric => base.pullback(s.profile.as_ref()?).ok(),
        RunKind::KgObstruction => Some(base),
        RunKind::KgSpatialScaling => build::spatial_metric(s.profile.as_ref()?).ok(),
        _ => None,
    }
}

fn check_kg_cfl(s: &Scenario, grid: &Grid1D, params: &KgParams, r: &mut Report) {
    let Some(metric) = run_metric(s) else { return };
    let duration = s.duration();
    let mut limit = f64::INFINITY;
    for k in 0..=CFL_SAMPLES {
        let t = duration * k as f64 / CFL_SAMPLES as f64;
        match max_stable_dt(&metric, grid, params, t) {
            Ok(dt) => limit = limit.min(dt),
            Err(e) => {
                r.push("metric", e.to_string());
                return;
            }
        }
    }
    if s.time.dt > limit * (1.0 + 1e-12) {
        r.push(
            "time.dt",
            format!("{} violates the CFL condition; the maximal admissible dt is {limit:e}", s.time.dt),
        );
    }
}

fn check_kg_reference(s: &Scenario, grid: Option<&Grid1D>, r: &mut Report) {
    let (Some(grid), Some(profile)) = (grid, s.profile.as_ref()) else {
        return;
    };
    if build::has_spectral_reference(s) {
        return;
    }
    let (lo, hi) = profile.lambda_range();
    if lo < 0.0 {
        r.push(
            "profile",
            format!("Λ reaches {lo} < 0; a non-flat or non-periodic reference is only computed forward in time"),
        );
    }
    let resolved = s.resolved();
    let rb = resolved.reference.as_ref().expect("resolved reference");
    let dt = rb.dt.unwrap_or(s.time.dt);
    if let Ok(params) = build::kg_params(s) {
        let base = build::base_metric(s);
        if let Ok(limit) = max_stable_dt(&base, grid, &params, 0.0) {
            if dt > limit * (1.0 + 1e-12) {
                r.push(
                    "reference.dt",
                    format!("{dt} violates the CFL condition; the maximal admissible dt is {limit:e} (reference up to Λ = {hi})"),
                );
            }
        }
    }
}

fn check_obstruction(s: &Scenario, r: &mut Report) {
    let resolved = s.resolved();
    let o = resolved.obstruction.as_ref().expect("resolved obstruction");
    if o.eval_points == 0 {
        r.push("obstruction.eval_points", "must be at least 1");
    }
    if !(o.phase_t.is_finite() && o.phase_x.is_finite()) {
        r.push("obstruction", "phase coefficients must be finite");
    }
    let h = o.h.unwrap_or(s.time.dt);
    let spacing = s.duration() / (o.eval_points as f64 + 1.0);
    if !(h > 0.0 && h < spacing) {
        r.push(
            "obstruction.h",
            format!("must lie in (0, {spacing:e}) so every stencil stays inside the run, got {h}"),
        );
    }
    if o.metric == ObstructionMetric::Pullback && s.profile.as_ref().is_some_and(|p| p.crosses_zero()) {
        r.push("obstruction.metric", "the pullback is degenerate where α = 0");
    }
}

fn check_newtonian(s: &Scenario, grid: Option<&Grid1D>, r: &mut Report) {
    let (Some(grid), Some(p)) = (grid, s.profile.as_ref()) else {
        return;
    };
    if grid.len() < 3 {
        return;
    }
    let Ok(alpha) = p.alpha_at(0.0) else { return };
    let metric = build::base_metric(s);
    let deviation = grid
        .points()
        .filter_map(|x| metric.components(0.0, x).ok())
        .map(|(g00, _)| (g00 + 1.0).abs())
        .fold(0.0, f64::max);
    if deviation > WEAK_FIELD_THRESHOLD {
        r.push(
            "metric.depth",
            format!("max |g00 + 1| = {deviation} exceeds the weak-field threshold {WEAK_FIELD_THRESHOLD}"),
        );
    }
    if alpha == 0.0 {
        r.push("profile", "α = 0 makes α²g00 vanish");
    }
}
