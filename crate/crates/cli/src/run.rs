//! Executes a validated scenario and assembles its summary and artifacts.

use std::collections::BTreeMap;
use std::time::Instant;

use ffscale_core::gravity::{
    classical_chain_rule_residual, classical_evolve_with, ff_newton_check, scaled_gravity, verify_classical,
    write_classical_csv, write_newton_csv, ClassicalState, NewtonianField,
};
use ffscale_core::kleingordon::{
    kg_energy, kg_evolve, phase_obstruction_residual, run_ff_kg, run_ss_kg, KgReference, PlaneWave,
    SpectralKgSolution, StandingWave,
};
use ffscale_core::initial::InitialCondition;
use ffscale_core::schrodinger::{
    evolve_schrodinger, reference_trajectory, run_ff_schrodinger_potential, run_ff_schrodinger_scaledmass,
};
use ffscale_core::{
    l2_distance, norm_squared, Axis, ComplexField, ControlledRun, DiagonalMetric, Grid1D, KgParams, KgState,
    SpeedProfile, Trajectory,
};
use serde::Serialize;

use crate::build;
use crate::scenario::{Format, ObstructionMetric, RunKind, Scenario};
use crate::validate::validate;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Norms {
    pub initial: f64,
    #[serde(rename = "final")]
    pub last: f64,
    /// Largest |‖ψ(t)‖² − ‖ψ(0)‖²| over the stored snapshots.
    pub max_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub run_kind: RunKind,
    /// The construction the run realizes.
    pub route: &'static str,
    pub max_l2: Option<f64>,
    pub final_l2: Option<f64>,
    pub norms: Option<Norms>,
    /// max |E(t) − E(0)| / (E(0)·T), static metrics only.
    pub energy_drift: Option<f64>,
    pub residuals: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub tolerance: Option<f64>,
    pub within_tolerance: Option<bool>,
    /// Seconds; the only non-deterministic field.
    pub wall_time: f64,
}

impl Summary {
    fn new(s: &Scenario, route: &'static str) -> Self {
        Self {
            scenario: s.name.clone(),
            run_kind: s.run_kind,
            route,
            max_l2: None,
            final_l2: None,
            norms: None,
            energy_drift: None,
            residuals: BTreeMap::new(),
            warnings: Vec::new(),
            tolerance: s.tolerance,
            within_tolerance: None,
            wall_time: 0.0,
        }
    }

    fn with_report(&mut self, run: &ControlledRun) {
        self.max_l2 = Some(run.report.max_l2);
        self.final_l2 = Some(run.report.final_l2);
        if let Some(d) = run.report.norm_drift {
            self.residuals.insert("norm_drift".into(), d);
        }
        if run.report.masked_points > 0 {
            self.residuals.insert("masked_points".into(), run.report.masked_points as f64);
        }
    }

    /// The number compared against the tolerance and collected by `converge`.
    pub fn harness_error(&self) -> Option<f64> {
        if let Some(e) = self.max_l2 {
            return Some(e);
        }
        match self.run_kind {
            RunKind::ClassicalCheck => self.residuals.get("max_abs_error").copied(),
            RunKind::NewtonianCheck => self.residuals.get("max_abs_diff").copied(),
            RunKind::KgObstruction => {
                let re = self.residuals.get("residual_real")?;
                let im = self.residuals.get("residual_imag")?;
                Some(re.max(*im))
            }
            _ => None,
        }
    }
}

/// A named file produced by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: &'static str,
    pub contents: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    pub artifacts: Vec<Artifact>,
    /// Last stored field, used for self-convergence when no oracle exists.
    pub final_field: Option<ComplexField>,
}

pub const ROUTE_SCHRODINGER: &str = "reference: iħ∂ₜψ = −(ħ²/2m)∂ₓ²ψ + Vψ, Crank-Nicolson";
pub const ROUTE_DRIVING: &str =
    "driving potential: mass m, V_FF = V(Λ) − ħα̇η − ħ((α² − 1)/α)∂ₜη − (ħ²/2m)(α² − 1)(∂ₓη)², ψ_FF = e^{i(α−1)η}ψ(Λ(t), x)";
pub const ROUTE_SCALED: &str = "scaled mass: m_α = m/α(t), V_α = α(t)·V(Λ(t), x), ψ_α = ψ(Λ(t), x)";
pub const ROUTE_KG: &str = "reference: Klein-Gordon on diag[g00(x), gxx(x)], RK4 method of lines";
pub const ROUTE_KG_FF: &str = "metric pullback: g_FF = diag[α²(t)·g00(Λ(t), x), gxx(Λ(t), x)], φ_FF = φ(Λ(t), x)";
pub const ROUTE_KG_SS: &str = "spatial scaling: g_SS = diag[−1, α⁽ˣ⁾(x)²], φ_SS = φ(t, Λ⁽ˣ⁾(x))";
pub const ROUTE_OBSTRUCTION: &str = "phase substitution: e^{if}·φ(Λ(t), x) inserted into the Klein-Gordon operator";
pub const ROUTE_NEWTON: &str = "Newtonian limit: φ = −(c²/2)(g00 + 1), ∂φ_FF = α²∂φ";
pub const ROUTE_CLASSICAL: &str = "classical scaling: g_α = α²g, x_α(t) = x(Λ(t))";

fn csv<F>(write: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(buf)
}

fn trajectory_csv(traj: &Trajectory) -> Result<Artifact, CliError> {
    Ok(Artifact {
        name: "trajectory.csv",
        contents: csv(|w| traj.write_csv(w))?,
    })
}

fn metric_csv(metric: &DiagonalMetric, grid: &Grid1D, times: &[f64]) -> Result<Artifact, CliError> {
    Ok(Artifact {
        name: "metric.csv",
        contents: csv(|w| metric.write_csv(grid, times, w))?,
    })
}

fn norms(traj: &Trajectory) -> Norms {
    let values: Vec<f64> = (0..traj.len()).map(|k| norm_squared(&traj.snapshot(k))).collect();
    let initial = values.first().copied().unwrap_or(0.0);
    Norms {
        initial,
        last: values.last().copied().unwrap_or(0.0),
        max_drift: values.iter().map(|n| (n - initial).abs()).fold(0.0, f64::max),
    }
}

fn energy_drift(traj: &Trajectory, metric: &DiagonalMetric, params: &KgParams) -> Result<Option<f64>, CliError> {
    if !metric.is_static() || traj.len() < 2 {
        return Ok(None);
    }
    let energy = |k: usize| -> Result<f64, CliError> {
        let state = KgState {
            phi: traj.snapshot(k),
            dphi_dt: traj.derivative_snapshot(k).expect("Klein-Gordon trajectories store ∂ₜφ"),
        };
        Ok(kg_energy(&state, metric, params)?)
    };
    let e0 = energy(0)?;
    let span = traj.times()[traj.len() - 1] - traj.times()[0];
    let mut worst = 0.0f64;
    for k in 1..traj.len() {
        worst = worst.max((energy(k)? - e0).abs());
    }
    Ok(Some(worst / (e0.abs() * span)))
}

/// Validates, then runs the scenario. Nothing is written to disk.
pub fn run(s: &Scenario) -> Result<Outcome, CliError> {
    let report = validate(s);
    if !report.is_empty() {
        return Err(CliError::Validation(report));
    }
    let s = s.resolved();
    let start = Instant::now();
    let mut outcome = match s.run_kind {
        RunKind::SchrodingerReference => schrodinger_reference(&s)?,
        RunKind::SchrodingerFfPotential | RunKind::SchrodingerFfScaledmass => schrodinger_ff(&s)?,
        RunKind::KgReference => kg_reference(&s)?,
        RunKind::KgFfMetric => kg_ff(&s)?,
        RunKind::KgSpatialScaling => kg_spatial(&s)?,
        RunKind::KgObstruction => kg_obstruction(&s)?,
        RunKind::NewtonianCheck => newtonian(&s)?,
        RunKind::ClassicalCheck => classical(&s)?,
    };
    let summary = &mut outcome.summary;
    summary.wall_time = start.elapsed().as_secs_f64();
    if let (Some(tol), Some(err)) = (summary.tolerance, summary.harness_error()) {
        summary.within_tolerance = Some(err <= tol);
    }
    if !s.writes(Format::Csv) {
        outcome.artifacts.clear();
    }
    Ok(outcome)
}

fn profile(s: &Scenario) -> &SpeedProfile {
    s.profile.as_ref().expect("validated profile")
}

fn schrodinger_reference(s: &Scenario) -> Result<Outcome, CliError> {
    let grid = build::grid(s)?;
    let params = build::schrodinger_params(s, Some(&grid))?;
    let psi0 = s.initial.as_ref().expect("validated initial").field(grid);
    let traj = evolve_schrodinger(&psi0, &params, s.time.dt, s.time.n_steps, s.time.stride)?;
    let mut summary = Summary::new(s, ROUTE_SCHRODINGER);
    summary.norms = Some(norms(&traj));
    Ok(Outcome {
        summary,
        artifacts: vec![trajectory_csv(&traj)?],
        final_field: traj.last(),
    })
}

fn schrodinger_ff(s: &Scenario) -> Result<Outcome, CliError> {
    let grid = build::grid(s)?;
    let params = build::schrodinger_params(s, Some(&grid))?;
    let psi0 = s.initial.as_ref().expect("validated initial").field(grid);
    let profile = profile(s);
    let rb = s.reference.as_ref().expect("resolved reference");
    let (lo, hi) = profile.lambda_range();
    let reference = reference_trajectory(
        &psi0,
        &params,
        rb.dt.unwrap_or(s.time.dt),
        rb.stride,
        lo.min(0.0),
        hi.max(0.0),
    )?;
    let t = &s.time;
    let (controlled, route) = if s.run_kind == RunKind::SchrodingerFfPotential {
        (
            run_ff_schrodinger_potential(&reference, profile, &params, t.dt, t.n_steps, t.stride)?,
            ROUTE_DRIVING,
        )
    } else {
        (
            run_ff_schrodinger_scaledmass(&reference, profile, &params, t.dt, t.n_steps, t.stride)?,
            ROUTE_SCALED,
        )
    };
    let mut summary = Summary::new(s, route);
    summary.with_report(&controlled);
    summary.norms = Some(norms(&controlled.trajectory));
    Ok(Outcome {
        summary,
        artifacts: vec![trajectory_csv(&controlled.trajectory)?],
        final_field: controlled.trajectory.last(),
    })
}

/// Reference for the time-remapped Klein-Gordon runs: exact on a flat
/// periodic background, otherwise integrated forward up to max Λ.
fn kg_time_reference(s: &Scenario, grid: Grid1D, params: &KgParams) -> Result<Box<dyn KgReference>, CliError> {
    let state0 = build::kg_initial_state(s, grid, params)?;
    if build::has_spectral_reference(s) {
        return Ok(Box::new(SpectralKgSolution::new(&state0, params)?));
    }
    let rb = s.reference.as_ref().expect("resolved reference");
    let dt = rb.dt.unwrap_or(s.time.dt);
    let (_, hi) = profile(s).lambda_range();
    let blocks = (hi / (dt * rb.stride as f64) - 1e-9).ceil().max(1.0) as usize;
    let traj = kg_evolve(&state0, &build::base_metric(s), params, dt, blocks * rb.stride, rb.stride)?;
    Ok(Box::new(traj))
}

fn kg_reference(s: &Scenario) -> Result<Outcome, CliError> {
    let grid = build::grid(s)?;
    let params = build::kg_params(s)?;
    let metric = build::base_metric(s);
    let state0 = build::kg_initial_state(s, grid, &params)?;
    let traj = kg_evolve(&state0, &metric, &params, s.time.dt, s.time.n_steps, s.time.stride)?;
    let mut summary = Summary::new(s, ROUTE_KG);
    summary.energy_drift = energy_drift(&traj, &metric, &params)?;
    if build::has_spectral_reference(s) {
        let exact = SpectralKgSolution::new(&state0, &params)?;
        let mut l2 = Vec::with_capacity(traj.len());
        for k in 0..traj.len() {
            let got = traj.snapshot(k);
            l2.push(l2_distance(&got, &exact.state_at(got.time)?.phi)?);
        }
        summary.max_l2 = Some(l2.iter().copied().fold(0.0, f64::max));
        summary.final_l2 = l2.last().copied();
    }
    let mut artifacts = vec![trajectory_csv(&traj)?];
    artifacts.push(metric_csv(&metric, &grid, traj.times())?);
    Ok(Outcome {
        summary,
        artifacts,
        final_field: traj.last(),
    })
}

fn kg_ff(s: &Scenario) -> Result<Outcome, CliError> {
    let grid = build::grid(s)?;
    let params = build::kg_params(s)?;
    let base = build::base_metric(s);
    let reference = kg_time_reference(s, grid, &params)?;
    let profile = profile(s);
    let t = &s.time;
    let run = run_ff_kg(reference.as_ref(), &base, profile, &params, t.dt, t.n_steps, t.stride)?;
    let metric = base.pullback(profile)?;
    let mut summary = Summary::new(s, ROUTE_KG_FF);
    summary.with_report(&run);
    summary.energy_drift = energy_drift(&run.trajectory, &metric, &params)?;
    Ok(Outcome {
        artifacts: vec![
            trajectory_csv(&run.trajectory)?,
            metric_csv(&metric, &grid, run.trajectory.times())?,
        ],
        summary,
        final_field: run.trajectory.last(),
    })
}

fn kg_spatial(s: &Scenario) -> Result<Outcome, CliError> {
    let grid = build::grid(s)?;
    let params = build::kg_params(s)?;
    let profile = profile(s);
    let t = &s.time;
    let run = match s.initial.as_ref().expect("validated initial") {
        &InitialCondition::StandingWave { k } => {
            run_ss_kg(&StandingWave::new(k, &params), grid, profile, &params, t.dt, t.n_steps, t.stride)?
        }
        &InitialCondition::PlaneWave { k } => {
            run_ss_kg(&PlaneWave::new(k, &params), grid, profile, &params, t.dt, t.n_steps, t.stride)?
        }
        InitialCondition::Gaussian { .. } => unreachable!("rejected by validation"),
    };
    let metric = build::spatial_metric(profile)?;
    let mut summary = Summary::new(s, ROUTE_KG_SS);
    summary.with_report(&run);
    summary.energy_drift = energy_drift(&run.trajectory, &metric, &params)?;
    Ok(Outcome {
        artifacts: vec![
            trajectory_csv(&run.trajectory)?,
            metric_csv(&metric, &grid, run.trajectory.times())?,
        ],
        summary,
        final_field: run.trajectory.last(),
    })
}

fn kg_obstruction(s: &Scenario) -> Result<Outcome, CliError> {
    let grid = build::grid(s)?;
    let params = build::kg_params(s)?;
    let base = build::base_metric(s);
    let reference = kg_time_reference(s, grid, &params)?;
    let profile = profile(s);
    let o = s.obstruction.as_ref().expect("resolved obstruction");
    let h = o.h.unwrap_or(s.time.dt);
    let duration = s.duration();
    let times: Vec<f64> = (1..=o.eval_points)
        .map(|j| duration * j as f64 / (o.eval_points as f64 + 1.0))
        .collect();
    let metric = match o.metric {
        ObstructionMetric::Original => base.clone(),
        ObstructionMetric::Pullback => base.pullback(profile)?,
    };
    let (phase_t, phase_x) = (o.phase_t, o.phase_x);
    let (re, im) = phase_obstruction_residual(
        reference.as_ref(),
        &metric,
        &params,
        move |t, x| phase_t * t + phase_x * x,
        profile,
        &times,
        h,
    )?;
    let identity = SpeedProfile::constant(1.0, Axis::Time, profile.length())?;
    let (base_re, base_im) =
        phase_obstruction_residual(reference.as_ref(), &base, &params, |_, _| 0.0, &identity, &times, h)?;
    let baseline = base_re.max(base_im);
    let mut summary = Summary::new(s, ROUTE_OBSTRUCTION);
    summary.residuals.insert("residual_real".into(), re);
    summary.residuals.insert("residual_imag".into(), im);
    summary.residuals.insert("baseline_real".into(), base_re);
    summary.residuals.insert("baseline_imag".into(), base_im);
    summary.residuals.insert("ratio_to_baseline".into(), re.max(im) / baseline);
    Ok(Outcome {
        artifacts: vec![metric_csv(&metric, &grid, &times)?],
        summary,
        final_field: None,
    })
}

fn newtonian(s: &Scenario) -> Result<Outcome, CliError> {
    let grid = build::grid(s)?;
    let metric = build::base_metric(s);
    let g00 = grid
        .points()
        .map(|x| metric.components(0.0, x).map(|c| c.0))
        .collect::<Result<Vec<f64>, _>>()?;
    let alpha = profile(s).alpha_at(0.0)?;
    let check = ff_newton_check(&g00, alpha, s.units.c, grid.dx())?;
    let field = NewtonianField::new(grid, g00, s.units.c, 0)?;
    let mut summary = Summary::new(s, ROUTE_NEWTON);
    summary.residuals.insert("max_abs_diff".into(), check.max_abs_diff);
    if check.weak_field_warning {
        summary
            .warnings
            .push("α²g00 leaves the weak-field regime; the gradient identity is still checked".into());
    }
    Ok(Outcome {
        artifacts: vec![Artifact {
            name: "newton.csv",
            contents: csv(|w| write_newton_csv(&field, &check, w))?,
        }],
        summary,
        final_field: None,
    })
}

fn classical(s: &Scenario) -> Result<Outcome, CliError> {
    let c = s.classical.as_ref().expect("validated classical block");
    let profile = profile(s);
    let (dt, n) = (s.time.dt, s.time.n_steps);
    let alpha0 = profile.alpha_at(0.0)?;
    let g = c.g;
    let states = classical_evolve_with(
        ClassicalState {
            t: 0.0,
            x: c.x0,
            v: alpha0 * c.v0,
        },
        |t| -scaled_gravity(g, profile.alpha_at(t).unwrap_or(alpha0)),
        dt,
        n,
    )?;
    let mut max_abs_error = 0.0f64;
    let mut chain_rule = 0.0f64;
    for st in &states {
        let lam = profile.lambda_at(st.t)?;
        let exact = c.x0 + c.v0 * lam - 0.5 * g * lam * lam;
        max_abs_error = max_abs_error.max((st.x - exact).abs());
        chain_rule = chain_rule.max(classical_chain_rule_residual(profile, c.v0, g, st.t)?.abs());
    }
    let mut summary = Summary::new(s, ROUTE_CLASSICAL);
    summary.residuals.insert("max_abs_error".into(), max_abs_error);
    summary.residuals.insert("chain_rule_residual".into(), chain_rule);
    if profile.is_constant() {
        let numeric = verify_classical(c.x0, c.v0, g, alpha0, s.duration(), dt)?;
        summary.residuals.insert("numeric_reference_error".into(), numeric);
    } else {
        summary.warnings.push(
            "time-dependent α: the law g_α = α²g omits the α̇·ẋ(Λ) term; see chain_rule_residual".into(),
        );
    }
    Ok(Outcome {
        artifacts: vec![Artifact {
            name: "classical.csv",
            contents: csv(|w| write_classical_csv(&states, w))?,
        }],
        summary,
        final_field: None,
    })
}
