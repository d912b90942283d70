//! Refinement studies: the scenario is rerun with (dt, dx) halved per level.

use std::io::Write;

use ffscale_core::{convergence_order, l2_distance, ComplexField, Complex64, Grid1D, Trajectory};
use serde::Serialize;

use crate::run::run;
use crate::scenario::{RunKind, Scenario};
use crate::CliError;

/// Errors at or below this are treated as round-off; no order is fitted.
pub const ROUND_OFF_FLOOR: f64 = 1e-12;

pub const TABLE_FILE: &str = "convergence.csv";
pub const TABLE_SUMMARY_FILE: &str = "convergence.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub level: u32,
    /// NaN for runs without a spatial grid.
    pub dx: f64,
    pub dt: f64,
    pub error: f64,
    /// Observed order against the previous level; NaN on the first row and
    /// whenever either error sits at the round-off floor.
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub scenario: String,
    pub run_kind: Option<RunKind>,
    pub rows: Vec<Row>,
    /// Least-squares order over all levels; NaN when flagged.
    pub fitted_order: f64,
    pub order_flag: Option<&'static str>,
}

impl Table {
    fn new(scenario: &str, run_kind: Option<RunKind>) -> Self {
        Self {
            scenario: scenario.to_string(),
            run_kind,
            rows: Vec::new(),
            fitted_order: f64::NAN,
            order_flag: None,
        }
    }

    fn push(&mut self, level: u32, dx: f64, dt: f64, error: f64) {
        let order = match self.rows.last() {
            Some(prev) if prev.error > ROUND_OFF_FLOOR && error > ROUND_OFF_FLOOR => {
                (prev.error / error).ln() / (prev.dt / dt).ln()
            }
            _ => f64::NAN,
        };
        self.rows.push(Row {
            level,
            dx,
            dt,
            error,
            order,
        });
    }

    fn fit(&mut self) -> Result<(), CliError> {
        let errors: Vec<f64> = self.rows.iter().map(|r| r.error).collect();
        if errors.iter().any(|e| *e <= ROUND_OFF_FLOOR) {
            self.fitted_order = f64::NAN;
            self.order_flag = Some("round_off_floor");
            return Ok(());
        }
        let dts: Vec<f64> = self.rows.iter().map(|r| r.dt).collect();
        self.fitted_order = convergence_order(&errors, &dts)?;
        Ok(())
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        writeln!(out, "level,dx,dt,error,order").expect("write to Vec");
        for r in &self.rows {
            writeln!(out, "{},{:e},{:e},{:e},{:e}", r.level, r.dx, r.dt, r.error, r.order).expect("write to Vec");
        }
        out
    }
}

/// Samples of the fine field at the coarse grid points (nested grids).
fn restrict(fine: &ComplexField, coarse: Grid1D) -> ComplexField {
    let step = fine.grid.len() / coarse.len();
    ComplexField {
        grid: coarse,
        values: fine.values.iter().step_by(step).copied().take(coarse.len()).collect(),
        time: fine.time,
    }
}

/// Runs `levels` refinement levels. Kinds with an oracle contribute their
/// harness error; the others use the difference to the next finer level's
/// final field (one extra run). `on_row` sees the table after every row, so
/// a failure part-way leaves the completed rows behind.
pub fn converge<F>(scenario: &Scenario, levels: u32, mut on_row: F) -> Result<Table, CliError>
where
    F: FnMut(&Table) -> Result<(), CliError>,
{
    if levels < 2 {
        return Err(CliError::Usage(format!("--levels must be at least 2, got {levels}")));
    }
    let mut table = Table::new(&scenario.name, Some(scenario.run_kind));
    let mut pending: Option<(u32, f64, f64, ComplexField)> = None;
    let mut level = 0;
    while (table.rows.len() as u32) < levels {
        let s = scenario.refined(level);
        let outcome = run(&s)?;
        let dx = s.grid.as_ref().map_or(f64::NAN, |g| (g.x_max - g.x_min) / g.n_points as f64);
        if let Some(e) = outcome.summary.harness_error() {
            table.push(level, dx, s.time.dt, e);
            on_row(&table)?;
        } else {
            let fine = outcome.final_field.ok_or_else(|| {
                CliError::Usage(format!("run_kind {} has no error to converge", s.run_kind))
            })?;
            if let Some((lvl, pdx, pdt, coarse)) = pending.take() {
                let e = l2_distance(&coarse, &restrict(&fine, coarse.grid))?;
                table.push(lvl, pdx, pdt, e);
                on_row(&table)?;
            }
            pending = Some((level, dx, s.time.dt, fine));
        }
        level += 1;
    }
    table.fit()?;
    on_row(&table)?;
    Ok(table)
}

/// Remap-interpolation study on the manufactured trajectory
/// ψ(t, x) = exp(−(x − sin t)²)·e^{i·t²/2}: snapshots every h = h₀/2^level,
/// sampled halfway between nodes and compared with the exact field.
pub fn interpolation_study(levels: u32) -> Result<Table, CliError> {
    let grid = Grid1D::periodic(-5.0, 5.0, 64)?;
    let exact = |t: f64| {
        ComplexField::from_fn(grid, t, |x| {
            Complex64::from_polar((-(x - t.sin()).powi(2)).exp(), 0.5 * t * t)
        })
    };
    let mut table = Table::new("manufactured interpolation", None);
    let (t_end, h0) = (2.0, 0.1);
    for level in 0..levels {
        let h = h0 / f64::from(1u32 << level);
        let n = (t_end / h).round() as usize;
        let mut traj = Trajectory::new(grid, false);
        for k in 0..=n {
            traj.push(exact(k as f64 * h), None)?;
        }
        let mut worst = 0.0f64;
        for k in 0..n {
            let t = (k as f64 + 0.5) * h;
            worst = worst.max(l2_distance(&traj.sample_remapped(t)?, &exact(t))?);
        }
        table.push(level, grid.dx(), h, worst);
    }
    table.fit()?;
    Ok(table)
}
