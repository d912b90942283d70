//! Uniform 1D grids, complex fields, trajectories and the verification
//! metrics shared by both solvers.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative amplitude below which the phase of a field is considered undefined.
pub const NODE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// x_max is identified with x_min; no duplicated endpoint sample.
    #[default]
    Periodic,
    /// Homogeneous Dirichlet: ghost values at x_min − dx and x_max are zero.
    FixedZero,
}

/// Uniform grid with samples at x_min + i·dx, i = 0..n_points, dx = (x_max − x_min)/n_points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    boundary: Boundary,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 8;

    pub fn new(x_min: f64, x_max: f64, n_points: usize, boundary: Boundary) -> Result<Self> {
        if n_points < Self::MIN_POINTS {
            return Err(Error::Parameter(format!(
                "grid needs at least {} points, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::Parameter(format!("grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]")));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
            boundary,
        })
    }

    pub fn periodic(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        Self::new(x_min, x_max, n_points, Boundary::Periodic)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn len(&self) -> usize {
        self.n_points
    }
    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    /// Same extent and boundary with `factor` times as many points.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.n_points * factor, self.boundary)
    }

    /// Neighbour values (left, right) of sample `i`, honouring the boundary.
    #[inline]
    pub(crate) fn neighbours<T: Copy + Default>(&self, v: &[T], i: usize) -> (T, T) {
        let n = self.n_points;
        match self.boundary {
            Boundary::Periodic => (v[(i + n - 1) % n], v[(i + 1) % n]),
            Boundary::FixedZero => (
                if i == 0 { T::default() } else { v[i - 1] },
                if i + 1 == n { T::default() } else { v[i + 1] },
            ),
        }
    }
}

/// Complex samples of a field on a grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid1D,
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl ComplexField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "field has {} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: Grid1D, time: f64) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            time,
        }
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: Grid1D, time: f64, f: F) -> Self {
        Self {
            grid,
            values: grid.points().map(f).collect(),
            time,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|z| z * factor).collect(),
            time: self.time,
        }
    }
}

fn check_same_grid(a: &ComplexField, b: &ComplexField) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Shape(format!("fields live on different grids: {:?} vs {:?}", a.grid, b.grid)));
    }
    Ok(())
}

/// sqrt(Σ|aᵢ − bᵢ|²·dx).
pub fn l2_distance(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    check_same_grid(a, b)?;
    let s: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).norm_sqr()).sum();
    Ok((s * a.grid.dx()).sqrt())
}

/// Σ|aᵢ|²·dx.
pub fn norm_squared(a: &ComplexField) -> f64 {
    a.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * a.grid.dx()
}

/// Discrete inner product ⟨a, b⟩ = Σ conj(aᵢ)·bᵢ·dx.
pub fn inner_product(a: &ComplexField, b: &ComplexField) -> Result<Complex64> {
    check_same_grid(a, b)?;
    let s: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| x.conj() * y).sum();
    Ok(s * a.grid.dx())
}

/// min over θ of ‖a − e^{iθ}b‖, the L2 distance modulo a global phase.
pub fn aligned_l2_distance(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    let overlap = inner_product(b, a)?;
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    l2_distance(a, &b.scaled(phase))
}

/// L2 distance between the moduli |a| and |b|.
pub fn modulus_l2_distance(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    check_same_grid(a, b)?;
    let s: f64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x.norm() - y.norm()).powi(2))
        .sum();
    Ok((s * a.grid.dx()).sqrt())
}

/// Least-squares slope of log(error) against log(resolution).
pub fn convergence_order(errors: &[f64], resolutions: &[f64]) -> Result<f64> {
    if errors.len() != resolutions.len() || errors.len() < 2 {
        return Err(Error::Parameter("convergence_order needs at least two (error, resolution) pairs".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::Parameter(format!("errors must be positive and finite, got {e}")));
    }
    if resolutions.windows(2).any(|w| !(w[1] < w[0])) || resolutions.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::Parameter("resolutions must be positive and strictly decreasing".into()));
    }
    let xs: Vec<f64> = resolutions.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Spatial and temporal phase gradients of a field, η = arg ψ.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGradients {
    pub grad_eta: Vec<f64>,
    pub dt_eta: Vec<f64>,
    /// Points where |ψ| < NODE_THRESHOLD·max|ψ|; both gradients are zero there.
    pub mask: Vec<bool>,
}

impl PhaseGradients {
    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    /// η reconstructed by integrating ∇η (trapezoid) from the first sample,
    /// shifted so that η equals arg ψ at the largest-amplitude sample.
    ///
    /// The additive constant of η is a gauge choice; it only moves the
    /// fast-forward state and driving potential by a global phase.
    pub fn integrate_phase(&self, psi: &ComplexField) -> Vec<f64> {
        let dx = psi.grid.dx();
        let mut eta = Vec::with_capacity(self.grad_eta.len());
        let mut acc = 0.0;
        eta.push(0.0);
        for w in self.grad_eta.windows(2) {
            acc += 0.5 * dx * (w[0] + w[1]);
            eta.push(acc);
        }
        let (peak, _) = psi
            .values
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, z)| if z.norm() > bv { (i, z.norm()) } else { (bi, bv) });
        let shift = psi.values[peak].arg() - eta[peak];
        eta.iter_mut().for_each(|e| *e += shift);
        eta
    }
}

/// Phase gradients from a field and its time derivative:
/// ∇η = Im[(∂ₓψ)/ψ] as the central difference (η_{i+1} − η_{i−1})/2dx with
/// η_{i+1} − η_{i−1} = arg(ψ_{i+1}·conj ψ_{i−1}), and ∂ₜη = Im[(∂ₜψ)/ψ].
pub fn phase_gradients(psi: &ComplexField, dpsi_dt: &ComplexField) -> Result<PhaseGradients> {
    check_same_grid(psi, dpsi_dt)?;
    let grid = psi.grid;
    let n = grid.len();
    let inv_2dx = 0.5 / grid.dx();
    let peak = psi.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = NODE_THRESHOLD * peak;
    let mut out = PhaseGradients {
        grad_eta: vec![0.0; n],
        dt_eta: vec![0.0; n],
        mask: vec![false; n],
    };
    for i in 0..n {
        let z = psi.values[i];
        if z.norm() < floor || z.norm() == 0.0 {
            out.mask[i] = true;
            continue;
        }
        let (l, r) = grid.neighbours(&psi.values, i);
        let across = r * l.conj();
        // centered difference of η itself, free of amplitude-curvature bias;
        // falls back to Im[∂ₓψ/ψ] next to a zero ghost
        out.grad_eta[i] = if across == Complex64::new(0.0, 0.0) {
            ((r - l) * inv_2dx / z).im
        } else {
            across.arg() * inv_2dx
        };
        out.dt_eta[i] = (dpsi_dt.values[i] / z).im;
    }
    Ok(out)
}

/// Forward-difference variant: ∂ₜη ≈ Im[(ψ_next − ψ)/(dt·ψ)].
pub fn extract_phase_gradients(psi: &ComplexField, psi_next: &ComplexField, dt: f64) -> Result<PhaseGradients> {
    if !(dt > 0.0) {
        return Err(Error::Parameter(format!("phase extraction needs dt > 0, got {dt}")));
    }
    check_same_grid(psi, psi_next)?;
    let values = psi.values.iter().zip(&psi_next.values).map(|(a, b)| (b - a) / dt).collect();
    phase_gradients(psi, &ComplexField::new(psi.grid, values, psi.time)?)
}

/// Centered variant from three frames spaced by `dt`.
pub fn extract_phase_gradients_centered(
    psi_prev: &ComplexField,
    psi: &ComplexField,
    psi_next: &ComplexField,
    dt: f64,
) -> Result<PhaseGradients> {
    if !(dt > 0.0) {
        return Err(Error::Parameter(format!("phase extraction needs dt > 0, got {dt}")));
    }
    check_same_grid(psi_prev, psi_next)?;
    let values = psi_prev
        .values
        .iter()
        .zip(&psi_next.values)
        .map(|(a, b)| (b - a) / (2.0 * dt))
        .collect();
    phase_gradients(psi, &ComplexField::new(psi.grid, values, psi.time)?)
}

/// Time-indexed snapshots on a shared grid, optionally with co-stored ∂ₜ snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: Grid1D,
    times: Vec<f64>,
    snapshots: Vec<Vec<Complex64>>,
    derivatives: Option<Vec<Vec<Complex64>>>,
}

/// Lagrange weights (values and first derivatives) of the nodes `ts` at `t`.
fn lagrange_weights(ts: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
    let m = ts.len();
    let mut w = vec![0.0; m];
    let mut dw = vec![0.0; m];
    for j in 0..m {
        let mut prod = 1.0;
        for i in 0..m {
            if i != j {
                prod *= (t - ts[i]) / (ts[j] - ts[i]);
            }
        }
        w[j] = prod;
        let mut d = 0.0;
        for l in 0..m {
            if l == j {
                continue;
            }
            let mut p = 1.0 / (ts[j] - ts[l]);
            for i in 0..m {
                if i != j && i != l {
                    p *= (t - ts[i]) / (ts[j] - ts[i]);
                }
            }
            d += p;
        }
        dw[j] = d;
    }
    (w, dw)
}

impl Trajectory {
    pub fn new(grid: Grid1D, with_derivatives: bool) -> Self {
        Self {
            grid,
            times: Vec::new(),
            snapshots: Vec::new(),
            derivatives: with_derivatives.then(Vec::new),
        }
    }

    /// Append a snapshot; times must increase strictly.
    pub fn push(&mut self, field: ComplexField, derivative: Option<ComplexField>) -> Result<()> {
        if field.grid != self.grid {
            return Err(Error::Shape("snapshot grid differs from trajectory grid".into()));
        }
        if let Some(&last) = self.times.last() {
            if !(field.time > last) {
                return Err(Error::Parameter(format!(
                    "trajectory times must increase strictly: {} after {last}",
                    field.time
                )));
            }
        }
        match (&mut self.derivatives, derivative) {
            (Some(ds), Some(d)) => {
                if d.grid != self.grid {
                    return Err(Error::Shape("derivative grid differs from trajectory grid".into()));
                }
                ds.push(d.values);
            }
            (None, None) => {}
            (Some(_), None) => return Err(Error::Parameter("trajectory expects a time-derivative snapshot".into())),
            (None, Some(_)) => return Err(Error::Parameter("trajectory does not store time derivatives".into())),
        }
        self.times.push(field.time);
        self.snapshots.push(field.values);
        Ok(())
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }
    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
    pub fn has_derivatives(&self) -> bool {
        self.derivatives.is_some()
    }

    pub fn time_range(&self) -> Option<(f64, f64)> {
        Some((*self.times.first()?, *self.times.last()?))
    }

    pub fn snapshot(&self, k: usize) -> ComplexField {
        ComplexField {
            grid: self.grid,
            values: self.snapshots[k].clone(),
            time: self.times[k],
        }
    }

    pub fn derivative_snapshot(&self, k: usize) -> Option<ComplexField> {
        self.derivatives.as_ref().map(|ds| ComplexField {
            grid: self.grid,
            values: ds[k].clone(),
            time: self.times[k],
        })
    }

    pub fn last(&self) -> Option<ComplexField> {
        (!self.is_empty()).then(|| self.snapshot(self.len() - 1))
    }

    /// Snapshot concatenation; `other` must start after `self` ends.
    pub fn extend(&mut self, other: &Trajectory) -> Result<()> {
        for k in 0..other.len() {
            self.push(other.snapshot(k), other.derivative_snapshot(k))?;
        }
        Ok(())
    }

    fn stencil(&self, t: f64) -> Result<std::ops::Range<usize>> {
        let (first, last) = self.time_range().ok_or(Error::Range {
            query: t,
            first: f64::NAN,
            last: f64::NAN,
        })?;
        if !(t >= first && t <= last) {
            return Err(Error::Range { query: t, first, last });
        }
        let n = self.len();
        let m = n.min(4);
        let k = self.times.partition_point(|&s| s <= t).max(1) - 1;
        let start = k.saturating_sub(1).min(n - m);
        Ok(start..start + m)
    }

    fn combine(&self, data: &[Vec<Complex64>], range: std::ops::Range<usize>, w: &[f64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (wj, j) in w.iter().zip(range) {
            for (o, v) in out.iter_mut().zip(&data[j]) {
                *o += v * wj;
            }
        }
        out
    }

    fn exact_node(&self, t: f64) -> Option<usize> {
        let k = self.times.partition_point(|&s| s < t);
        (k < self.len() && self.times[k] == t).then_some(k)
    }

    /// Field at `t` by cubic interpolation in time (pointwise in x); exact
    /// at stored times.
    pub fn sample_remapped(&self, t: f64) -> Result<ComplexField> {
        let range = self.stencil(t)?;
        if let Some(k) = self.exact_node(t) {
            return Ok(ComplexField {
                time: t,
                ..self.snapshot(k)
            });
        }
        let (w, _) = lagrange_weights(&self.times[range.clone()], t);
        Ok(ComplexField {
            grid: self.grid,
            values: self.combine(&self.snapshots, range, &w),
            time: t,
        })
    }

    /// Time derivative of the cubic interpolant of the snapshots at `t`.
    pub fn sample_remapped_dt(&self, t: f64) -> Result<ComplexField> {
        let range = self.stencil(t)?;
        let (_, dw) = lagrange_weights(&self.times[range.clone()], t);
        Ok(ComplexField {
            grid: self.grid,
            values: self.combine(&self.snapshots, range, &dw),
            time: t,
        })
    }

    /// Co-stored time derivative at `t`, cubically interpolated.
    pub fn sample_derivative(&self, t: f64) -> Result<ComplexField> {
        let ds = self
            .derivatives
            .as_ref()
            .ok_or_else(|| Error::Parameter("trajectory has no co-stored time derivatives".into()))?;
        let range = self.stencil(t)?;
        if let Some(k) = self.exact_node(t) {
            return Ok(ComplexField {
                grid: self.grid,
                values: ds[k].clone(),
                time: t,
            });
        }
        let (w, _) = lagrange_weights(&self.times[range.clone()], t);
        Ok(ComplexField {
            grid: self.grid,
            values: self.combine(ds, range, &w),
            time: t,
        })
    }

    /// CSV dump with header `t,x,re,im,abs2`, one row per (t, x) sample.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,re,im,abs2")?;
        for (t, snap) in self.times.iter().zip(&self.snapshots) {
            for (i, z) in snap.iter().enumerate() {
                writeln!(w, "{:e},{:e},{:e},{:e},{:e}", t, self.grid.x(i), z.re, z.im, z.norm_sqr())?;
            }
        }
        Ok(())
    }
}
