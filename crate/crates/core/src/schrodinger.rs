//! Non-relativistic reference solver and the speed-controlled Schrödinger
//! constructions:
//!
//! - scaled route: mass m/α(t) and potential α(t)·V reproduce ψ(Λ(t), x);
//! - driving route: with unmodified mass, the potential V_FF drives
//!   ψ_FF = e^{i(α−1)η}·ψ(Λ(t), x), η being the phase of the reference.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{aligned_l2_distance, l2_distance, norm_squared, phase_gradients, Boundary, ComplexField, Grid1D, Trajectory};
use crate::linalg::{solve_cyclic_tridiagonal, solve_tridiagonal, CyclicWork};
use crate::scaling::SpeedProfile;
use crate::{ControlledRun, ErrorReport};

type PotentialFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Real potential V(t, x).
#[derive(Clone)]
pub enum Potential {
    Zero,
    /// ½·stiffness·(x − center)².
    Harmonic { stiffness: f64, center: f64 },
    /// Static samples on the run grid.
    Tabulated(Arc<Vec<f64>>),
    Function(Arc<PotentialFn>),
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => write!(f, "Zero"),
            Potential::Harmonic { stiffness, center } => {
                write!(f, "Harmonic {{ stiffness: {stiffness}, center: {center} }}")
            }
            Potential::Tabulated(v) => write!(f, "Tabulated({} samples)", v.len()),
            Potential::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl Potential {
    /// Trap ½mω²(x − center)².
    pub fn harmonic_trap(mass: f64, omega: f64, center: f64) -> Self {
        Potential::Harmonic {
            stiffness: mass * omega * omega,
            center,
        }
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Potential::Function(Arc::new(f))
    }

    pub fn is_static(&self) -> bool {
        !matches!(self, Potential::Function(_))
    }

    /// V at grid sample `i` (position `x`) and time `t`.
    #[inline]
    fn value(&self, t: f64, x: f64, i: usize) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Harmonic { stiffness, center } => 0.5 * stiffness * (x - center).powi(2),
            Potential::Tabulated(v) => v[i],
            Potential::Function(f) => f(t, x),
        }
    }

    /// Samples of V(t, ·) on `grid` written into `out`.
    pub fn fill(&self, grid: &Grid1D, t: f64, out: &mut [f64]) -> Result<()> {
        if let Potential::Tabulated(v) = self {
            if v.len() != grid.len() {
                return Err(Error::Shape(format!(
                    "tabulated potential has {} samples for a grid of {} points",
                    v.len(),
                    grid.len()
                )));
            }
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.value(t, grid.x(i), i);
        }
        Ok(())
    }

    /// Pointwise multiple c·V.
    pub fn scaled(&self, c: f64) -> Potential {
        match self {
            Potential::Zero => Potential::Zero,
            Potential::Harmonic { stiffness, center } => Potential::Harmonic {
                stiffness: c * stiffness,
                center: *center,
            },
            Potential::Tabulated(v) => Potential::Tabulated(Arc::new(v.iter().map(|x| c * x).collect())),
            Potential::Function(f) => {
                let f = Arc::clone(f);
                Potential::from_fn(move |t, x| c * f(t, x))
            }
        }
    }

    /// V(−t, x), the potential seen by the time-reversed evolution.
    fn time_reversed(&self) -> Potential {
        match self {
            Potential::Function(f) => {
                let f = Arc::clone(f);
                Potential::from_fn(move |t, x| f(-t, x))
            }
            other => other.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchrodingerParams {
    /// Signed, non-zero.
    pub mass: f64,
    pub hbar: f64,
    pub potential: Potential,
}

impl SchrodingerParams {
    pub fn new(mass: f64, hbar: f64, potential: Potential) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Parameter(format!("hbar must be > 0, got {hbar}")));
        }
        if mass == 0.0 || !mass.is_finite() {
            return Err(Error::Parameter(format!("mass must be non-zero and finite, got {mass}")));
        }
        Ok(Self { mass, hbar, potential })
    }
}

/// Implicit-midpoint (Crank-Nicolson) stepper for iħ∂ₜψ = (−ħ²/2m)∂ₓₓψ + Vψ.
#[derive(Debug, Clone)]
pub(crate) struct CrankNicolson {
    grid: Grid1D,
    diag: Vec<Complex64>,
    rhs: Vec<Complex64>,
    scratch: Vec<Complex64>,
    work: CyclicWork,
}

impl CrankNicolson {
    pub(crate) fn new(grid: Grid1D) -> Self {
        let n = grid.len();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            grid,
            diag: vec![zero; n],
            rhs: vec![zero; n],
            scratch: vec![zero; n],
            work: CyclicWork::new(n),
        }
    }

    /// One step of length `dt` with the Hamiltonian frozen at (mass, potential).
    pub(crate) fn step(&mut self, psi: &mut [Complex64], mass: f64, hbar: f64, potential: &[f64], dt: f64) -> bool {
        let dx = self.grid.dx();
        let kinetic = hbar * hbar / (2.0 * mass * dx * dx);
        let tau = Complex64::new(0.0, dt / (2.0 * hbar));
        let off = -tau * kinetic;
        for i in 0..psi.len() {
            let (l, r) = self.grid.neighbours(psi, i);
            let h_psi = kinetic * (2.0 * psi[i] - l - r) + potential[i] * psi[i];
            self.rhs[i] = psi[i] - tau * h_psi;
            self.diag[i] = 1.0 + tau * (2.0 * kinetic + potential[i]);
        }
        let ok = match self.grid.boundary() {
            Boundary::Periodic => solve_cyclic_tridiagonal(off, &self.diag, &mut self.rhs, &mut self.work),
            Boundary::FixedZero => solve_tridiagonal(off, &self.diag, &mut self.rhs, &mut self.scratch),
        };
        psi.copy_from_slice(&self.rhs);
        ok && psi.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn check_steps(dt: f64, stride: usize) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("dt must be > 0, got {dt}")));
    }
    if stride == 0 {
        return Err(Error::Parameter("stride must be at least 1".into()));
    }
    Ok(())
}

fn is_output_step(k: usize, n_steps: usize, stride: usize) -> bool {
    k.is_multiple_of(stride) || k == n_steps
}

/// Drives a Crank-Nicolson run. `hamiltonian(step, t_mid, potential)` fills
/// the midpoint potential and returns the midpoint mass; `observe` sees
/// every output snapshot.
fn propagate<H, O>(
    psi0: &ComplexField,
    hbar: f64,
    dt: f64,
    n_steps: usize,
    stride: usize,
    mut hamiltonian: H,
    mut observe: O,
) -> Result<Trajectory>
where
    H: FnMut(usize, f64, &mut [f64]) -> Result<f64>,
    O: FnMut(&ComplexField) -> Result<()>,
{
    check_steps(dt, stride)?;
    if !psi0.is_finite() {
        return Err(Error::Parameter("initial state contains non-finite values".into()));
    }
    let grid = psi0.grid;
    let t0 = psi0.time;
    let mut stepper = CrankNicolson::new(grid);
    let mut potential = vec![0.0; grid.len()];
    let mut psi = psi0.values.clone();
    let mut traj = Trajectory::new(grid, false);
    observe(psi0)?;
    traj.push(psi0.clone(), None)?;
    for k in 0..n_steps {
        let t_mid = t0 + (k as f64 + 0.5) * dt;
        let mass = hamiltonian(k, t_mid, &mut potential)?;
        if !stepper.step(&mut psi, mass, hbar, &potential, dt) {
            return Err(Error::Instability {
                step: k + 1,
                reason: "non-finite wave function or singular Crank-Nicolson system".into(),
            });
        }
        if is_output_step(k + 1, n_steps, stride) {
            let snap = ComplexField::new(grid, psi.clone(), t0 + (k + 1) as f64 * dt)?;
            observe(&snap)?;
            traj.push(snap, None)?;
        }
    }
    Ok(traj)
}

/// Advances the reference Schrödinger equation from ψ₀ (at time ψ₀.time),
/// storing a snapshot every `stride` steps and after the last step.
pub fn evolve_schrodinger(
    psi0: &ComplexField,
    params: &SchrodingerParams,
    dt: f64,
    n_steps: usize,
    stride: usize,
) -> Result<Trajectory> {
    let grid = psi0.grid;
    propagate(
        psi0,
        params.hbar,
        dt,
        n_steps,
        stride,
        |_, t, pot| {
            params.potential.fill(&grid, t, pot)?;
            Ok(params.mass)
        },
        |_| Ok(()),
    )
}

/// Reference trajectory starting at t = 0 and covering `[t_lo, t_hi]`
/// (t_lo ≤ 0 ≤ t_hi). Negative times come from the time-reversed evolution
/// ψ(−s) = conj(U_rev(s)·conj ψ₀), valid for real potentials.
pub fn reference_trajectory(
    psi0: &ComplexField,
    params: &SchrodingerParams,
    dt: f64,
    stride: usize,
    t_lo: f64,
    t_hi: f64,
) -> Result<Trajectory> {
    check_steps(dt, stride)?;
    if !(t_lo <= 0.0 && t_hi >= 0.0) {
        return Err(Error::Parameter(format!("reference range [{t_lo}, {t_hi}] must contain 0")));
    }
    let psi0 = ComplexField { time: 0.0, ..psi0.clone() };
    let steps_for = |span: f64| -> usize {
        let blocks = (span / (dt * stride as f64) - 1e-9).ceil().max(0.0) as usize;
        blocks * stride
    };
    let forward = evolve_schrodinger(&psi0, params, dt, steps_for(t_hi).max(stride), stride)?;
    if t_lo == 0.0 {
        return Ok(forward);
    }
    let reversed_params = SchrodingerParams {
        potential: params.potential.time_reversed(),
        ..params.clone()
    };
    let conj0 = ComplexField {
        values: psi0.values.iter().map(|z| z.conj()).collect(),
        ..psi0.clone()
    };
    let backward = evolve_schrodinger(&conj0, &reversed_params, dt, steps_for(-t_lo), stride)?;
    let mut traj = Trajectory::new(psi0.grid, false);
    for k in (1..backward.len()).rev() {
        let s = backward.snapshot(k);
        traj.push(
            ComplexField {
                values: s.values.iter().map(|z| z.conj()).collect(),
                time: -s.time,
                grid: s.grid,
            },
            None,
        )?;
    }
    traj.extend(&forward)?;
    Ok(traj)
}

/// m_α = m/α and V_α = α·V for an instantaneous speed factor α.
pub fn scaled_mass_potential(mass: f64, potential: &Potential, alpha: f64) -> Result<(f64, Potential)> {
    if alpha == 0.0 {
        return Err(Error::ZeroSpeed("the scaled mass m_α = m/α is undefined at α = 0"));
    }
    Ok((mass / alpha, potential.scaled(alpha)))
}

/// f = (α − 1)·η.
pub fn additional_phase(alpha: f64, eta: f64) -> f64 {
    (alpha - 1.0) * eta
}

/// V_FF = V(Λ) − ħ(∂ₜα)η − ħ((α² − 1)/α)∂ₜη − (ħ²/2m)(α² − 1)(∂ₓη)²,
/// with η and ∂ₓη taken at (Λ(t), x). `dt_eta` is the time derivative of
/// t ↦ η(Λ(t), x), i.e. α(t) times the reference-time derivative at Λ(t).
#[allow(clippy::too_many_arguments)]
pub fn driving_potential(
    v_remap: f64,
    alpha: f64,
    dalpha_dt: f64,
    dt_eta: f64,
    grad_eta: f64,
    mass: f64,
    hbar: f64,
    eta: f64,
) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::ZeroSpeed("the driving potential contains (α² − 1)/α"));
    }
    if mass == 0.0 {
        return Err(Error::Parameter("mass must be non-zero".into()));
    }
    let a2m1 = alpha * alpha - 1.0;
    Ok(v_remap - hbar * dalpha_dt * eta - hbar * a2m1 / alpha * dt_eta - hbar * hbar / (2.0 * mass) * a2m1 * grad_eta * grad_eta)
}

/// Remapped reference data at reference time Λ: ψ(Λ), its phase η (gauge
/// fixed by [`crate::fields::PhaseGradients::integrate_phase`]) and gradients.
struct RemappedPhase {
    psi: ComplexField,
    eta: Vec<f64>,
    grad_eta: Vec<f64>,
    dt_eta: Vec<f64>,
    mask: Vec<bool>,
}

fn remapped_phase(reference: &Trajectory, lambda: f64) -> Result<RemappedPhase> {
    let psi = reference.sample_remapped(lambda)?;
    let dpsi = reference.sample_remapped_dt(lambda)?;
    let pg = phase_gradients(&psi, &dpsi)?;
    let eta = pg.integrate_phase(&psi);
    Ok(RemappedPhase {
        psi,
        eta,
        grad_eta: pg.grad_eta,
        dt_eta: pg.dt_eta,
        mask: pg.mask,
    })
}

/// e^{i(α−1)η}·ψ(Λ) at one instant.
fn phase_dressed(remapped: &RemappedPhase, alpha: f64, time: f64) -> ComplexField {
    ComplexField {
        grid: remapped.psi.grid,
        values: remapped
            .psi
            .values
            .iter()
            .zip(&remapped.eta)
            .map(|(z, e)| z * Complex64::from_polar(1.0, additional_phase(alpha, *e)))
            .collect(),
        time,
    }
}

fn check_run(reference: &Trajectory, profile: &SpeedProfile, dt: f64, n_steps: usize, stride: usize) -> Result<()> {
    check_steps(dt, stride)?;
    let duration = n_steps as f64 * dt;
    profile.alpha_at(duration)?;
    let (lo, hi) = profile.lambda_range();
    let (first, last) = reference.time_range().ok_or(Error::Range {
        query: lo,
        first: f64::NAN,
        last: f64::NAN,
    })?;
    for q in [lo, hi] {
        if q < first || q > last {
            return Err(Error::Range { query: q, first, last });
        }
    }
    Ok(())
}

/// Largest |‖ψ(t)‖² − ‖ψ(0)‖²| seen so far.
#[derive(Default)]
struct NormDrift {
    initial: Option<f64>,
    max: f64,
}

impl NormDrift {
    fn observe(&mut self, psi: &ComplexField) {
        let n = norm_squared(psi);
        let n0 = *self.initial.get_or_insert(n);
        self.max = self.max.max((n - n0).abs());
    }
}

/// Runs the driving-potential route: unmodified mass, potential V_FF built
/// from the reference phase at Λ(t). Errors are global-phase-aligned L2
/// distances to e^{if}·ψ(Λ(t), x) at each output time.
pub fn run_ff_schrodinger_potential(
    reference: &Trajectory,
    profile: &SpeedProfile,
    params: &SchrodingerParams,
    dt: f64,
    n_steps: usize,
    stride: usize,
) -> Result<ControlledRun> {
    check_run(reference, profile, dt, n_steps, stride)?;
    let duration = n_steps as f64 * dt;
    let (lo, hi) = profile.alpha_bounds();
    if lo <= 0.0 && hi >= 0.0 {
        return Err(Error::ZeroSpeed("the driving potential contains (α² − 1)/α"));
    }
    if !profile.is_continuously_differentiable() {
        return Err(Error::Parameter(
            "the driving potential contains ∂ₜα; a kinked or discontinuous tabulated α is not supported".into(),
        ));
    }
    let grid = reference.grid();
    let n = grid.len();
    let alpha0 = profile.alpha_at(0.0)?;
    let start = remapped_phase(reference, profile.lambda_at(0.0)?)?;
    let psi0 = phase_dressed(&start, alpha0, 0.0);

    let mut v_remap = vec![0.0; n];
    let mut ever_masked = vec![false; n];
    let mut times = Vec::new();
    let mut l2 = Vec::new();
    let mut drift = NormDrift::default();

    let trajectory = propagate(
        &psi0,
        params.hbar,
        dt,
        n_steps,
        stride,
        |_, t_mid, pot| {
            let t_mid = t_mid.min(duration);
            let alpha = profile.alpha_at(t_mid)?;
            let dalpha = profile.alpha_derivative_at(t_mid)?;
            let lambda = profile.lambda_at(t_mid)?;
            let rp = remapped_phase(reference, lambda)?;
            params.potential.fill(&grid, lambda, &mut v_remap)?;
            for i in 0..n {
                pot[i] = if rp.mask[i] {
                    ever_masked[i] = true;
                    v_remap[i]
                } else {
                    driving_potential(
                        v_remap[i],
                        alpha,
                        dalpha,
                        alpha * rp.dt_eta[i],
                        rp.grad_eta[i],
                        params.mass,
                        params.hbar,
                        rp.eta[i],
                    )?
                };
            }
            Ok(params.mass)
        },
        |psi| {
            let t = psi.time.min(duration);
            let target = phase_dressed(&remapped_phase(reference, profile.lambda_at(t)?)?, profile.alpha_at(t)?, psi.time);
            times.push(psi.time);
            l2.push(aligned_l2_distance(psi, &target)?);
            drift.observe(psi);
            Ok(())
        },
    )?;
    let mut report = ErrorReport::from_samples(times, l2);
    report.norm_drift = Some(drift.max);
    report.masked_points = ever_masked.iter().filter(|m| **m).count();
    Ok(ControlledRun { trajectory, report })
}

/// Runs the scaled route: mass m/α(t) and potential α(t)·V(Λ(t), x), started
/// from ψ(0, x). Errors are raw L2 distances to ψ(Λ(t), x).
pub fn run_ff_schrodinger_scaledmass(
    reference: &Trajectory,
    profile: &SpeedProfile,
    params: &SchrodingerParams,
    dt: f64,
    n_steps: usize,
    stride: usize,
) -> Result<ControlledRun> {
    check_run(reference, profile, dt, n_steps, stride)?;
    if profile.crosses_zero() {
        return Err(Error::ZeroSpeed("the scaled mass m_α = m/α is undefined at α = 0"));
    }
    let duration = n_steps as f64 * dt;
    let grid = reference.grid();
    let psi0 = ComplexField {
        time: 0.0,
        ..reference.sample_remapped(profile.lambda_at(0.0)?)?
    };
    let mut v = vec![0.0; grid.len()];
    let mut times = Vec::new();
    let mut l2 = Vec::new();
    let mut drift = NormDrift::default();

    let trajectory = propagate(
        &psi0,
        params.hbar,
        dt,
        n_steps,
        stride,
        |_, t_mid, pot| {
            let t_mid = t_mid.min(duration);
            let alpha = profile.alpha_at(t_mid)?;
            let (mass, scaled) = scaled_mass_potential(params.mass, &params.potential, alpha)?;
            scaled.fill(&grid, profile.lambda_at(t_mid)?, &mut v)?;
            pot.copy_from_slice(&v);
            Ok(mass)
        },
        |psi| {
            let target = reference.sample_remapped(profile.lambda_at(psi.time.min(duration))?)?;
            times.push(psi.time);
            l2.push(l2_distance(psi, &ComplexField { time: psi.time, ..target })?);
            drift.observe(psi);
            Ok(())
        },
    )?;
    let mut report = ErrorReport::from_samples(times, l2);
    report.norm_drift = Some(drift.max);
    Ok(ControlledRun { trajectory, report })
}
