//! Klein-Gordon dynamics on a diagonal 1+1D background
//!
//! (1/√−g) ∂_μ(√−g g^{μν} ∂_ν φ) = κ²φ,   κ = mc/ħ,   x⁰ = ct,
//!
//! together with the speed-control metric pullback, covector pullback,
//! space-time scaling metrics and the phase-obstruction residual.
//!
//! With s = √−g, a = s/(−g₀₀) and b = s/gₓₓ the equation reads
//! ∂ₜ(a∂ₜφ) = c²[∂ₓ(b∂ₓφ) − sκ²φ]. The solver advances φ and the conjugate
//! momentum Π = a∂ₜφ with classical RK4, b living on cell faces.

mod spectral;

use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::{l2_distance, Boundary, ComplexField, Grid1D, Trajectory};
use crate::scaling::{Axis, SpeedProfile};
use crate::{ControlledRun, ErrorReport};

pub use spectral::{positive_frequency_derivative, SpectralKgSolution};

/// Courant number used by the CFL check.
pub const CFL_CONSTANT: f64 = 0.5;

/// Covariant components g_μν, indices (t, x, y, z).
pub type MetricTensor = [[f64; 4]; 4];

type ComponentsFn = dyn Fn(f64, f64) -> Result<(f64, f64)> + Send + Sync;

/// Diagonal (t, x) block g = diag[g₀₀(t, x), gₓₓ(t, x)] of a metric, with
/// Lorentzian signature enforced at every evaluation.
#[derive(Clone)]
pub struct DiagonalMetric {
    components: Arc<ComponentsFn>,
    is_static: bool,
}

impl std::fmt::Debug for DiagonalMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiagonalMetric").field("is_static", &self.is_static).finish_non_exhaustive()
    }
}

impl DiagonalMetric {
    /// `components(t, x)` returns (g₀₀, gₓₓ); `is_static` promises no t dependence.
    pub fn new<F>(components: F, is_static: bool) -> Self
    where
        F: Fn(f64, f64) -> Result<(f64, f64)> + Send + Sync + 'static,
    {
        Self {
            components: Arc::new(components),
            is_static,
        }
    }

    pub fn minkowski() -> Self {
        Self::new(|_, _| Ok((-1.0, 1.0)), true)
    }

    /// Time-independent metric from g₀₀(x) and gₓₓ(x).
    pub fn from_static<F, G>(g00: F, gxx: G) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(move |_, x| Ok((g00(x), gxx(x))), true)
    }

    pub fn is_static(&self) -> bool {
        self.is_static
    }

    /// (g₀₀, gₓₓ) at (t, x); fails unless g₀₀ < 0 < gₓₓ.
    pub fn components(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        let (g00, gxx) = (self.components)(t, x)?;
        if !(g00 < 0.0 && gxx > 0.0 && g00.is_finite() && gxx.is_finite()) {
            return Err(Error::Metric(format!(
                "signature lost at (t, x) = ({t}, {x}): g00 = {g00}, gxx = {gxx}"
            )));
        }
        Ok((g00, gxx))
    }

    /// g = g₀₀·gₓₓ.
    pub fn determinant(&self, t: f64, x: f64) -> Result<f64> {
        let (g00, gxx) = self.components(t, x)?;
        Ok(g00 * gxx)
    }

    /// (g^00, g^xx).
    pub fn inverse(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        let (g00, gxx) = self.components(t, x)?;
        Ok((1.0 / g00, 1.0 / gxx))
    }

    /// √−g.
    pub fn volume_factor(&self, t: f64, x: f64) -> Result<f64> {
        Ok((-self.determinant(t, x)?).sqrt())
    }

    /// Embedding as diag[g₀₀, gₓₓ, 1, 1].
    pub fn tensor(&self, t: f64, x: f64) -> Result<MetricTensor> {
        let (g00, gxx) = self.components(t, x)?;
        let mut g = [[0.0; 4]; 4];
        g[0][0] = g00;
        g[1][1] = gxx;
        g[2][2] = 1.0;
        g[3][3] = 1.0;
        Ok(g)
    }

    /// Pullback of this metric through the time remap Λ of `profile`.
    pub fn pullback(&self, profile: &SpeedProfile) -> Result<DiagonalMetric> {
        check_time_profile(profile)?;
        if profile.crosses_zero() {
            return Err(degenerate_pullback());
        }
        let base = self.clone();
        let is_static = profile.is_constant() && self.is_static;
        let profile = profile.clone();
        Ok(DiagonalMetric::new(
            move |t, x| {
                let g = pullback_metric(|t, x| base.tensor(t, x), &profile, t, x)?;
                Ok((g[0][0], g[1][1]))
            },
            is_static,
        ))
    }

    /// CSV with header `t,x,g00,gxx` over `times` × grid points.
    pub fn write_csv<W: Write>(&self, grid: &Grid1D, times: &[f64], mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,g00,gxx")?;
        for &t in times {
            for x in grid.points() {
                let (g00, gxx) = self
                    .components(t, x)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
                writeln!(w, "{t:e},{x:e},{g00:e},{gxx:e}")?;
            }
        }
        Ok(())
    }
}

fn degenerate_pullback() -> Error {
    Error::Metric("α = 0 makes (g_FF)_00 vanish; the pulled-back metric is degenerate".into())
}

fn check_time_profile(profile: &SpeedProfile) -> Result<()> {
    if profile.axis() != Axis::Time {
        return Err(Error::Parameter(format!(
            "speed control needs a time-axis profile, got {:?}",
            profile.axis()
        )));
    }
    Ok(())
}

/// g_FF(t, x) = Jᵀ g(Λ(t), x) J with J = diag[α(t), 1, 1, 1], i.e.
/// (g_FF)_μν = J_μ J_ν g_μν(Λ(t), x). Off-diagonal entries are carried along.
pub fn pullback_metric<F>(metric: F, profile: &SpeedProfile, t: f64, x: f64) -> Result<MetricTensor>
where
    F: Fn(f64, f64) -> Result<MetricTensor>,
{
    let alpha = profile.alpha_at(t)?;
    if alpha == 0.0 {
        return Err(degenerate_pullback());
    }
    let g = metric(profile.lambda_at(t)?, x)?;
    let jac = [alpha, 1.0, 1.0, 1.0];
    let mut out = [[0.0; 4]; 4];
    for mu in 0..4 {
        for nu in 0..4 {
            // `+ 0.0` turns the −0.0 of a negative α times a zero entry into +0.0
            out[mu][nu] = if mu == 0 && nu == 0 {
                alpha * alpha * g[0][0]
            } else {
                jac[mu] * jac[nu] * g[mu][nu] + 0.0
            };
        }
    }
    Ok(out)
}

/// (A_FF)₀ = α(t)·A₀(Λ(t), x), (A_FF)ₓ = Aₓ(Λ(t), x).
pub fn pullback_covector<F>(covector: F, profile: &SpeedProfile, t: f64, x: f64) -> Result<[f64; 2]>
where
    F: Fn(f64, f64) -> Result<[f64; 2]>,
{
    let alpha = profile.alpha_at(t)?;
    let [a0, ax] = covector(profile.lambda_at(t)?, x)?;
    Ok([alpha * a0, ax])
}

/// Space-time scaling metric diag[−(α⁽ᵗ⁾)², (α⁽ˣ⁾)², (α⁽ʸ⁾)², (α⁽ᶻ⁾)²], each
/// factor a function of its own coordinate; missing axes have factor 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingMetric {
    factors: [Option<SpeedProfile>; 4],
}

fn axis_index(axis: Axis) -> usize {
    match axis {
        Axis::Time => 0,
        Axis::X => 1,
        Axis::Y => 2,
        Axis::Z => 3,
    }
}

/// Builds the scaling metric from at most one profile per axis.
pub fn spatial_metric(profiles: &[SpeedProfile]) -> Result<ScalingMetric> {
    let mut factors: [Option<SpeedProfile>; 4] = Default::default();
    for p in profiles {
        let slot = &mut factors[axis_index(p.axis())];
        if slot.is_some() {
            return Err(Error::Parameter(format!("two profiles given for axis {:?}", p.axis())));
        }
        let (lo, _) = p.alpha_bounds();
        match p.axis() {
            Axis::Time if p.crosses_zero() => {
                return Err(Error::Metric("time scaling factor vanishes; g_00 would be degenerate".into()))
            }
            Axis::X | Axis::Y | Axis::Z if lo <= 0.0 => {
                return Err(Error::Metric(format!(
                    "spatial scaling factor along {:?} must be positive, minimum is {lo}",
                    p.axis()
                )))
            }
            _ => {}
        }
        *slot = Some(p.clone());
    }
    Ok(ScalingMetric { factors })
}

impl ScalingMetric {
    pub fn factor(&self, axis: Axis) -> Option<&SpeedProfile> {
        self.factors[axis_index(axis)].as_ref()
    }

    fn alpha(&self, k: usize, u: f64) -> Result<f64> {
        self.factors[k].as_ref().map_or(Ok(1.0), |p| p.alpha_at(u))
    }

    /// Components at coordinates (t, x, y, z).
    pub fn tensor(&self, coords: [f64; 4]) -> Result<MetricTensor> {
        let mut g = [[0.0; 4]; 4];
        for k in 0..4 {
            let a = self.alpha(k, coords[k])?;
            g[k][k] = if k == 0 { -(a * a) } else { a * a };
        }
        Ok(g)
    }

    /// The (t, x) block consumed by the 1+1D solver.
    pub fn to_diagonal(&self) -> DiagonalMetric {
        let me = self.clone();
        let is_static = self.factors[0].as_ref().is_none_or(|p| p.is_constant());
        DiagonalMetric::new(
            move |t, x| {
                let at = me.alpha(0, t)?;
                let ax = me.alpha(1, x)?;
                Ok((-(at * at), ax * ax))
            },
            is_static,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KgParams {
    pub mass: f64,
    pub c: f64,
    pub hbar: f64,
}

impl KgParams {
    pub fn new(mass: f64, c: f64, hbar: f64) -> Result<Self> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::Parameter(format!("mass must be ≥ 0, got {mass}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Parameter(format!("c must be > 0, got {c}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::Parameter(format!("hbar must be > 0, got {hbar}")));
        }
        Ok(Self { mass, c, hbar })
    }

    /// Units with ħ = c = 1 and the given κ.
    pub fn natural(kappa: f64) -> Result<Self> {
        Self::new(kappa, 1.0, 1.0)
    }

    /// κ = mc/ħ.
    pub fn kappa(&self) -> f64 {
        self.mass * self.c / self.hbar
    }
}

/// Cauchy data (φ, ∂ₜφ) at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct KgState {
    pub phi: ComplexField,
    pub dphi_dt: ComplexField,
}

impl KgState {
    pub fn new(phi: ComplexField, dphi_dt: ComplexField) -> Result<Self> {
        if phi.grid != dphi_dt.grid {
            return Err(Error::Shape("φ and ∂ₜφ live on different grids".into()));
        }
        if phi.time != dphi_dt.time {
            return Err(Error::Shape(format!(
                "φ at t = {} but ∂ₜφ at t = {}",
                phi.time, dphi_dt.time
            )));
        }
        Ok(Self { phi, dphi_dt })
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.dphi_dt.is_finite()
    }
}

/// Source of reference Cauchy data at arbitrary times on a fixed grid.
pub trait KgReference {
    fn grid(&self) -> Grid1D;
    /// Times at which `state_at` is defined.
    fn time_range(&self) -> (f64, f64);
    fn state_at(&self, t: f64) -> Result<KgState>;
}

impl KgReference for Trajectory {
    fn grid(&self) -> Grid1D {
        Trajectory::grid(self)
    }

    fn time_range(&self) -> (f64, f64) {
        Trajectory::time_range(self).unwrap_or((f64::NAN, f64::NAN))
    }

    fn state_at(&self, t: f64) -> Result<KgState> {
        Ok(KgState {
            phi: self.sample_remapped(t)?,
            dphi_dt: self.sample_derivative(t)?,
        })
    }
}

/// Reference solution known at any (t, x); returns (φ, ∂ₜφ).
pub trait AnalyticKgReference {
    fn eval(&self, t: f64, x: f64) -> (Complex64, Complex64);
}

/// φ = cos(kx)·cos(ωt) with ω = c·sqrt(k² + κ²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandingWave {
    pub k: f64,
    pub omega: f64,
}

impl StandingWave {
    pub fn new(k: f64, params: &KgParams) -> Self {
        Self {
            k,
            omega: params.c * (k * k + params.kappa().powi(2)).sqrt(),
        }
    }
}

impl AnalyticKgReference for StandingWave {
    fn eval(&self, t: f64, x: f64) -> (Complex64, Complex64) {
        let (s, c) = (self.omega * t).sin_cos();
        let kx = (self.k * x).cos();
        (Complex64::new(kx * c, 0.0), Complex64::new(-self.omega * kx * s, 0.0))
    }
}

/// φ = e^{i(kx − ωt)} with ω = c·sqrt(k² + κ²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub k: f64,
    pub omega: f64,
}

impl PlaneWave {
    pub fn new(k: f64, params: &KgParams) -> Self {
        Self {
            k,
            omega: params.c * (k * k + params.kappa().powi(2)).sqrt(),
        }
    }
}

impl AnalyticKgReference for PlaneWave {
    fn eval(&self, t: f64, x: f64) -> (Complex64, Complex64) {
        let z = Complex64::from_polar(1.0, self.k * x - self.omega * t);
        (z, Complex64::new(0.0, -self.omega) * z)
    }
}

/// Metric coefficients sampled on the grid at one time.
#[derive(Debug, Clone)]
struct MetricSamples {
    /// s/(−g₀₀) at nodes.
    a: Vec<f64>,
    /// √−g at nodes.
    s: Vec<f64>,
    /// s/gₓₓ at the right face x_i + dx/2 of node i.
    b: Vec<f64>,
    /// s/gₓₓ at the left face of node 0.
    b_left: f64,
    /// max of sqrt(−g₀₀/gₓₓ).
    max_speed: f64,
}

impl MetricSamples {
    fn new(metric: &DiagonalMetric, grid: &Grid1D, t: f64) -> Result<Self> {
        let n = grid.len();
        let dx = grid.dx();
        let mut m = MetricSamples {
            a: Vec::with_capacity(n),
            s: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
            b_left: 0.0,
            max_speed: 0.0,
        };
        for i in 0..n {
            let (g00, gxx) = metric.components(t, grid.x(i))?;
            let s = (-g00 * gxx).sqrt();
            m.s.push(s);
            m.a.push(s / -g00);
            m.max_speed = m.max_speed.max((-g00 / gxx).sqrt());
            let (f00, fxx) = metric.components(t, grid.x(i) + 0.5 * dx)?;
            m.b.push((-f00 * fxx).sqrt() / fxx);
            m.max_speed = m.max_speed.max((-f00 / fxx).sqrt());
        }
        m.b_left = match grid.boundary() {
            Boundary::Periodic => m.b[n - 1],
            Boundary::FixedZero => {
                let (f00, fxx) = metric.components(t, grid.x(0) - 0.5 * dx)?;
                (-f00 * fxx).sqrt() / fxx
            }
        };
        Ok(m)
    }

    /// ∂ₓ(b∂ₓφ) at node i in flux form.
    #[inline]
    fn flux_divergence(&self, grid: &Grid1D, phi: &[Complex64], i: usize, inv_dx2: f64) -> Complex64 {
        let (l, r) = grid.neighbours(phi, i);
        let bl = if i == 0 { self.b_left } else { self.b[i - 1] };
        (self.b[i] * (r - phi[i]) - bl * (phi[i] - l)) * inv_dx2
    }
}

/// Largest stable step dt ≤ C·dx / (c·max sqrt(−g₀₀/gₓₓ)).
pub fn max_stable_dt(metric: &DiagonalMetric, grid: &Grid1D, params: &KgParams, t: f64) -> Result<f64> {
    let m = MetricSamples::new(metric, grid, t)?;
    Ok(CFL_CONSTANT * grid.dx() / (params.c * m.max_speed))
}

fn check_cfl(dt: f64, dx: f64, c: f64, speeds: &[f64]) -> Result<()> {
    let speed = speeds.iter().copied().fold(0.0, f64::max);
    let max_dt = CFL_CONSTANT * dx / (c * speed);
    if dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, max_dt });
    }
    Ok(())
}

struct KgRhs<'a> {
    grid: &'a Grid1D,
    c2: f64,
    kappa2: f64,
    inv_dx2: f64,
}

impl KgRhs<'_> {
    fn eval(&self, m: &MetricSamples, phi: &[Complex64], pi: &[Complex64], dphi: &mut [Complex64], dpi: &mut [Complex64]) {
        for i in 0..phi.len() {
            dphi[i] = pi[i] / m.a[i];
            dpi[i] = self.c2 * (m.flux_divergence(self.grid, phi, i, self.inv_dx2) - m.s[i] * self.kappa2 * phi[i]);
        }
    }
}

fn axpy(out: &mut [Complex64], x: &[Complex64], h: f64, k: &[Complex64]) {
    for ((o, x), k) in out.iter_mut().zip(x).zip(k) {
        *o = x + k * h;
    }
}

/// Advances the Cauchy data with RK4 in time and the flux-form second-order
/// stencil in space, metric evaluated at the stage times. Snapshots (with
/// ∂ₜφ) are stored every `stride` steps and after the last step.
pub fn kg_evolve(
    state0: &KgState,
    metric: &DiagonalMetric,
    params: &KgParams,
    dt: f64,
    n_steps: usize,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("dt must be > 0, got {dt}")));
    }
    if stride == 0 {
        return Err(Error::Parameter("stride must be at least 1".into()));
    }
    KgState::new(state0.phi.clone(), state0.dphi_dt.clone())?;
    if !state0.is_finite() {
        return Err(Error::Parameter("initial state contains non-finite values".into()));
    }
    let grid = state0.phi.grid;
    let n = grid.len();
    let dx = grid.dx();
    let t0 = state0.phi.time;
    let rhs = KgRhs {
        grid: &grid,
        c2: params.c * params.c,
        kappa2: params.kappa().powi(2),
        inv_dx2: 1.0 / (dx * dx),
    };

    let mut m0 = MetricSamples::new(metric, &grid, t0)?;
    check_cfl(dt, dx, params.c, &[m0.max_speed])?;
    let mut phi = state0.phi.values.clone();
    let mut pi: Vec<Complex64> = state0.dphi_dt.values.iter().zip(&m0.a).map(|(v, a)| v * a).collect();

    let zero = Complex64::new(0.0, 0.0);
    let mut k = [(); 4].map(|_| (vec![zero; n], vec![zero; n]));
    let (mut phi_s, mut pi_s) = (vec![zero; n], vec![zero; n]);

    let mut traj = Trajectory::new(grid, true);
    traj.push(state0.phi.clone(), Some(state0.dphi_dt.clone()))?;
    for step in 0..n_steps {
        let t = t0 + step as f64 * dt;
        let t_next = t0 + (step + 1) as f64 * dt;
        let (m_half, m1) = if metric.is_static() {
            (m0.clone(), m0.clone())
        } else {
            (
                MetricSamples::new(metric, &grid, 0.5 * (t + t_next))?,
                MetricSamples::new(metric, &grid, t_next)?,
            )
        };
        check_cfl(dt, dx, params.c, &[m0.max_speed, m_half.max_speed, m1.max_speed])?;

        let [k1, k2, k3, k4] = &mut k;
        rhs.eval(&m0, &phi, &pi, &mut k1.0, &mut k1.1);
        axpy(&mut phi_s, &phi, 0.5 * dt, &k1.0);
        axpy(&mut pi_s, &pi, 0.5 * dt, &k1.1);
        rhs.eval(&m_half, &phi_s, &pi_s, &mut k2.0, &mut k2.1);
        axpy(&mut phi_s, &phi, 0.5 * dt, &k2.0);
        axpy(&mut pi_s, &pi, 0.5 * dt, &k2.1);
        rhs.eval(&m_half, &phi_s, &pi_s, &mut k3.0, &mut k3.1);
        axpy(&mut phi_s, &phi, dt, &k3.0);
        axpy(&mut pi_s, &pi, dt, &k3.1);
        rhs.eval(&m1, &phi_s, &pi_s, &mut k4.0, &mut k4.1);
        let w = dt / 6.0;
        for i in 0..n {
            phi[i] += w * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
            pi[i] += w * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
        }
        if !phi.iter().chain(&pi).all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Instability {
                step: step + 1,
                reason: "non-finite Klein-Gordon field".into(),
            });
        }
        m0 = m1;
        if (step + 1) % stride == 0 || step + 1 == n_steps {
            let dphi: Vec<Complex64> = pi.iter().zip(&m0.a).map(|(p, a)| p / a).collect();
            traj.push(
                ComplexField::new(grid, phi.clone(), t_next)?,
                Some(ComplexField::new(grid, dphi, t_next)?),
            )?;
        }
    }
    Ok(traj)
}

/// Discrete energy Σ dx [a|∂ₜφ|²/c² + b_{i+½}|(φ_{i+1} − φ_i)/dx|² + sκ²|φ|²],
/// conserved by the semi-discrete scheme when the metric is static.
pub fn kg_energy(state: &KgState, metric: &DiagonalMetric, params: &KgParams) -> Result<f64> {
    let grid = state.phi.grid;
    let m = MetricSamples::new(metric, &grid, state.phi.time)?;
    let dx = grid.dx();
    let phi = &state.phi.values;
    let kappa2 = params.kappa().powi(2);
    let c2 = params.c * params.c;
    let mut e = 0.0;
    for i in 0..grid.len() {
        let (_, r) = grid.neighbours(phi, i);
        e += m.a[i] * state.dphi_dt.values[i].norm_sqr() / c2
            + m.b[i] * ((r - phi[i]) / dx).norm_sqr()
            + m.s[i] * kappa2 * phi[i].norm_sqr();
    }
    if grid.boundary() == Boundary::FixedZero {
        e += m.b_left * (phi[0] / dx).norm_sqr();
    }
    Ok(e * dx)
}

fn report_against<F>(traj: &Trajectory, mut target: F) -> Result<ErrorReport>
where
    F: FnMut(f64) -> Result<ComplexField>,
{
    let mut l2 = Vec::with_capacity(traj.len());
    for k in 0..traj.len() {
        let got = traj.snapshot(k);
        let want = target(got.time)?;
        l2.push(l2_distance(&got, &ComplexField { time: got.time, ..want })?);
    }
    Ok(ErrorReport::from_samples(traj.times().to_vec(), l2))
}

fn check_coverage<R: KgReference + ?Sized>(reference: &R, profile: &SpeedProfile) -> Result<()> {
    let (first, last) = reference.time_range();
    let (lo, hi) = profile.lambda_range();
    for q in [lo, hi] {
        if !(q >= first && q <= last) {
            return Err(Error::Range { query: q, first, last });
        }
    }
    Ok(())
}

/// Speed-controlled Klein-Gordon run under g_FF (the pullback of
/// `base_metric`), started from φ(Λ(0)) and α(0)·∂ₜφ(Λ(0)). Errors are raw L2
/// distances to φ(Λ(t), ·) at each output time.
pub fn run_ff_kg<R: KgReference + ?Sized>(
    reference: &R,
    base_metric: &DiagonalMetric,
    profile: &SpeedProfile,
    params: &KgParams,
    dt: f64,
    n_steps: usize,
    stride: usize,
) -> Result<ControlledRun> {
    profile.alpha_at(n_steps as f64 * dt)?;
    let metric = base_metric.pullback(profile)?;
    check_coverage(reference, profile)?;
    let start = reference.state_at(profile.lambda_at(0.0)?)?;
    let alpha0 = profile.alpha_at(0.0)?;
    let state0 = KgState {
        phi: ComplexField { time: 0.0, ..start.phi },
        dphi_dt: ComplexField {
            time: 0.0,
            ..start.dphi_dt.scaled(Complex64::new(alpha0, 0.0))
        },
    };
    let trajectory = kg_evolve(&state0, &metric, params, dt, n_steps, stride)?;
    let duration = n_steps as f64 * dt;
    let report = report_against(&trajectory, |t| Ok(reference.state_at(profile.lambda_at(t.min(duration))?)?.phi))?;
    Ok(ControlledRun { trajectory, report })
}

/// Samples φ(t, Λ⁽ˣ⁾(x)) and ∂ₜφ(t, Λ⁽ˣ⁾(x)) on `grid`.
fn remapped_in_space<R: AnalyticKgReference + ?Sized>(
    reference: &R,
    profile: &SpeedProfile,
    grid: &Grid1D,
    t: f64,
) -> Result<KgState> {
    let mut phi = Vec::with_capacity(grid.len());
    let mut dphi = Vec::with_capacity(grid.len());
    for x in grid.points() {
        let (p, d) = reference.eval(t, profile.lambda_at(x)?);
        phi.push(p);
        dphi.push(d);
    }
    KgState::new(ComplexField::new(*grid, phi, t)?, ComplexField::new(*grid, dphi, t)?)
}

/// Spatially scaled run under g_SS = diag[−1, (α⁽ˣ⁾)²], started from the
/// reference composed with Λ⁽ˣ⁾. Errors are raw L2 distances to
/// φ(t, Λ⁽ˣ⁾(x)).
pub fn run_ss_kg<R: AnalyticKgReference + ?Sized>(
    reference: &R,
    grid: Grid1D,
    x_profile: &SpeedProfile,
    params: &KgParams,
    dt: f64,
    n_steps: usize,
    stride: usize,
) -> Result<ControlledRun> {
    if x_profile.axis() != Axis::X {
        return Err(Error::Parameter(format!(
            "spatial scaling needs an x-axis profile, got {:?}",
            x_profile.axis()
        )));
    }
    let metric = spatial_metric(std::slice::from_ref(x_profile))?.to_diagonal();
    let state0 = remapped_in_space(reference, x_profile, &grid, 0.0)?;
    let trajectory = kg_evolve(&state0, &metric, params, dt, n_steps, stride)?;
    let report = report_against(&trajectory, |t| Ok(remapped_in_space(reference, x_profile, &grid, t)?.phi))?;
    Ok(ControlledRun { trajectory, report })
}

/// Residual of the Klein-Gordon operator under `metric` applied to the
/// candidate φ_c(t, x) = e^{i f(t, x)}·φ(Λ(t), x):
///
/// R = (1/s)[−(1/c²)∂ₜ(a∂ₜφ_c) + ∂ₓ(b∂ₓφ_c)] − κ²φ_c,
///
/// with the solver's flux stencil in x and the matching flux stencil with
/// step `h` in t. Returns the largest grid L2 norms of Re R and Im R over
/// `eval_times`.
#[allow(clippy::too_many_arguments)]
pub fn phase_obstruction_residual<R, F>(
    reference: &R,
    metric: &DiagonalMetric,
    params: &KgParams,
    f_candidate: F,
    profile: &SpeedProfile,
    eval_times: &[f64],
    h: f64,
) -> Result<(f64, f64)>
where
    R: KgReference + ?Sized,
    F: Fn(f64, f64) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Parameter(format!("time step h must be > 0, got {h}")));
    }
    check_coverage(reference, profile)?;
    let grid = reference.grid();
    let dx = grid.dx();
    let inv_dx2 = 1.0 / (dx * dx);
    let c2 = params.c * params.c;
    let kappa2 = params.kappa().powi(2);
    let candidate = |t: f64| -> Result<Vec<Complex64>> {
        let phi = reference.state_at(profile.lambda_at(t)?)?.phi;
        Ok(phi
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| z * Complex64::from_polar(1.0, f_candidate(t, grid.x(i))))
            .collect())
    };
    let (mut worst_re, mut worst_im) = (0.0f64, 0.0f64);
    for &t in eval_times {
        let (minus, mid, plus) = (candidate(t - h)?, candidate(t)?, candidate(t + h)?);
        let m = MetricSamples::new(metric, &grid, t)?;
        let m_lo = MetricSamples::new(metric, &grid, t - 0.5 * h)?;
        let m_hi = MetricSamples::new(metric, &grid, t + 0.5 * h)?;
        let (mut re2, mut im2) = (0.0, 0.0);
        for i in 0..grid.len() {
            let time_part = (m_hi.a[i] * (plus[i] - mid[i]) - m_lo.a[i] * (mid[i] - minus[i])) / (h * h);
            let space_part = m.flux_divergence(&grid, &mid, i, inv_dx2);
            let r = (-time_part / c2 + space_part) / m.s[i] - kappa2 * mid[i];
            re2 += r.re * r.re;
            im2 += r.im * r.im;
        }
        worst_re = worst_re.max((re2 * dx).sqrt());
        worst_im = worst_im.max((im2 * dx).sqrt());
    }
    Ok((worst_re, worst_im))
}
