//! Newtonian limit of a static weak-field metric and the classical falling
//! particle under speed control.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::fields::Grid1D;
use crate::scaling::SpeedProfile;

/// Default bound on max |g₀₀ + 1| for the weak-field approximation.
pub const WEAK_FIELD_THRESHOLD: f64 = 0.1;

fn weak_field_deviation(g00: &[f64]) -> f64 {
    g00.iter().map(|g| (g + 1.0).abs()).fold(0.0, f64::max)
}

/// φᵢ = −(c²/2)(g₀₀ᵢ + 1), shifted so that φ vanishes at `gauge_index`.
pub fn newton_potential(g00: &[f64], c: f64, gauge_index: usize) -> Result<Vec<f64>> {
    newton_potential_with_threshold(g00, c, gauge_index, WEAK_FIELD_THRESHOLD)
}

pub fn newton_potential_with_threshold(g00: &[f64], c: f64, gauge_index: usize, threshold: f64) -> Result<Vec<f64>> {
    if gauge_index >= g00.len() {
        return Err(Error::Parameter(format!(
            "gauge index {gauge_index} outside {} samples",
            g00.len()
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Parameter(format!("c must be > 0, got {c}")));
    }
    let deviation = weak_field_deviation(g00);
    if !(deviation <= threshold) {
        return Err(Error::WeakField { deviation, threshold });
    }
    let raw = |g: f64| -0.5 * c * c * (g + 1.0);
    let offset = raw(g00[gauge_index]);
    Ok(g00.iter().map(|&g| raw(g) - offset).collect())
}

/// Centered first differences; second-order one-sided at the two ends.
pub fn gradient(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * dx);
    }
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx);
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dx);
    out
}

/// Static weak-field g₀₀ on a grid together with its Newton potential.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonianField {
    pub grid: Grid1D,
    pub g00: Vec<f64>,
    pub c: f64,
    pub phi: Vec<f64>,
    pub gauge_index: usize,
}

impl NewtonianField {
    pub fn new(grid: Grid1D, g00: Vec<f64>, c: f64, gauge_index: usize) -> Result<Self> {
        if g00.len() != grid.len() {
            return Err(Error::Shape(format!("{} g00 samples for {} grid points", g00.len(), grid.len())));
        }
        let phi = newton_potential(&g00, c, gauge_index)?;
        Ok(Self {
            grid,
            g00,
            c,
            phi,
            gauge_index,
        })
    }

    pub fn grad_phi(&self) -> Vec<f64> {
        gradient(&self.phi, self.grid.dx())
    }
}

/// Output of [`ff_newton_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonCheck {
    /// ∂φ_FF from (g_FF)₀₀ = α²g₀₀.
    pub grad_phi_ff: Vec<f64>,
    /// α²·∂φ.
    pub grad_phi_scaled: Vec<f64>,
    pub max_abs_diff: f64,
    /// Set when α²g₀₀ leaves the weak-field regime; the identity is still checked.
    pub weak_field_warning: bool,
}

/// Compares ∂φ_FF, extracted from (g_FF)₀₀ = α²g₀₀, with α²·∂φ for a
/// spatially and temporally constant α. Samples are spaced `dx` apart.
pub fn ff_newton_check(g00: &[f64], alpha: f64, c: f64, dx: f64) -> Result<NewtonCheck> {
    if !(dx > 0.0) {
        return Err(Error::Parameter(format!("dx must be > 0, got {dx}")));
    }
    let phi = newton_potential(g00, c, 0)?;
    let g_ff: Vec<f64> = g00.iter().map(|g| alpha * alpha * g).collect();
    let weak_field_warning = weak_field_deviation(&g_ff) > WEAK_FIELD_THRESHOLD;
    let phi_ff: Vec<f64> = g_ff.iter().map(|g| -0.5 * c * c * (g + 1.0)).collect();
    let grad_phi_ff = gradient(&phi_ff, dx);
    let grad_phi_scaled: Vec<f64> = gradient(&phi, dx).iter().map(|d| alpha * alpha * d).collect();
    let max_abs_diff = grad_phi_ff
        .iter()
        .zip(&grad_phi_scaled)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(NewtonCheck {
        grad_phi_ff,
        grad_phi_scaled,
        max_abs_diff,
        weak_field_warning,
    })
}

/// CSV with header `x,g00,phi,grad_phi,grad_phi_ff`.
pub fn write_newton_csv<W: Write>(field: &NewtonianField, check: &NewtonCheck, mut w: W) -> io::Result<()> {
    writeln!(w, "x,g00,phi,grad_phi,grad_phi_ff")?;
    let grad = field.grad_phi();
    for (i, d) in grad.iter().enumerate() {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e}",
            field.grid.x(i),
            field.g00[i],
            field.phi[i],
            d,
            check.grad_phi_ff[i]
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

/// RK4 for ẍ = a(t); returns the initial state and every step.
pub fn classical_evolve_with<A: Fn(f64) -> f64>(state0: ClassicalState, accel: A, dt: f64, n_steps: usize) -> Result<Vec<ClassicalState>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!("dt must be > 0, got {dt}")));
    }
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(state0);
    let (mut x, mut v) = (state0.x, state0.v);
    for k in 0..n_steps {
        let t = state0.t + k as f64 * dt;
        let (a1, a2, a4) = (accel(t), accel(t + 0.5 * dt), accel(t + dt));
        let (k1x, k1v) = (v, a1);
        let (k2x, k2v) = (v + 0.5 * dt * k1v, a2);
        let (k3x, k3v) = (v + 0.5 * dt * k2v, a2);
        let (k4x, k4v) = (v + dt * k3v, a4);
        x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(x.is_finite() && v.is_finite()) {
            return Err(Error::Instability {
                step: k + 1,
                reason: "non-finite particle state".into(),
            });
        }
        out.push(ClassicalState {
            t: state0.t + (k + 1) as f64 * dt,
            x,
            v,
        });
    }
    Ok(out)
}

/// Free fall ẍ = −g.
pub fn classical_evolve(state0: ClassicalState, g: f64, dt: f64, n_steps: usize) -> Result<Vec<ClassicalState>> {
    classical_evolve_with(state0, |_| -g, dt, n_steps)
}

/// g_α = α²·g.
pub fn scaled_gravity(g: f64, alpha: f64) -> f64 {
    alpha * alpha * g
}

/// Number of steps of size `dt` covering `span`.
fn steps_for(span: f64, dt: f64) -> usize {
    (span / dt).round() as usize
}

/// Falls under g_α = α²g for time T from (x₀, α·v₀) and compares with the
/// reference x(Λ(t)) = x(αt) at every step. Negative α samples the reference
/// backwards, computed as y(s) = x(−s) with initial velocity −v₀.
pub fn verify_classical(x0: f64, v0: f64, g: f64, alpha: f64, total_time: f64, dt: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::ZeroSpeed("the remapped reference does not move at α = 0"));
    }
    let n = steps_for(total_time, dt);
    let scaled = classical_evolve(ClassicalState { t: 0.0, x: x0, v: alpha * v0 }, scaled_gravity(g, alpha), dt, n)?;
    let reference = classical_evolve(
        ClassicalState {
            t: 0.0,
            x: x0,
            v: alpha.signum() * v0,
        },
        g,
        alpha.abs() * dt,
        n,
    )?;
    Ok(scaled
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a.x - b.x).abs())
        .fold(0.0, f64::max))
}

/// For time-dependent α the chain rule gives ẍ_α = α̇·ẋ(Λ) − α²g; this
/// returns the term α̇(t)·ẋ(Λ(t)) = α̇(t)·(v₀ − gΛ(t)) that the constant-α
/// law g_α = α²g leaves out.
pub fn classical_chain_rule_residual(profile: &SpeedProfile, v0: f64, g: f64, t: f64) -> Result<f64> {
    Ok(profile.alpha_derivative_at(t)? * (v0 - g * profile.lambda_at(t)?))
}

/// CSV with header `t,x,v`.
pub fn write_classical_csv<W: Write>(states: &[ClassicalState], mut w: W) -> io::Result<()> {
    writeln!(w, "t,x,v")?;
    for s in states {
        writeln!(w, "{:e},{:e},{:e}", s.t, s.x, s.v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::{Axis, ProfileKind};
    use proptest::prelude::*;

    fn well(grid: &Grid1D, depth: f64, c: f64) -> (Vec<f64>, Vec<f64>) {
        // φ₀ = −depth·exp(−x²), shifted to vanish at the first sample
        let raw = |x: f64| -depth * (-x * x).exp();
        let phi0: Vec<f64> = grid.points().map(|x| raw(x) - raw(grid.x(0))).collect();
        let g00 = phi0.iter().map(|p| -(1.0 + 2.0 * p / (c * c))).collect();
        (g00, phi0)
    }

    #[test]
    fn minkowski_has_zero_potential() {
        assert_eq!(newton_potential(&[-1.0; 10], 3.0, 4).unwrap(), vec![0.0; 10]);
    }

    #[test]
    fn recovers_constructed_well() {
        let g = Grid1D::new(-5.0, 5.0, 200, crate::Boundary::FixedZero).unwrap();
        let (g00, phi0) = well(&g, 0.02, 1.0);
        let phi = newton_potential(&g00, 1.0, 0).unwrap();
        for (a, b) in phi.iter().zip(&phi0) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_profile_gives_uniform_gradient() {
        let (a, c, dx) = (0.3, 2.0, 0.01);
        let g00: Vec<f64> = (0..50).map(|i| -1.0 - 2.0 * a * (i as f64 * dx) / (c * c)).collect();
        let grad = gradient(&newton_potential(&g00, c, 0).unwrap(), dx);
        assert!(grad.iter().all(|d| (d - a).abs() < 1e-10));
    }

    #[test]
    fn weak_field_violation_is_an_error() {
        assert!(matches!(newton_potential(&[-1.0, -1.5], 1.0, 0), Err(Error::WeakField { .. })));
        assert!(newton_potential(&[-1.0], 1.0, 3).is_err());
    }

    #[test]
    fn ff_check_examples() {
        let g = Grid1D::new(-5.0, 5.0, 400, crate::Boundary::FixedZero).unwrap();
        let (g00, _) = well(&g, 0.03, 1.0);
        let one = ff_newton_check(&g00, 1.0, 1.0, g.dx()).unwrap();
        assert_eq!(one.grad_phi_ff, one.grad_phi_scaled);
        assert!(!one.weak_field_warning);

        let two = ff_newton_check(&g00, 2.0, 1.0, g.dx()).unwrap();
        let grad = gradient(&newton_potential(&g00, 1.0, 0).unwrap(), g.dx());
        for (ff, d) in two.grad_phi_ff.iter().zip(&grad) {
            assert!((ff - 4.0 * d).abs() < 1e-12);
        }
        assert!(two.max_abs_diff < 1e-12);
        assert!(two.weak_field_warning);

        let flat = ff_newton_check(&[-1.0; 16], 3.0, 1.0, 0.1).unwrap();
        assert!(flat.grad_phi_ff.iter().chain(&flat.grad_phi_scaled).all(|d| *d == 0.0));
    }

    #[test]
    fn free_fall_examples() {
        let s0 = ClassicalState { t: 0.0, x: 1.0, v: 2.0 };
        let free = classical_evolve(s0, 0.0, 0.1, 10).unwrap();
        let last = free.last().unwrap();
        assert!((last.x - 3.0).abs() < 1e-14 && last.v == 2.0);

        let fall = classical_evolve(ClassicalState { t: 0.0, x: 0.0, v: 0.0 }, 9.8, 1e-3, 1000).unwrap();
        assert!((fall.last().unwrap().x + 4.9).abs() < 1e-10);
    }

    #[test]
    fn rk4_is_fourth_order_on_manufactured_force() {
        // x = sin(t) solves ẍ = −sin(t)
        let err = |dt: f64| {
            let n = (2.0 / dt).round() as usize;
            let out = classical_evolve_with(ClassicalState { t: 0.0, x: 0.0, v: 1.0 }, |t| -t.sin(), dt, n).unwrap();
            out.iter().map(|s| (s.x - s.t.sin()).abs()).fold(0.0, f64::max)
        };
        let order = (err(0.1) / err(0.05)).log2();
        assert!((3.7..4.3).contains(&order), "order {order}");
    }

    #[test]
    fn scaled_gravity_examples() {
        assert_eq!(scaled_gravity(9.8, 1.0), 9.8);
        assert!((scaled_gravity(9.8, 2.0) - 39.2).abs() < 1e-12);
        assert_eq!(scaled_gravity(9.8, -1.0), 9.8);
    }

    #[test]
    fn verify_classical_examples() {
        for alpha in [1.0, 2.0, -1.0, 0.5] {
            assert!(verify_classical(0.0, 0.0, 9.8, alpha, 1.0, 1e-3).unwrap() < 1e-9);
            assert!(verify_classical(1.0, 3.0, 9.8, alpha, 1.0, 1e-3).unwrap() < 1e-9);
        }
        assert!(verify_classical(0.0, 0.0, 9.8, 0.0, 1.0, 1e-3).is_err());
    }

    #[test]
    fn scaled_fall_matches_closed_form_parabola() {
        let (x0, v0, g, alpha) = (0.5, 1.0, 9.8, 2.0);
        let run = classical_evolve(ClassicalState { t: 0.0, x: x0, v: alpha * v0 }, scaled_gravity(g, alpha), 1e-3, 1000).unwrap();
        for s in run {
            let lambda = alpha * s.t;
            assert!((s.x - (x0 + v0 * lambda - 0.5 * g * lambda * lambda)).abs() < 1e-9);
        }
    }

    #[test]
    fn chain_rule_residual_vanishes_for_constant_alpha() {
        let constant = SpeedProfile::constant(2.0, Axis::Time, 1.0).unwrap();
        assert_eq!(classical_chain_rule_residual(&constant, 1.0, 9.8, 0.5).unwrap(), 0.0);
        let ramp = SpeedProfile::new(ProfileKind::LinearRamp { start: 1.0, end: 2.0 }, Axis::Time, 1.0).unwrap();
        // α̇ = 1, Λ(0.5) = 0.625
        let r = classical_chain_rule_residual(&ramp, 1.0, 9.8, 0.5).unwrap();
        assert!((r - (1.0 - 9.8 * 0.625)).abs() < 1e-12);
    }

    #[test]
    fn csv_emitters() {
        let g = Grid1D::new(-1.0, 1.0, 8, crate::Boundary::FixedZero).unwrap();
        let field = NewtonianField::new(g, vec![-1.0; 8], 1.0, 0).unwrap();
        let check = ff_newton_check(&field.g00, 2.0, 1.0, g.dx()).unwrap();
        let mut buf = Vec::new();
        write_newton_csv(&field, &check, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x,g00,phi,grad_phi,grad_phi_ff\n"));
        let mut buf = Vec::new();
        write_classical_csv(&[ClassicalState { t: 0.0, x: 1.0, v: 0.0 }], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    proptest! {
        #[test]
        fn gradient_is_gauge_independent(gauge in 0usize..64, depth in 0.0f64..0.04) {
            let g = Grid1D::new(-3.0, 3.0, 64, crate::Boundary::FixedZero).unwrap();
            let (g00, _) = well(&g, depth, 1.0);
            let a = gradient(&newton_potential(&g00, 1.0, 0).unwrap(), g.dx());
            let b = gradient(&newton_potential(&g00, 1.0, gauge).unwrap(), g.dx());
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((p - q).abs() <= 1e-12);
            }
        }

        #[test]
        fn newton_identity_holds_for_any_constant_alpha(alpha in -3.0f64..3.0, depth in 0.0f64..0.04) {
            let g = Grid1D::new(-3.0, 3.0, 128, crate::Boundary::FixedZero).unwrap();
            let (g00, _) = well(&g, depth, 1.0);
            prop_assert!(ff_newton_check(&g00, alpha, 1.0, g.dx()).unwrap().max_abs_diff <= 1e-12);
        }
    }
}
