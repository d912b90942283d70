//! Refinement studies of the controlled runs that are too slow for unit tests.

use ffscale_core::initial::{coherent_state, gaussian_packet};
use ffscale_core::kleingordon::{positive_frequency_derivative, run_ff_kg, SpectralKgSolution};
use ffscale_core::schrodinger::{reference_trajectory, run_ff_schrodinger_potential, run_ff_schrodinger_scaledmass};
use ffscale_core::{
    convergence_order, l2_distance, Axis, DiagonalMetric, Grid1D, KgParams, KgState, Potential, ProfileKind,
    SchrodingerParams, SpeedProfile,
};

fn bump_route_error(n: usize, dt: f64) -> f64 {
    let grid = Grid1D::periodic(-20.0, 20.0, n).unwrap();
    let params = SchrodingerParams::new(1.0, 1.0, Potential::harmonic_trap(1.0, 1.0, 0.0)).unwrap();
    let psi0 = coherent_state(grid, 1.0, 1.0, 1.0, 1.0, 0.0);
    let profile = SpeedProfile::new(ProfileKind::Bump { base: 1.0, peak: 3.0 }, Axis::Time, 1.0).unwrap();
    let (_, hi) = profile.lambda_range();
    let reference = reference_trajectory(&psi0, &params, dt, 2, 0.0, hi + 0.01).unwrap();
    let steps = (1.0 / dt).round() as usize;
    run_ff_schrodinger_potential(&reference, &profile, &params, dt, steps, steps / 10)
        .unwrap()
        .report
        .max_l2
}

#[test]
fn driving_route_converges_at_second_order() {
    let levels = [(256, 1e-3), (512, 5e-4), (1024, 2.5e-4)];
    let errors: Vec<f64> = levels.iter().map(|&(n, dt)| bump_route_error(n, dt)).collect();
    let dts: Vec<f64> = levels.iter().map(|l| l.1).collect();
    let order = convergence_order(&errors, &dts).unwrap();
    assert!(order >= 1.8, "order {order}, errors {errors:?}");
}

#[test]
fn scaled_route_reverses_time_through_negative_lambda() {
    // α = −1 from t = 0 walks the reference back to Λ = −1
    let grid = Grid1D::periodic(-20.0, 20.0, 512).unwrap();
    let params = SchrodingerParams::new(1.0, 1.0, Potential::harmonic_trap(1.0, 0.5, 0.0)).unwrap();
    let psi0 = gaussian_packet(grid, 1.0, 0.6, 1.0);
    let dt = 1e-3;
    let reference = reference_trajectory(&psi0, &params, dt, 1, -1.0, 0.0).unwrap();
    let reverse = SpeedProfile::constant(-1.0, Axis::Time, 1.0).unwrap();
    let run = run_ff_schrodinger_scaledmass(&reference, &reverse, &params, dt, 1000, 100).unwrap();
    assert!(run.report.max_l2 < 1e-9, "{}", run.report.max_l2);
    let back = reference.sample_remapped(-1.0).unwrap();
    let fin = run.trajectory.last().unwrap();
    assert!(l2_distance(&fin, &ffscale_core::ComplexField { time: fin.time, ..back }).unwrap() < 1e-9);
}

#[test]
fn kg_doubling_matches_reference_at_twice_the_time() {
    let grid = Grid1D::periodic(-20.0, 20.0, 1024).unwrap();
    let params = KgParams::natural(1.0).unwrap();
    let phi = gaussian_packet(grid, 0.0, 1.0, 1.0);
    let state = KgState::new(phi.clone(), positive_frequency_derivative(&phi, &params).unwrap()).unwrap();
    let exact = SpectralKgSolution::new(&state, &params).unwrap();
    let two = SpeedProfile::constant(2.0, Axis::Time, 1.0).unwrap();
    let dt = 0.25 * grid.dx();
    let steps = (1.0 / dt).ceil() as usize;
    let dt = 1.0 / steps as f64;
    let run = run_ff_kg(&exact, &DiagonalMetric::minkowski(), &two, &params, dt, steps, steps).unwrap();
    assert!(run.report.final_l2 < 1e-2, "{}", run.report.final_l2);
    assert_eq!(run.trajectory.times().last().copied(), Some(steps as f64 * dt));
}
