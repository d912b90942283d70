use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ffscale_core::initial::{coherent_state, gaussian_packet};
use ffscale_core::kleingordon::{kg_evolve, positive_frequency_derivative, run_ff_kg, SpectralKgSolution};
use ffscale_core::schrodinger::{evolve_schrodinger, reference_trajectory, run_ff_schrodinger_potential};
use ffscale_core::{Axis, DiagonalMetric, Grid1D, KgParams, KgState, Potential, ProfileKind, SchrodingerParams, SpeedProfile};

const STEPS: usize = 100;

fn crank_nicolson(c: &mut Criterion) {
    let mut group = c.benchmark_group("crank_nicolson_100_steps");
    let params = SchrodingerParams::new(1.0, 1.0, Potential::harmonic_trap(1.0, 1.0, 0.0)).unwrap();
    for n in [256, 1024, 4096] {
        let grid = Grid1D::periodic(-20.0, 20.0, n).unwrap();
        let psi0 = coherent_state(grid, 1.0, 1.0, 1.0, 1.0, 0.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &psi0, |b, psi0| {
            b.iter(|| evolve_schrodinger(black_box(psi0), &params, 1e-3, STEPS, STEPS).unwrap())
        });
    }
    group.finish();
}

fn klein_gordon(c: &mut Criterion) {
    let mut group = c.benchmark_group("kg_rk4_100_steps");
    let params = KgParams::natural(1.0).unwrap();
    let well = DiagonalMetric::from_static(|x| -1.0 + 0.02 * (-x * x).exp(), |_| 1.0);
    for n in [256, 1024, 4096] {
        let grid = Grid1D::periodic(-20.0, 20.0, n).unwrap();
        let phi = gaussian_packet(grid, 0.0, 1.0, 1.0);
        let state = KgState::new(phi.clone(), positive_frequency_derivative(&phi, &params).unwrap()).unwrap();
        let dt = 0.4 * grid.dx();
        group.bench_with_input(BenchmarkId::from_parameter(n), &state, |b, state| {
            b.iter(|| kg_evolve(black_box(state), &well, &params, dt, STEPS, STEPS).unwrap())
        });
    }
    group.finish();
}

fn remap_sampling(c: &mut Criterion) {
    let grid = Grid1D::periodic(-20.0, 20.0, 1024).unwrap();
    let params = SchrodingerParams::new(1.0, 1.0, Potential::Zero).unwrap();
    let psi0 = gaussian_packet(grid, 0.0, 1.0, 1.0);
    let traj = evolve_schrodinger(&psi0, &params, 1e-2, 100, 1).unwrap();
    c.bench_function("sample_remapped_1024", |b| {
        b.iter(|| traj.sample_remapped(black_box(0.4567)).unwrap())
    });
}

fn controlled_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("controlled_runs");
    group.sample_size(10);

    let grid = Grid1D::periodic(-20.0, 20.0, 512).unwrap();
    let sp = SchrodingerParams::new(1.0, 1.0, Potential::harmonic_trap(1.0, 1.0, 0.0)).unwrap();
    let psi0 = coherent_state(grid, 1.0, 1.0, 1.0, 1.0, 0.0);
    let bump = SpeedProfile::new(ProfileKind::Bump { base: 1.0, peak: 3.0 }, Axis::Time, 0.25).unwrap();
    let (_, hi) = bump.lambda_range();
    let reference = reference_trajectory(&psi0, &sp, 1e-3, 1, 0.0, hi).unwrap();
    group.bench_function("driving_potential_512", |b| {
        b.iter(|| run_ff_schrodinger_potential(&reference, &bump, &sp, 1e-3, 250, 250).unwrap())
    });

    let kp = KgParams::natural(1.0).unwrap();
    let phi = gaussian_packet(grid, 0.0, 1.0, 1.0);
    let state = KgState::new(phi.clone(), positive_frequency_derivative(&phi, &kp).unwrap()).unwrap();
    let exact = SpectralKgSolution::new(&state, &kp).unwrap();
    let two = SpeedProfile::constant(2.0, Axis::Time, 1.0).unwrap();
    let dt = 0.2 * grid.dx();
    let steps = (1.0 / dt) as usize;
    group.bench_function("kg_metric_pullback_512", |b| {
        b.iter(|| run_ff_kg(&exact, &DiagonalMetric::minkowski(), &two, &kp, dt, steps, steps).unwrap())
    });
    group.finish();
}

criterion_group!(benches, crank_nicolson, klein_gordon, remap_sampling, controlled_runs);
criterion_main!(benches);
