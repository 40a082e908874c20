use std::f64::consts::PI;
use std::sync::Arc;

use zklab::gzk_solver::{
    duhamel_apply, find_horizon, paraproduct_check, picard_iterate, pointwise_experiment, solve, Dealiasing, Nonlinearity,
    PointwiseConfig, SolverConfig,
};
use zklab::propagator::{evolve, trajectory_with, SpaceTimeBlock, TimeSchedule};
use zklab::spectral::{make_grid, synthesize, GeneratorSpec, SpectralField};
use zklab::Error;

fn gauss(n: usize, l: f64, sigma: f64, amp: f64) -> SpectralField {
    let g = Arc::new(make_grid(2, &[l, l], &[n, n]).unwrap());
    synthesize(&g, &GeneratorSpec::Gaussian { sigma, amplitude: amp, center: vec![] }).unwrap()
}

fn max_frame_diff(a: &SpaceTimeBlock, b: &SpaceTimeBlock) -> f64 {
    a.frames.iter().zip(&b.frames).map(|(x, y)| x.sub(y).l2_norm()).fold(0.0, f64::max)
}

fn cfg(dt: f64, n: usize) -> SolverConfig {
    SolverConfig { dt, horizon: 1.0, schedule: TimeSchedule::Uniform { n }, ..Default::default() }
}

#[test]
fn duhamel_of_zero_is_free_flow() {
    // Output frames are real, so the Nyquist lines carry no phase.
    let mut u0 = gauss(32, 24.0, 2.0, 1.0);
    u0.zero_nyquist();
    let c = cfg(1.0 / 32.0, 9);
    let zero = SpaceTimeBlock::zeros(u0.grid.clone(), c.schedule.times(1.0).unwrap());
    let out = duhamel_apply(&zero, &u0, &c).unwrap();
    let free = trajectory_with(&u0, 1.0, &c.schedule).unwrap();
    assert!(max_frame_diff(&out, &free) < 1e-12 * u0.l2_norm());
}

#[test]
fn duhamel_linear_in_data() {
    let u0 = gauss(32, 24.0, 2.0, 1.0);
    let g = u0.grid.clone();
    let v0 = synthesize(&g, &GeneratorSpec::RandomLowpass { radius: 2.0, seed: 4, amplitude: 1.0 }).unwrap();
    let c = cfg(1.0 / 32.0, 9);
    let zero = SpaceTimeBlock::zeros(g, c.schedule.times(1.0).unwrap());
    let a = duhamel_apply(&zero, &u0.add(&v0), &c).unwrap();
    let b = duhamel_apply(&zero, &u0, &c).unwrap();
    let free = trajectory_with(&v0, 1.0, &c.schedule).unwrap();
    assert!(max_frame_diff(&a.sub(&b), &free) < 1e-12);
}

#[test]
fn duhamel_rejects_foreign_times() {
    let u0 = gauss(16, 24.0, 2.0, 1.0);
    let c = cfg(0.1, 5);
    let late = SpaceTimeBlock::zeros(u0.grid.clone(), vec![0.1, 0.5, 1.0]);
    assert!(matches!(duhamel_apply(&late, &u0, &c), Err(Error::TimeGridMismatch(_))));
    let other = SpaceTimeBlock::zeros(Arc::new(make_grid(2, &[8.0, 8.0], &[16, 16]).unwrap()), vec![0.0, 1.0]);
    assert!(matches!(duhamel_apply(&other, &u0, &c), Err(Error::TimeGridMismatch(_))));
}

#[test]
fn solution_is_near_fixed_point_second_order_in_samples() {
    // Solver error is negligible at this dt; the residual is the trapezoid rule.
    let u0 = gauss(64, 24.0, 2.0, 1.0);
    let dist = |n: usize| {
        let c = cfg(1.0 / 128.0, n);
        let u = solve(&u0, &c).unwrap().block;
        max_frame_diff(&duhamel_apply(&u, &u0, &c).unwrap(), &u)
    };
    let (a, b) = (dist(17), dist(33));
    let ratio = a / b;
    assert!(ratio > 2.5 && ratio < 6.0, "{a} {b} ratio {ratio}");
}

#[test]
fn conservation_small_gaussian() {
    let u0 = gauss(64, 24.0, 2.0, 0.5);
    let out = solve(&u0, &cfg(1.0 / 64.0, 11)).unwrap();
    assert!(out.diagnostics.max_mass_drift < 1e-6, "{}", out.diagnostics.max_mass_drift);
    assert!(out.diagnostics.max_hamiltonian_drift < 1e-4, "{}", out.diagnostics.max_hamiltonian_drift);
    assert!(out.diagnostics.aliasing_level.is_none());
}

#[test]
fn two_thirds_reports_aliasing() {
    let u0 = gauss(32, 24.0, 1.0, 1.0);
    let c = SolverConfig { dealiasing: Dealiasing::TwoThirds, horizon: 0.1, dt: 0.01, ..Default::default() };
    let out = solve(&u0, &c).unwrap();
    let lvl = out.diagnostics.aliasing_level.unwrap();
    assert!(lvl.is_finite() && lvl >= 0.0);
}

#[test]
fn padding_cap_is_enforced() {
    let g = Arc::new(make_grid(3, &[2.0 * PI; 3], &[256; 3]).unwrap());
    assert!(matches!(
        Nonlinearity::new(&g, 4, 1.0, Dealiasing::FullPadding),
        Err(Error::DealiasingOverflow(_))
    ));
}

#[test]
fn mid_run_instability_detected() {
    // A permissive stability constant lets a too-large step through the pre-check.
    let u0 = gauss(32, 24.0, 1.0, 4.0);
    let c = SolverConfig { dt: 0.25, horizon: 1.0, c_stab: 100.0, k_power: 2, ..Default::default() };
    assert!(matches!(solve(&u0, &c), Err(Error::StabilityViolation(_))));
}

#[test]
fn picard_on_zero_data() {
    let g = Arc::new(make_grid(2, &[8.0, 8.0], &[16, 16]).unwrap());
    let c = SolverConfig { dt: 1.0, schedule: TimeSchedule::Uniform { n: 5 }, ..Default::default() };
    let (block, trace, err) = picard_iterate(&SpectralField::zeros(g), &c).unwrap();
    assert!(err.is_none() && trace.converged);
    assert_eq!(trace.iterate_diffs.len(), 1);
    assert!(block.frames.iter().all(|f| f.l2_norm() == 0.0));
}

#[test]
fn picard_small_data_contracts() {
    let u0 = gauss(32, 24.0, 2.0, 0.05);
    let c = SolverConfig { dt: 1.0, schedule: TimeSchedule::Uniform { n: 9 }, k_power: 2, ..Default::default() };
    let (_, trace, err, horizon) = find_horizon(&u0, &c, 2).unwrap();
    assert!(err.is_none() && trace.converged, "{trace:?}");
    assert_eq!(horizon, 1.0);
    assert!(trace.contraction_factor < 1.0);
    assert!(trace.iterate_diffs.windows(2).all(|w| w[1] < w[0]));
}

fn cos_mode(l: f64, n: usize) -> SpectralField {
    let g = Arc::new(make_grid(2, &[l, l], &[n, n]).unwrap());
    let a = synthesize(&g, &GeneratorSpec::PlaneWave { mode: vec![1, 0], amplitude: 0.5 }).unwrap();
    let b = synthesize(&g, &GeneratorSpec::PlaneWave { mode: vec![-1, 0], amplitude: 0.5 }).unwrap();
    a.add(&b)
}

#[test]
fn paraproduct_low_mode_collapses() {
    let u = cos_mode(2.0 * PI, 32);
    for k in 1..=3 {
        for band in 0..=3 {
            let r = paraproduct_check(&u, k, band).unwrap();
            assert!(r.relative_error < 1e-12, "k={k} band={band}: {}", r.relative_error);
        }
    }
}

#[test]
fn paraproduct_random_higher_powers() {
    let g = Arc::new(make_grid(2, &[16.0, 16.0], &[48, 48]).unwrap());
    for seed in 0..4 {
        let u = synthesize(&g, &GeneratorSpec::RandomLowpass { radius: 6.0, seed, amplitude: 1.0 }).unwrap();
        for k in [1, 3] {
            let r = paraproduct_check(&u, k, 2).unwrap();
            assert!(r.relative_error < 1e-10, "{}", r.relative_error);
        }
    }
}

#[test]
fn smooth_data_has_vanishing_exceedance() {
    let u0 = gauss(64, 2.0 * PI, 0.5, 1.0);
    let solver = SolverConfig {
        horizon: 1e-3,
        dt: 1e-3 / 16.0,
        schedule: TimeSchedule::Uniform { n: 17 },
        k_power: 2,
        ..Default::default()
    };
    let cfg = PointwiseConfig {
        solver,
        truncations: vec![2, 4],
        epsilons: vec![1e-3],
        taus: vec![1e-3, 1e-4, 1e-5, 1e-6],
        oversample: 1,
    };
    let rep = pointwise_experiment(&u0, &cfg).unwrap();
    let last = rep.exceedance.iter().find(|r| r.tau == 1e-6).unwrap();
    assert_eq!(last.measure, 0.0);
    assert!(rep.exceedance_monotone && rep.exceedance_monotone_eps);
}

#[test]
fn linear_limit_three_dimensions() {
    let g = Arc::new(make_grid(3, &[8.0; 3], &[16; 3]).unwrap());
    let mut u0 = synthesize(&g, &GeneratorSpec::RandomLowpass { radius: 0.7, seed: 9, amplitude: 1.0 }).unwrap();
    // Radius well inside the two-thirds cutoff, so masking is invisible.
    let c = SolverConfig { nonlinear_coeff: 0.0, dt: 0.1, dealiasing: Dealiasing::TwoThirds, ..Default::default() };
    let out = solve(&u0, &c).unwrap();
    u0.zero_nyquist();
    for (t, f) in out.block.times.iter().zip(&out.block.frames) {
        assert!(f.sub(&evolve(&u0, *t)).l2_norm() < 1e-10);
    }
}
