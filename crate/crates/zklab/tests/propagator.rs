use std::sync::Arc;

use proptest::prelude::*;
use zklab::fit::ScalingFitReport;
use zklab::propagator::kernel::{bump_mass, decay_fit, dispersion_kernel, QuadratureSpec, ZStrategy};
use zklab::propagator::{evolve, rescale, trajectory, zk_symbol, FrameSource, FreeFlow, TimeSchedule};
use zklab::spectral::{lp_project, make_grid, synthesize, GeneratorSpec, LpMode, SpectralField};

fn data(d: usize, seed: u64) -> SpectralField {
    let lengths: Vec<f64> = (0..d).map(|a| 9.0 + a as f64).collect();
    let g = Arc::new(make_grid(d, &lengths, &vec![16; d]).unwrap());
    synthesize(&g, &GeneratorSpec::RandomLowpass { radius: 3.0, seed, amplitude: 1.0 }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn unitary(d in 2usize..=3, seed in 0u64..500, t in -50.0f64..50.0) {
        let u = data(d, seed);
        prop_assert!((evolve(&u, t).l2_norm() - u.l2_norm()).abs() <= 1e-12 * u.l2_norm());
    }

    #[test]
    fn group_law(d in 2usize..=3, seed in 0u64..500, t in -5.0f64..5.0, s in -5.0f64..5.0) {
        let u = data(d, seed);
        let a = evolve(&evolve(&u, t), s);
        let b = evolve(&u, t + s);
        prop_assert!(a.sub(&b).l2_norm() <= 1e-12 * u.l2_norm());
        let back = evolve(&evolve(&u, t), -t);
        prop_assert!(back.sub(&u).l2_norm() <= 1e-12 * u.l2_norm());
    }

    #[test]
    fn band_scaling(k in 1i32..4, seed in 0u64..200, t in 0.01f64..0.5, px in -1.0f64..1.0, py in -1.0f64..1.0) {
        // v(x) = u(2^k x): U(t / 2^{3k}) Delta_k v (x) = U(t) Delta_0 u (2^k x).
        let g = Arc::new(make_grid(2, &[16.0, 16.0], &[32, 32]).unwrap());
        let u = synthesize(&g, &GeneratorSpec::RandomLowpass { radius: 4.0, seed, amplitude: 1.0 }).unwrap();
        let lam = 2f64.powi(-k);
        let v = rescale(&u, lam).unwrap();
        let lhs = evolve(&lp_project(&v, LpMode::Annulus, k).unwrap(), t * lam.powi(3));
        let rhs = evolve(&lp_project(&u, LpMode::Annulus, 0).unwrap(), t);
        let x = [px * lam * 8.0, py * lam * 8.0];
        let xs = [x[0] / lam, x[1] / lam];
        let scale = rhs.l2_norm() / 4.0;
        prop_assert!((lhs.value_at(&x) - rhs.value_at(&xs)).norm() <= 1e-10 * scale.max(1e-300));
    }
}

#[test]
fn symbol_is_dispersion_relation() {
    assert_eq!(zk_symbol(2.0, 9.0), 2.0 * 13.0);
    assert_eq!(zk_symbol(-1.0, 0.0), -1.0);
}

#[test]
fn free_flow_matches_materialized_trajectory() {
    let u = data(2, 7);
    let times = TimeSchedule::Mixed { uniform: 5, geometric: 4, t_min: 1e-3 }.times(2.0).unwrap();
    let lazy = FreeFlow::new(u.clone(), times.clone());
    let block = trajectory(&u, 2.0, 9).unwrap();
    assert_eq!(block.times.len(), 9);
    for (i, &t) in times.iter().enumerate() {
        assert!(lazy.frame(i).sub(&evolve(&u, t)).l2_norm() < 1e-14);
    }
    for (f, &t) in block.frames.iter().zip(&block.times) {
        assert!(f.sub(&evolve(&u, t)).l2_norm() < 1e-14);
    }
}

#[test]
fn kernel_single_band_mass_at_small_time() {
    // I(t, z) -> int psi as t -> 0 at z = 0.
    for d in 1..=4 {
        let v = dispersion_kernel(1e-6, &vec![0.0; d], d, &QuadratureSpec::default()).unwrap();
        assert!((v.value.re - bump_mass(d)).abs() < 1e-6 * bump_mass(d), "d={d}");
    }
}

#[test]
fn kernel_radial_matches_lattice() {
    let spec = QuadratureSpec::lattice(8.0);
    for (t, z) in [(0.7, [0.3, -0.2]), (2.0, [-4.0, 1.0])] {
        let a = dispersion_kernel(t, &z, 2, &QuadratureSpec::default()).unwrap();
        let b = dispersion_kernel(t, &z, 2, &spec).unwrap();
        assert!((a.value - b.value).norm() < 1e-9);
    }
}

#[test]
fn kernel_decay_slope_three_dimensions() {
    let times: Vec<f64> = (0..12).map(|i| 10f64.powf(2.0 * i as f64 / 11.0)).collect();
    let fit: ScalingFitReport = decay_fit(&times, &ZStrategy::default(), 3, &QuadratureSpec::default()).unwrap();
    assert!(fit.slope > -1.15 && fit.slope < -0.85, "slope {}", fit.slope);
}

#[test]
fn kernel_rejects_time_zero() {
    assert!(dispersion_kernel(0.0, &[0.0, 0.0], 2, &QuadratureSpec::default()).is_err());
}
