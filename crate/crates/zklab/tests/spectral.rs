use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use zklab::propagator::evolve;
use zklab::spectral::{
    bessel_potential, lp_project, make_grid, sobolev_norm, synthesize, GeneratorSpec, Grid, LpMode, SpectralField,
};

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).l2_norm() / b.l2_norm().max(1e-300)
}

fn grid_strategy() -> impl Strategy<Value = Arc<Grid>> {
    (2usize..=3, prop::sample::select(vec![8usize, 12, 16]), 2.0f64..20.0).prop_map(|(d, n, l)| {
        let lengths: Vec<f64> = (0..d).map(|a| l * (1.0 + 0.25 * a as f64)).collect();
        Arc::new(make_grid(d, &lengths, &vec![n; d]).unwrap())
    })
}

fn field(g: &Arc<Grid>, seed: u64, radius: f64) -> SpectralField {
    synthesize(g, &GeneratorSpec::RandomLowpass { radius, seed, amplitude: 1.0 }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval_against_lattice_sum(g in grid_strategy(), seed in 0u64..1000, radius in 0.5f64..6.0) {
        let u = field(&g, seed, radius);
        let phys = u.to_physical();
        let direct = (phys.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.cell_volume()).sqrt();
        prop_assert!((direct - u.l2_norm()).abs() <= 1e-12 * u.l2_norm());
    }

    #[test]
    fn physical_round_trip(g in grid_strategy(), seed in 0u64..1000) {
        let u = field(&g, seed, 3.0);
        let back = SpectralField::from_physical(g.clone(), u.to_physical(), "back");
        prop_assert!(rel(&back, &u) <= 1e-12);
    }

    #[test]
    fn annuli_reconstruct(g in grid_strategy(), seed in 0u64..1000) {
        let u = field(&g, seed, 4.0);
        let mut acc = SpectralField::zeros(g.clone());
        for k in -1..=g.max_band() {
            acc = acc.add(&lp_project(&u, LpMode::Annulus, k).unwrap());
        }
        prop_assert!(rel(&acc, &u) <= 1e-12);
    }

    #[test]
    fn ball_is_cumulative_annuli(g in grid_strategy(), seed in 0u64..1000, j in 0i32..4) {
        let u = field(&g, seed, 4.0);
        let mut acc = SpectralField::zeros(g.clone());
        for k in -1..=j {
            acc = acc.add(&lp_project(&u, LpMode::Annulus, k).unwrap());
        }
        let ball = lp_project(&u, LpMode::Ball, j).unwrap();
        prop_assert!(acc.sub(&ball).l2_norm() <= 1e-12 * u.l2_norm());
    }

    #[test]
    fn multipliers_commute(g in grid_strategy(), seed in 0u64..1000, k in -1i32..3, s in -1.0f64..2.0, t in -2.0f64..2.0) {
        let u = field(&g, seed, 3.0);
        let a = bessel_potential(&lp_project(&evolve(&u, t), LpMode::Annulus, k).unwrap(), s);
        let b = evolve(&lp_project(&bessel_potential(&u, s), LpMode::Annulus, k).unwrap(), t);
        prop_assert!(a.sub(&b).l2_norm() <= 1e-12 * bessel_potential(&u, s).l2_norm().max(1e-300));
    }

    #[test]
    fn sobolev_norm_monotone(g in grid_strategy(), seed in 0u64..1000, s in -1.0f64..2.0, ds in 0.0f64..1.0) {
        let u = field(&g, seed, 3.0);
        prop_assert!(sobolev_norm(&u, s) <= sobolev_norm(&u, s + ds) * (1.0 + 1e-14));
    }

    #[test]
    fn synthesized_fields_are_real(g in grid_strategy(), seed in 0u64..1000) {
        let u = synthesize(&g, &GeneratorSpec::Rough { s: 0.5, delta: 0.1, seed, amplitude: 1.0 }).unwrap();
        prop_assert!(u.is_hermitian());
        let im = u.to_physical().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        prop_assert!(im < 1e-12);
        prop_assert!((sobolev_norm(&u, 0.5) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn value_at_matches_plane_wave() {
    let g = Arc::new(make_grid(2, &[5.0, 7.0], &[16, 16]).unwrap());
    let u = synthesize(&g, &GeneratorSpec::PlaneWave { mode: vec![2, -3], amplitude: 1.5 }).unwrap();
    let x = [0.37, -1.2];
    let z0 = 2.0 * 2.0 * std::f64::consts::PI / 5.0;
    let z1 = -3.0 * 2.0 * std::f64::consts::PI / 7.0;
    let want = Complex64::from_polar(1.5, z0 * x[0] + z1 * x[1]);
    assert!((u.value_at(&x) - want).norm() < 1e-12);
}

#[test]
fn gaussian_matches_closed_form() {
    let g = Arc::new(make_grid(2, &[20.0, 20.0], &[64, 64]).unwrap());
    let u = synthesize(&g, &GeneratorSpec::Gaussian { sigma: 1.3, amplitude: 2.0, center: vec![] }).unwrap();
    let x = [0.9f64, -0.4];
    let want = 2.0 * (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * 1.3 * 1.3)).exp();
    assert!((u.value_at(&x).re - want).abs() < 1e-10);
}

#[test]
fn unknown_generator_is_rejected() {
    assert!(matches!(GeneratorSpec::parse("sawtooth:seed=1"), Err(zklab::Error::UnknownGenerator(_))));
    assert!(GeneratorSpec::parse("gaussian:sigma=2").is_ok());
}

#[test]
fn bad_grids_are_rejected() {
    assert!(matches!(make_grid(2, &[1.0, 1.0], &[0, 8]), Err(zklab::Error::InvalidResolution(0))));
    assert!(matches!(make_grid(2, &[1.0], &[8, 8]), Err(zklab::Error::DimensionMismatch { .. })));
    assert!(matches!(make_grid(1, &[-1.0], &[8]), Err(zklab::Error::InvalidLength(_))));
}
