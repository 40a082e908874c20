use std::sync::Arc;

use proptest::prelude::*;
use zklab::mixed_norms::{mixed_norm, time_weights, xs_norm, ys_norm, Axis, MixedNormSpec, YsParams, YsVariant};
use zklab::propagator::{trajectory, SpaceTimeBlock};
use zklab::spectral::{make_grid, synthesize, GeneratorSpec};

fn block(seed: u64, amp: f64) -> SpaceTimeBlock {
    let g = Arc::new(make_grid(2, &[8.0, 6.0], &[16, 12]).unwrap());
    let u = synthesize(&g, &GeneratorSpec::RandomLowpass { radius: 3.0, seed, amplitude: amp }).unwrap();
    trajectory(&u, 0.5, 5).unwrap()
}

fn samples(b: &SpaceTimeBlock) -> Vec<Vec<f64>> {
    b.frames.iter().map(|f| f.to_physical().iter().map(|z| z.re).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn triangle_inequality(a in 0u64..300, b in 300u64..600, p in 1.0f64..8.0) {
        let (u, v) = (block(a, 1.0), block(b, 1.0));
        let w = SpaceTimeBlock::new(u.grid.clone(), u.times.clone(),
            u.frames.iter().zip(&v.frames).map(|(x, y)| x.add(y)).collect()).unwrap();
        for spec in [MixedNormSpec::lx_linf_yt(p), MixedNormSpec::lt_lxy(p, 2.0), MixedNormSpec::lx_lyt(p, 3.0)] {
            let lhs = mixed_norm(&w, &spec, 1).unwrap();
            let rhs = mixed_norm(&u, &spec, 1).unwrap() + mixed_norm(&v, &spec, 1).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn homogeneous(seed in 0u64..300, c in -4.0f64..4.0, p in 1.0f64..6.0) {
        let u = block(seed, 1.0);
        let cu = u.map_frames(|f| f.scale(c));
        let spec = MixedNormSpec::lx_lyt(p, 2.0);
        let a = mixed_norm(&cu, &spec, 1).unwrap();
        let b = mixed_norm(&u, &spec, 1).unwrap();
        prop_assert!((a - c.abs() * b).abs() <= 1e-12 * b.max(1.0));
    }

    #[test]
    fn normalized_norms_grow_with_p(seed in 0u64..300, p in 1.0f64..6.0, dp in 0.1f64..4.0) {
        let u = block(seed, 1.0);
        let a = mixed_norm(&u, &MixedNormSpec::l_all(p).normalized(), 1).unwrap();
        let b = mixed_norm(&u, &MixedNormSpec::l_all(p + dp).normalized(), 1).unwrap();
        let c = mixed_norm(&u, &MixedNormSpec::l_all(f64::INFINITY).normalized(), 1).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12));
        prop_assert!(b <= c * (1.0 + 1e-12));
    }

    #[test]
    fn sup_grows_with_oversampling(seed in 0u64..300) {
        let u = block(seed, 1.0);
        let spec = MixedNormSpec::l_all(f64::INFINITY);
        let coarse = mixed_norm(&u, &spec, 1).unwrap();
        let fine = mixed_norm(&u, &spec, 2).unwrap();
        prop_assert!(coarse <= fine * (1.0 + 1e-12));
    }
}

#[test]
fn joint_norm_matches_direct_sum() {
    let u = block(11, 1.0);
    let g = &u.grid;
    let w = time_weights(&u.times, false);
    let s = samples(&u);
    let p = 3.0;
    let mut acc = 0.0;
    for (frame, wt) in s.iter().zip(&w) {
        acc += wt * g.cell_volume() * frame.iter().map(|v| v.abs().powf(p)).sum::<f64>();
    }
    let direct = acc.powf(1.0 / p);
    let got = mixed_norm(&u, &MixedNormSpec::l_all(p), 1).unwrap();
    assert!((got - direct).abs() < 1e-12 * direct);
}

#[test]
fn iterated_norm_matches_direct_loops() {
    // L^2_x L^inf_{y,t}: x is axis 0, the slow index of the physical layout.
    let u = block(5, 1.0);
    let g = &u.grid;
    let (nx, ny) = (g.resolution()[0], g.y_len());
    let s = samples(&u);
    let mut acc = 0.0;
    for ix in 0..nx {
        let mut sup = 0.0f64;
        for frame in &s {
            for iy in 0..ny {
                sup = sup.max(frame[ix * ny + iy].abs());
            }
        }
        acc += g.spacing(0) * sup * sup;
    }
    let got = mixed_norm(&u, &MixedNormSpec::lx_linf_yt(2.0), 1).unwrap();
    assert!((got - acc.sqrt()).abs() < 1e-12 * got);
}

#[test]
fn time_weights_integrate_constants() {
    let t = [0.0, 0.1, 0.4, 1.0];
    assert!((time_weights(&t, false).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    let t2 = [0.0, 2.0, 3.0];
    assert!((time_weights(&t2, true).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert_eq!(time_weights(&[0.5], false), vec![1.0]);
}

#[test]
fn spec_parsing_and_validation() {
    let s = MixedNormSpec::parse("L4_x Linf_{y,t}").unwrap();
    assert_eq!(s, MixedNormSpec::lx_linf_yt(4.0));
    assert!(MixedNormSpec::new(vec![(vec![Axis::X], 0.5), (vec![Axis::Y, Axis::T], 2.0)]).is_err());
    assert!(MixedNormSpec::new(vec![(vec![Axis::X], 2.0), (vec![Axis::X, Axis::T], 2.0)]).is_err());
    assert!(MixedNormSpec::new(vec![(vec![Axis::X, Axis::Y], 2.0)]).is_err());
    assert!(MixedNormSpec::parse("M4_x").is_err());
}

#[test]
fn composite_norms_scale_linearly() {
    let u = block(2, 1.0);
    let v = u.map_frames(|f| f.scale(3.0));
    let par = YsParams::default();
    for variant in [YsVariant::TwoD, YsVariant::HighD, YsVariant::Tilde3] {
        let a = ys_norm(&u, 0.8, variant, &par).unwrap();
        let b = ys_norm(&v, 0.8, variant, &par).unwrap();
        assert!(a > 0.0 && (b - 3.0 * a).abs() < 1e-10 * b);
        let r = xs_norm(&u, 0.8, variant, &par).unwrap();
        let agg = r.per_band.iter().map(|(&j, &y)| (2f64.powf(0.8 * j as f64) * y).powi(2)).sum::<f64>().sqrt();
        assert!((r.total - agg).abs() < 1e-12 * agg);
        assert!(r.per_band.contains_key(&-1));
    }
}
