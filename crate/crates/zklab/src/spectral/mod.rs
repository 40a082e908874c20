//! Grids, spectral fields, transforms, Fourier multipliers, Sobolev norms and
//! Littlewood-Paley projections.

pub mod bump;
pub mod fft;
pub mod field;
pub mod grid;
pub mod synth;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use field::{evaluate_physical, evaluate_physical_capped, PhysicalSamples, SpectralField};
pub use grid::{make_grid, Grid, GridSpec};
pub use synth::{synthesize, GeneratorSpec};

use crate::error::{Error, Result};

/// Littlewood-Paley index; `-1` is the low-frequency block.
pub type BandIndex = i32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpMode {
    /// `Delta_k`
    Annulus,
    /// `P_j = sum_{l <= j} Delta_l`
    Ball,
}

/// `<nabla>^s f`, multiplier `(1 + |zeta|^2)^{s/2}`.
pub fn bessel_potential(field: &SpectralField, s: f64) -> SpectralField {
    if s == 0.0 {
        return field.clone();
    }
    field.apply_symbol(|xi, e2| Complex64::new((1.0 + xi * xi + e2).powf(s / 2.0), 0.0))
}

/// `||<nabla>^s f||_{L^2}` from the coefficients.
pub fn sobolev_norm(field: &SpectralField, s: f64) -> f64 {
    let g = &field.grid;
    let ny = g.y_len();
    let mut acc = 0.0;
    for (ix, &xi) in g.xi().iter().enumerate() {
        let slab = &field.coeffs[ix * ny..(ix + 1) * ny];
        for (c, &e2) in slab.iter().zip(g.eta2()) {
            let n = c.norm_sqr();
            if n != 0.0 {
                acc += n * (1.0 + xi * xi + e2).powf(s);
            }
        }
    }
    (acc * g.dual_cell_volume()).sqrt()
}

/// `Delta_index f` (annulus) or `P_index f` (ball).
pub fn lp_project(field: &SpectralField, mode: LpMode, index: BandIndex) -> Result<SpectralField> {
    match mode {
        LpMode::Annulus if index < -1 => Err(Error::InvalidArgument(format!("annulus index {index} < -1"))),
        LpMode::Ball if index < 0 => Err(Error::InvalidArgument(format!("ball index {index} < 0"))),
        LpMode::Annulus => Ok(field.apply_radial(|rho| bump::lp_symbol(index, rho))),
        LpMode::Ball => Ok(field.apply_radial(|rho| bump::ball_symbol(index, rho))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn grid() -> Arc<Grid> {
        Arc::new(make_grid(2, &[20.0, 20.0], &[64, 64]).unwrap())
    }

    #[test]
    fn gaussian_l2_norm() {
        let g = Arc::new(make_grid(2, &[64.0, 64.0], &[256, 256]).unwrap());
        let f = synthesize(
            &g,
            &GeneratorSpec::Gaussian {
                sigma: 1.0,
                amplitude: 1.0,
                center: vec![],
            },
        )
        .unwrap();
        let want = std::f64::consts::PI.sqrt();
        assert!((f.l2_norm() / want - 1.0).abs() < 1e-6);
        assert!(f.boundary_mass_fraction() < 1e-8);
    }

    #[test]
    fn zero_and_determinism() {
        let g = grid();
        let z = synthesize(&g, &GeneratorSpec::Zero).unwrap();
        assert!(z.coeffs.iter().all(|c| *c == Complex64::default()));
        let spec = GeneratorSpec::RandomBand {
            band: 3,
            seed: 7,
            amplitude: 1.0,
        };
        let a = synthesize(&g, &spec).unwrap();
        let b = synthesize(&g, &spec).unwrap();
        assert_eq!(a.coeffs, b.coeffs);
        assert!(a.is_hermitian());
        assert_eq!(GeneratorSpec::parse("sinc"), Err(Error::UnknownGenerator("sinc".into())));
        assert_eq!(
            GeneratorSpec::parse("random_band:band=3,seed=7").unwrap(),
            spec
        );
    }

    #[test]
    fn bessel_examples() {
        let g = Arc::new(make_grid(2, &[2.0 * std::f64::consts::PI; 2], &[16, 16]).unwrap());
        let f = synthesize(&g, &GeneratorSpec::PlaneWave { mode: vec![1, 0], amplitude: 1.0 }).unwrap();
        let c0 = f.coeffs[16];
        assert_eq!(bessel_potential(&f, 2.0).coeffs[16], c0 * 2.0);
        assert_eq!(bessel_potential(&f, 0.0), f);
        // Unit mass: amplitude 1/sqrt(volume).
        let u = synthesize(
            &g,
            &GeneratorSpec::PlaneWave {
                mode: vec![3, -2],
                amplitude: 1.0 / (2.0 * std::f64::consts::PI),
            },
        )
        .unwrap();
        assert!((sobolev_norm(&u, 0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn annulus_keeps_inner_mode() {
        let g = Arc::new(make_grid(1, &[2.0 * std::f64::consts::PI], &[64]).unwrap());
        let f = synthesize(&g, &GeneratorSpec::PlaneWave { mode: vec![6], amplitude: 1.0 }).unwrap();
        let p = lp_project(&f, LpMode::Annulus, 2).unwrap();
        let ratio = p.coeffs[6].re / f.coeffs[6].re;
        assert!(ratio > 0.0 && ratio <= 1.0);
        assert!(lp_project(&f, LpMode::Annulus, -2).is_err());
        assert!(lp_project(&f, LpMode::Ball, -1).is_err());
    }

    #[test]
    fn full_low_pass_is_identity() {
        let g = grid();
        let f = synthesize(&g, &GeneratorSpec::RandomLowpass { radius: 8.0, seed: 1, amplitude: 1.0 }).unwrap();
        let j = g.zeta_max().log2().ceil() as i32 + 2;
        let p = lp_project(&f, LpMode::Ball, j).unwrap();
        assert_eq!(p.coeffs, f.coeffs);
    }
}
