use serde::{Deserialize, Serialize};

use super::{Dealiasing, Nonlinearity};
use crate::error::{Error, Result};
use crate::spectral::bump::{ball_symbol, lp_symbol};
use crate::spectral::{BandIndex, SpectralField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaproductReport {
    pub band: BandIndex,
    pub power: u32,
    /// First telescoping index kept; lower terms cannot reach `band`.
    pub j_lo: BandIndex,
    pub j_hi: BandIndex,
    pub lhs_norm: f64,
    /// `||lhs - rhs|| / ||lhs||`, or `||rhs||` when `lhs` vanishes.
    pub relative_error: f64,
}

/// Compares `Delta_band(u^{k+1})` with its telescoped form
/// `Delta_band[(P_{j_lo} u)^m + sum_j Delta_{j+1}u sum_i (P_{j+1}u)^{m-1-i}(P_j u)^i]`.
/// Products are formed without aliasing on a padded lattice.
pub fn paraproduct_check(u: &SpectralField, k_power: u32, band: BandIndex) -> Result<ParaproductReport> {
    if band < -1 {
        return Err(Error::InvalidArgument(format!("band {band} < -1")));
    }
    let m = k_power + 1;
    let grid = &u.grid;
    let nl = Nonlinearity::new(grid, k_power, 1.0, Dealiasing::FullPadding)?;
    let j_hi = grid.max_band();
    let log2m = (m as f64).log2().ceil() as i32;
    let j_lo = (band - 5 - log2m).clamp(0, j_hi);
    let ball = |j: i32| nl.physical(&u.apply_radial(move |r| ball_symbol(j, r)).coeffs);
    let mi = m as i32;
    let mut acc: Vec<f64> = ball(j_lo).iter().map(|v| v.powi(mi)).collect();
    let mut lower = ball(j_lo);
    for j in j_lo..j_hi {
        let upper = ball(j + 1);
        for ((a, &hi), &lo) in acc.iter_mut().zip(&upper).zip(&lower) {
            let mut s = 0.0;
            for i in 0..mi {
                s += hi.powi(mi - 1 - i) * lo.powi(i);
            }
            *a += (hi - lo) * s;
        }
        lower = upper;
    }
    let full: Vec<f64> = nl.physical(&u.coeffs).iter().map(|v| v.powi(mi)).collect();
    let delta = |vals: &[f64]| -> SpectralField {
        SpectralField::from_coeffs(grid.clone(), nl.project(vals), "p").apply_radial(|r| lp_symbol(band, r))
    };
    let lhs = delta(&full);
    let rhs = delta(&acc);
    let lhs_norm = lhs.l2_norm();
    let err = lhs.sub(&rhs).l2_norm();
    Ok(ParaproductReport {
        band,
        power: k_power,
        j_lo,
        j_hi,
        lhs_norm,
        relative_error: if lhs_norm > 0.0 { err / lhs_norm } else { err },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, synthesize, GeneratorSpec};
    use std::sync::Arc;

    #[test]
    fn identity_holds_on_random_data() {
        let g = Arc::new(make_grid(2, &[16.0, 16.0], &[48, 48]).unwrap());
        for seed in 0..3 {
            let u = synthesize(&g, &GeneratorSpec::RandomLowpass { radius: 8.0, seed, amplitude: 1.0 }).unwrap();
            for band in [0, 2, 3] {
                let r = paraproduct_check(&u, 2, band).unwrap();
                assert!(r.relative_error < 1e-10, "{r:?}");
            }
        }
    }

    #[test]
    fn zero_field() {
        let g = Arc::new(make_grid(2, &[8.0, 8.0], &[16, 16]).unwrap());
        let r = paraproduct_check(&SpectralField::zeros(g), 1, 1).unwrap();
        assert_eq!(r.relative_error, 0.0);
    }
}
