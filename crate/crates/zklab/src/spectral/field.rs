use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::fft_nd;
use super::grid::{signed, Grid};
use crate::error::{Error, Result};

/// Largest padded lattice `evaluate_physical` will allocate by default.
pub const DEFAULT_POINT_CAP: usize = 1 << 26;

/// Fourier coefficients `c(zeta) = (2 pi)^{-d/2} int u(x) e^{-i zeta.x} dx`
/// of a function on a periodic box, indexed by the grid's frequency lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Arc<Grid>,
    pub coeffs: Vec<Complex64>,
    pub tag: String,
}

/// Values of a trigonometric polynomial on a (possibly refined) lattice.
#[derive(Debug, Clone)]
pub struct PhysicalSamples {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

fn forward_scale(g: &Grid) -> f64 {
    (2.0 * PI).powf(-(g.dim() as f64) / 2.0) * g.cell_volume()
}

fn inverse_scale(g: &Grid) -> f64 {
    (2.0 * PI).powf(-(g.dim() as f64) / 2.0) * g.dual_cell_volume()
}

impl SpectralField {
    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        SpectralField {
            grid,
            coeffs: vec![Complex64::default(); n],
            tag: "zero".into(),
        }
    }

    pub fn from_coeffs(grid: Arc<Grid>, coeffs: Vec<Complex64>, tag: impl Into<String>) -> Self {
        assert_eq!(coeffs.len(), grid.len(), "coefficient count must match grid");
        SpectralField {
            grid,
            coeffs,
            tag: tag.into(),
        }
    }

    /// Transform samples taken at the grid's lattice points.
    pub fn from_physical(grid: Arc<Grid>, mut values: Vec<Complex64>, tag: impl Into<String>) -> Self {
        assert_eq!(values.len(), grid.len());
        fft_nd(&mut values, grid.resolution(), false);
        let sc = forward_scale(&grid);
        values.iter_mut().for_each(|v| *v *= sc);
        Self::from_coeffs(grid, values, tag)
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    /// Physical-space `L^2` norm through Parseval.
    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dual_cell_volume()).sqrt()
    }

    /// Multiply every coefficient by `symbol(xi, |eta|^2)`.
    pub fn apply_symbol<F>(&self, symbol: F) -> SpectralField
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let mut out = self.clone();
        out.apply_symbol_in_place(symbol);
        out
    }

    pub fn apply_symbol_in_place<F>(&mut self, symbol: F)
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let g = self.grid.clone();
        let ny = g.y_len();
        let eta2 = g.eta2();
        self.coeffs
            .par_chunks_mut(ny)
            .zip(g.xi().par_iter())
            .for_each(|(slab, &xi)| {
                for (c, &e2) in slab.iter_mut().zip(eta2) {
                    *c *= symbol(xi, e2);
                }
            });
    }

    /// Multiply by a real symbol of `|zeta|`.
    pub fn apply_radial<F>(&self, symbol: F) -> SpectralField
    where
        F: Fn(f64) -> f64 + Sync,
    {
        self.apply_symbol(|xi, e2| Complex64::new(symbol((xi * xi + e2).sqrt()), 0.0))
    }

    pub fn scale(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &SpectralField) -> SpectralField {
        assert_eq!(*self.grid, *other.grid, "fields live on different grids");
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .zip(&other.coeffs)
            .for_each(|(x, y)| *x += a * y);
        out
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        self.axpy(-1.0, other)
    }

    /// Project onto coefficients of real-valued functions (`c(-n) = conj c(n)`).
    ///
    /// The pair average is formed symmetrically so the result is exactly Hermitian.
    pub fn symmetrize(&mut self) {
        let g = self.grid.clone();
        let src = self.coeffs.clone();
        for (flat, c) in self.coeffs.iter_mut().enumerate() {
            let m = g.mirror(flat);
            *c = (src[flat] + src[m].conj()) * 0.5;
        }
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.coeffs.len()).all(|f| self.coeffs[self.grid.mirror(f)] == self.coeffs[f].conj())
    }

    /// Zero every mode carrying an unpaired Nyquist index.
    pub fn zero_nyquist(&mut self) {
        let g = self.grid.clone();
        for (flat, c) in self.coeffs.iter_mut().enumerate() {
            if g.is_nyquist(flat) {
                *c = Complex64::default();
            }
        }
    }

    /// Copy coefficients onto another lattice with the same box, truncating or
    /// zero-padding. Modes that do not fit are dropped.
    pub fn transfer(&self, target: Arc<Grid>) -> SpectralField {
        assert_eq!(target.lengths(), self.grid.lengths(), "transfer needs equal boxes");
        let mut out = vec![Complex64::default(); target.len()];
        for (flat, &c) in self.coeffs.iter().enumerate() {
            if c != Complex64::default() {
                if let Some(t) = target.transfer_index(&self.grid, flat) {
                    out[t] = c;
                }
            }
        }
        SpectralField::from_coeffs(target, out, self.tag.clone())
    }

    /// Plain inverse transform onto the grid's own lattice.
    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut v = self.coeffs.clone();
        fft_nd(&mut v, self.grid.resolution(), true);
        let sc = inverse_scale(&self.grid);
        v.iter_mut().for_each(|x| *x *= sc);
        v
    }

    /// Direct evaluation of the trigonometric interpolant at an arbitrary point.
    pub fn value_at(&self, point: &[f64]) -> Complex64 {
        let g = &self.grid;
        assert_eq!(point.len(), g.dim());
        let mut phases: Vec<Vec<Complex64>> = Vec::with_capacity(g.dim());
        for (a, &x) in point.iter().enumerate() {
            let n = g.resolution()[a];
            let dk = g.dual_spacing(a);
            phases.push(
                (0..n)
                    .map(|i| Complex64::from_polar(1.0, signed(i, n) as f64 * dk * x))
                    .collect(),
            );
        }
        let mut acc = Complex64::default();
        for (flat, &c) in self.coeffs.iter().enumerate() {
            if c == Complex64::default() {
                continue;
            }
            let mut rem = flat;
            let mut e = Complex64::new(1.0, 0.0);
            for a in (0..g.dim()).rev() {
                let n = g.resolution()[a];
                e *= phases[a][rem % n];
                rem /= n;
            }
            acc += c * e;
        }
        acc * inverse_scale(g)
    }

    /// Fraction of `int |u|^2` carried by lattice cells adjacent to the box boundary.
    pub fn boundary_mass_fraction(&self) -> f64 {
        let g = &self.grid;
        let vals = self.to_physical();
        let res = g.resolution();
        let mut total = 0.0;
        let mut edge = 0.0;
        for (flat, v) in vals.iter().enumerate() {
            let w = v.norm_sqr();
            total += w;
            let mut rem = flat;
            let mut near = false;
            for a in (0..g.dim()).rev() {
                let n = res[a];
                let i = rem % n;
                rem /= n;
                if i == n / 2 || i == n / 2 - 1 {
                    near = true;
                }
            }
            if near {
                edge += w;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }
}

/// Sample the trigonometric interpolant of `field` on a lattice refined by
/// `oversample` per axis.
pub fn evaluate_physical(field: &SpectralField, oversample: usize) -> Result<PhysicalSamples> {
    evaluate_physical_capped(field, oversample, DEFAULT_POINT_CAP)
}

pub fn evaluate_physical_capped(
    field: &SpectralField,
    oversample: usize,
    cap: usize,
) -> Result<PhysicalSamples> {
    if oversample == 0 || !oversample.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "oversample factor {oversample} is not a power of two"
        )));
    }
    let required = field.grid.len() * oversample.pow(field.grid.dim() as u32);
    if required > cap {
        return Err(Error::ResolutionOverflow { required, cap });
    }
    if oversample == 1 {
        return Ok(PhysicalSamples {
            grid: (*field.grid).clone(),
            values: field.to_physical(),
        });
    }
    let fine = Arc::new(field.grid.refined(oversample)?);
    let padded = field.transfer(fine.clone());
    let values = padded.to_physical();
    Ok(PhysicalSamples {
        grid: (*fine).clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::make_grid;

    fn grid2() -> Arc<Grid> {
        Arc::new(make_grid(2, &[6.0, 9.0], &[16, 12]).unwrap())
    }

    fn mode(g: &Arc<Grid>, n: [usize; 2]) -> SpectralField {
        let mut f = SpectralField::zeros(g.clone());
        f.coeffs[n[0] * g.y_len() + n[1]] = Complex64::new(1.0, 0.0);
        f
    }

    #[test]
    fn single_mode_is_plane_wave_on_fine_lattice() {
        let g = grid2();
        let f = mode(&g, [3, 10]);
        let s = evaluate_physical(&f, 2).unwrap();
        let (zx, zy) = (g.xi()[3], -2.0 * 2.0 * PI / 9.0);
        let amp = inverse_scale(&g);
        for ix in 0..32 {
            for iy in 0..24 {
                let x = s.grid.position(0, ix);
                let y = s.grid.position(1, iy);
                let want = Complex64::from_polar(amp, zx * x + zy * y);
                assert!((s.values[ix * 24 + iy] - want).norm() < 1e-12 * amp.max(1.0));
            }
        }
    }

    #[test]
    fn parseval_for_physical_samples() {
        let g = grid2();
        let vals: Vec<Complex64> = (0..g.len())
            .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let phys = (vals.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.cell_volume()).sqrt();
        let f = SpectralField::from_physical(g.clone(), vals.clone(), "t");
        assert!((f.l2_norm() - phys).abs() < 1e-12 * phys);
        let back = f.to_physical();
        for (a, b) in back.iter().zip(&vals) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn oversampled_sup_dominates() {
        let g = grid2();
        let f = mode(&g, [2, 1]).add(&mode(&g, [5, 3]).scale(0.7));
        let m1 = evaluate_physical(&f, 1).unwrap().values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let m2 = evaluate_physical(&f, 2).unwrap().values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(m2 >= m1);
    }

    #[test]
    fn overflow_cap() {
        let f = mode(&grid2(), [1, 1]);
        assert!(matches!(
            evaluate_physical_capped(&f, 8, 10_000),
            Err(Error::ResolutionOverflow { .. })
        ));
        assert!(evaluate_physical_capped(&f, 3, 1 << 20).is_err());
    }

    #[test]
    fn value_at_matches_lattice() {
        let g = grid2();
        let f = mode(&g, [2, 1]).add(&mode(&g, [5, 7]).scale(0.3));
        let vals = f.to_physical();
        let p = [g.position(0, 5), g.position(1, 9)];
        assert!((f.value_at(&p) - vals[5 * 12 + 9]).norm() < 1e-13);
    }

    #[test]
    fn symmetrize_is_exact() {
        let g = grid2();
        let mut f = SpectralField::from_coeffs(
            g.clone(),
            (0..g.len()).map(|i| Complex64::new(i as f64 * 0.1, (i as f64).sin())).collect(),
            "x",
        );
        f.symmetrize();
        assert!(f.is_hermitian());
        let v = f.to_physical();
        assert!(v.iter().all(|z| z.im.abs() < 1e-12));
    }
}
