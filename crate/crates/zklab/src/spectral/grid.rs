use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serializable description of a periodic box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lengths: Vec<f64>,
    pub resolution: Vec<usize>,
}

/// Periodic box `prod [-L_i/2, L_i/2)` sampled with `N_i` points per axis.
///
/// Axis 0 carries the `x` variable (frequency `xi`), the remaining axes carry
/// `y` (frequency `eta`). Arrays are row-major with axis 0 outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lengths: Vec<f64>,
    resolution: Vec<usize>,
    xi: Vec<f64>,
    eta2: Vec<f64>,
}

pub fn make_grid(dim: usize, lengths: &[f64], resolution: &[usize]) -> Result<Grid> {
    if lengths.len() != dim || resolution.len() != dim || dim == 0 {
        return Err(Error::DimensionMismatch {
            dim,
            lengths: lengths.len(),
            resolution: resolution.len(),
        });
    }
    if let Some(&n) = resolution.iter().find(|&&n| n < 8 || n % 2 != 0) {
        return Err(Error::InvalidResolution(n));
    }
    if let Some(&l) = lengths.iter().find(|&&l| !(l.is_finite() && l > 0.0)) {
        return Err(Error::InvalidLength(l));
    }
    let xi = axis_wavenumbers(lengths[0], resolution[0]);
    let mut eta2 = vec![0.0];
    for a in 1..dim {
        let w = axis_wavenumbers(lengths[a], resolution[a]);
        let mut next = Vec::with_capacity(eta2.len() * w.len());
        for &e in &eta2 {
            for &k in &w {
                next.push(e + k * k);
            }
        }
        eta2 = next;
    }
    Ok(Grid {
        lengths: lengths.to_vec(),
        resolution: resolution.to_vec(),
        xi,
        eta2,
    })
}

fn axis_wavenumbers(l: f64, n: usize) -> Vec<f64> {
    let dk = 2.0 * PI / l;
    (0..n).map(|i| signed(i, n) as f64 * dk).collect()
}

/// Signed lattice index of storage position `i` on an axis of `n` points.
#[inline]
pub fn signed(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl Grid {
    pub fn from_spec(spec: &GridSpec) -> Result<Grid> {
        make_grid(spec.lengths.len(), &spec.lengths, &spec.resolution)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            lengths: self.lengths.clone(),
            resolution: self.resolution.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    /// Total number of lattice points.
    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of points in one `x = const` slab.
    pub fn y_len(&self) -> usize {
        self.eta2.len()
    }

    /// `xi` for every storage index along axis 0.
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// `|eta|^2` for every storage index of a `y` slab.
    pub fn eta2(&self) -> &[f64] {
        &self.eta2
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.resolution[axis] as f64
    }

    pub fn dual_spacing(&self, axis: usize) -> f64 {
        2.0 * PI / self.lengths[axis]
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn dual_cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.dual_spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn nyquist(&self, axis: usize) -> f64 {
        PI * self.resolution[axis] as f64 / self.lengths[axis]
    }

    /// Largest `|zeta|` on the lattice.
    pub fn zeta_max(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.nyquist(a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest Littlewood-Paley index whose annulus meets the lattice.
    pub fn max_band(&self) -> i32 {
        let zm = self.zeta_max();
        let mut k = 0;
        while 2f64.powi(k) < zm {
            k += 1;
        }
        k
    }

    /// Physical coordinate of storage index `i` on `axis` (origin at index 0).
    pub fn position(&self, axis: usize, i: usize) -> f64 {
        signed(i, self.resolution[axis]) as f64 * self.spacing(axis)
    }

    /// Storage index of `-n` for the mode stored at `flat`.
    pub fn mirror(&self, flat: usize) -> usize {
        let mut rem = flat;
        let mut out = 0;
        let mut stride = 1;
        for a in (0..self.dim()).rev() {
            let n = self.resolution[a];
            let i = rem % n;
            rem /= n;
            out += ((n - i) % n) * stride;
            stride *= n;
        }
        out
    }

    /// True when any axis index of `flat` is the unpaired Nyquist index `N/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let mut rem = flat;
        for a in (0..self.dim()).rev() {
            let n = self.resolution[a];
            if rem % n == n / 2 {
                return true;
            }
            rem /= n;
        }
        false
    }

    /// Same box with every axis resolution multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Grid> {
        let res: Vec<usize> = self.resolution.iter().map(|n| n * factor).collect();
        make_grid(self.dim(), &self.lengths, &res)
    }

    /// Same resolution with every side multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Grid> {
        let len: Vec<f64> = self.lengths.iter().map(|l| l * factor).collect();
        make_grid(self.dim(), &len, &self.resolution)
    }

    /// Storage index on `self` of the mode stored at `flat` on `other`, if it fits.
    pub fn transfer_index(&self, other: &Grid, flat: usize) -> Option<usize> {
        let mut rem = flat;
        let mut out = 0;
        let mut stride = 1;
        for a in (0..self.dim()).rev() {
            let n_src = other.resolution[a];
            let n_dst = self.resolution[a];
            let s = signed(rem % n_src, n_src);
            rem /= n_src;
            let half = (n_dst / 2) as i64;
            if s < -half || s >= half {
                return None;
            }
            out += (s.rem_euclid(n_dst as i64) as usize) * stride;
            stride *= n_dst;
        }
        Some(out)
    }

    /// Call `f(flat, xi, |eta|^2)` for every mode in storage order.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, f64, f64)) {
        let ny = self.y_len();
        for (ix, &xi) in self.xi.iter().enumerate() {
            for (iy, &e2) in self.eta2.iter().enumerate() {
                f(ix * ny + iy, xi, e2);
            }
        }
    }
}
