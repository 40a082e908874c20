use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::bump::lp_symbol;
use super::field::SpectralField;
use super::grid::{signed, Grid};
use super::sobolev_norm;
use crate::error::{Error, Result};

/// Closed-form or seeded-random initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Zero,
    /// `amplitude * exp(-|x - center|^2 / (2 sigma^2))`.
    Gaussian {
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        center: Vec<f64>,
    },
    /// `amplitude * exp(i zeta_n . x)` for the signed lattice index `mode`.
    PlaneWave {
        mode: Vec<i64>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Real field with complex Gaussian coefficients weighted by the `Delta_band`
    /// symbol, scaled to `L^2` norm `amplitude`.
    RandomBand {
        band: i32,
        seed: u64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Real field with Gaussian coefficients under `exp(-|zeta|^2 / radius^2)`,
    /// scaled to `L^2` norm `amplitude`.
    RandomLowpass {
        radius: f64,
        seed: u64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Real field with `|c| = <zeta>^{-s - d/2 - delta}` and uniform random phases,
    /// scaled to `H^s` norm `amplitude`.
    Rough {
        s: f64,
        #[serde(default = "default_delta")]
        delta: f64,
        seed: u64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_delta() -> f64 {
    0.1
}

impl GeneratorSpec {
    /// Parse `name` or `name:key=value,key=value`.
    pub fn parse(text: &str) -> Result<GeneratorSpec> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut kv = std::collections::BTreeMap::new();
        for item in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("bad generator field `{item}`")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |k: &str, d: f64| -> Result<f64> {
            kv.get(k)
                .map(|v| v.parse::<f64>().map_err(|_| Error::InvalidArgument(format!("{k}={v}"))))
                .unwrap_or(Ok(d))
        };
        let seed = || -> Result<u64> {
            kv.get("seed")
                .map(|v| v.parse::<u64>().map_err(|_| Error::InvalidArgument(format!("seed={v}"))))
                .unwrap_or(Err(Error::InvalidArgument("random generator needs a seed".into())))
        };
        Ok(match name {
            "zero" => GeneratorSpec::Zero,
            "gaussian" => GeneratorSpec::Gaussian {
                sigma: num("sigma", 1.0)?,
                amplitude: num("amplitude", 1.0)?,
                center: Vec::new(),
            },
            "random_band" => GeneratorSpec::RandomBand {
                band: num("band", 0.0)? as i32,
                seed: seed()?,
                amplitude: num("amplitude", 1.0)?,
            },
            "random_lowpass" => GeneratorSpec::RandomLowpass {
                radius: num("radius", 4.0)?,
                seed: seed()?,
                amplitude: num("amplitude", 1.0)?,
            },
            "rough" => GeneratorSpec::Rough {
                s: num("s", 0.6)?,
                delta: num("delta", 0.1)?,
                seed: seed()?,
                amplitude: num("amplitude", 1.0)?,
            },
            other => return Err(Error::UnknownGenerator(other.to_string())),
        })
    }
}

/// Build the field described by `spec` on `grid`; deterministic in `(grid, spec)`.
pub fn synthesize(grid: &Arc<Grid>, spec: &GeneratorSpec) -> Result<SpectralField> {
    match spec {
        GeneratorSpec::Zero => Ok(SpectralField::zeros(grid.clone())),
        GeneratorSpec::Gaussian {
            sigma,
            amplitude,
            center,
        } => gaussian(grid, *sigma, *amplitude, center),
        GeneratorSpec::PlaneWave { mode, amplitude } => plane_wave(grid, mode, *amplitude),
        GeneratorSpec::RandomBand {
            band,
            seed,
            amplitude,
        } => {
            let b = *band;
            let f = random_real(grid, *seed, |rho, _| lp_symbol(b, rho))
                .with_tag(format!("random_band(k={b},seed={seed})"));
            normalize_l2(f, *amplitude, || format!("band {b} has no lattice modes"))
        }
        GeneratorSpec::RandomLowpass {
            radius,
            seed,
            amplitude,
        } => {
            let r2 = radius * radius;
            let f = random_real(grid, *seed, |rho, _| (-rho * rho / r2).exp())
                .with_tag(format!("random_lowpass(r={radius},seed={seed})"));
            normalize_l2(f, *amplitude, || "empty spectrum".into())
        }
        GeneratorSpec::Rough {
            s,
            delta,
            seed,
            amplitude,
        } => rough(grid, *s, *delta, *seed, *amplitude),
    }
}

fn normalize_l2(f: SpectralField, amplitude: f64, why: impl Fn() -> String) -> Result<SpectralField> {
    let n = f.l2_norm();
    if n == 0.0 {
        return Err(Error::InfeasibleOnGrid(why()));
    }
    Ok(f.scale(amplitude / n))
}

fn gaussian(grid: &Arc<Grid>, sigma: f64, amplitude: f64, center: &[f64]) -> Result<SpectralField> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma={sigma}")));
    }
    let d = grid.dim();
    if !center.is_empty() && center.len() != d {
        return Err(Error::InvalidArgument("gaussian center has wrong dimension".into()));
    }
    let res = grid.resolution();
    let mut vals = vec![Complex64::default(); grid.len()];
    for (flat, v) in vals.iter_mut().enumerate() {
        let mut rem = flat;
        let mut r2 = 0.0;
        for a in (0..d).rev() {
            let i = rem % res[a];
            rem /= res[a];
            let c = center.get(a).copied().unwrap_or(0.0);
            let l = grid.lengths()[a];
            // Distance to the nearest periodic image of the centre.
            let mut dx = grid.position(a, i) - c;
            dx -= l * (dx / l).round();
            r2 += dx * dx;
        }
        *v = Complex64::new(amplitude * (-r2 / (2.0 * sigma * sigma)).exp(), 0.0);
    }
    let mut f = SpectralField::from_physical(grid.clone(), vals, format!("gaussian(sigma={sigma})"));
    f.symmetrize();
    Ok(f)
}

fn plane_wave(grid: &Arc<Grid>, mode: &[i64], amplitude: f64) -> Result<SpectralField> {
    let d = grid.dim();
    if mode.len() != d {
        return Err(Error::InvalidArgument("plane wave mode has wrong dimension".into()));
    }
    let mut flat = 0;
    for a in 0..d {
        let n = grid.resolution()[a] as i64;
        if mode[a] < -n / 2 || mode[a] >= n / 2 {
            return Err(Error::InfeasibleOnGrid(format!("mode index {} on axis {a}", mode[a])));
        }
        flat = flat * n as usize + mode[a].rem_euclid(n) as usize;
    }
    let mut f = SpectralField::zeros(grid.clone()).with_tag(format!("plane_wave({mode:?})"));
    // u = A e^{i zeta.x} has coefficient A (2 pi)^{d/2} / prod(dzeta).
    let c = amplitude * (2.0 * std::f64::consts::PI).powf(d as f64 / 2.0) / grid.dual_cell_volume();
    f.coeffs[flat] = Complex64::new(c, 0.0);
    Ok(f)
}

/// Complex Gaussian draws in storage order, weighted, then made Hermitian with
/// Nyquist modes removed.
fn random_real(grid: &Arc<Grid>, seed: u64, weight: impl Fn(f64, usize) -> f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = Vec::with_capacity(grid.len());
    grid.for_each_mode(|flat, xi, e2| {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        let w = weight((xi * xi + e2).sqrt(), flat);
        coeffs.push(Complex64::new(a * w, b * w));
    });
    let mut f = SpectralField::from_coeffs(grid.clone(), coeffs, "random");
    f.symmetrize();
    f.zero_nyquist();
    f
}

fn rough(grid: &Arc<Grid>, s: f64, delta: f64, seed: u64, amplitude: f64) -> Result<SpectralField> {
    let d = grid.dim() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = Uniform::new(0.0, 2.0 * std::f64::consts::PI);
    let mut coeffs = Vec::with_capacity(grid.len());
    grid.for_each_mode(|_, xi, e2| {
        let m = (1.0 + xi * xi + e2).powf((-s - d / 2.0 - delta) / 2.0);
        coeffs.push(Complex64::from_polar(m, phase.sample(&mut rng)));
    });
    let mut f = SpectralField::from_coeffs(grid.clone(), coeffs, format!("rough(s={s},seed={seed})"));
    f.symmetrize();
    f.zero_nyquist();
    let n = sobolev_norm(&f, s);
    Ok(f.scale(amplitude / n))
}

/// Signed lattice index vector of storage position `flat`.
pub fn lattice_index(grid: &Grid, flat: usize) -> Vec<i64> {
    let res = grid.resolution();
    let mut out = vec![0; grid.dim()];
    let mut rem = flat;
    for a in (0..grid.dim()).rev() {
        out[a] = signed(rem % res[a], res[a]);
        rem /= res[a];
    }
    out
}
