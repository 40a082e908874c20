//! Quadrature for `I(t, z) = int psi(|xi|) exp(i t xi_1 |xi|^2 + i z.xi) dxi`.
//!
//! In polar coordinates the phase is `v.omega` with `v = r (t r^2 e_1 + z)`, so
//! the sphere integral is the closed form `A_d(|v|)` and only a radial
//! trapezoid rule remains. The lattice method sums the integrand directly on a
//! Cartesian grid and serves as an independent check.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::ScalingFitReport;
use crate::spectral::bump::kernel_bump;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelMethod {
    Radial { density: f64, min_nodes: usize, budget: usize },
    Lattice { density: f64, budget: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: KernelMethod,
    /// With `phase = false` the integrand reduces to `psi(|xi|)`.
    pub phase: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            method: KernelMethod::Radial {
                density: 4.0,
                min_nodes: 2048,
                budget: 1 << 22,
            },
            phase: true,
        }
    }
}

impl QuadratureSpec {
    pub fn lattice(density: f64) -> Self {
        QuadratureSpec {
            method: KernelMethod::Lattice {
                density,
                budget: 1 << 25,
            },
            phase: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub t: f64,
    pub z: Vec<f64>,
    pub value: Complex64,
}

/// Cell size keeping the phase change per cell below `pi/4`.
fn cell(t: f64, z: &[f64], density: f64) -> f64 {
    let zn = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    PI / 4.0 / (12.0 * t.abs() + zn + 1.0) / density
}

/// `int_{S^{d-1}} exp(i v.omega) d omega` as a function of `|v|`.
fn sphere_average(d: usize, s: f64) -> f64 {
    match d {
        1 => 2.0 * s.cos(),
        2 => 2.0 * PI * libm::j0(s),
        3 => {
            if s < 1e-4 {
                4.0 * PI * (1.0 - s * s / 6.0)
            } else {
                4.0 * PI * s.sin() / s
            }
        }
        4 => {
            if s < 1e-4 {
                2.0 * PI * PI * (1.0 - s * s / 8.0)
            } else {
                4.0 * PI * PI * libm::j1(s) / s
            }
        }
        _ => unreachable!(),
    }
}

pub fn dispersion_kernel(t: f64, z: &[f64], d: usize, spec: &QuadratureSpec) -> Result<KernelSample> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument("kernel needs a finite nonzero t".into()));
    }
    if !(1..=4).contains(&d) || z.len() != d {
        return Err(Error::InvalidArgument(format!("kernel dimension {d} with |z| entries {}", z.len())));
    }
    let value = match spec.method {
        KernelMethod::Radial {
            density,
            min_nodes,
            budget,
        } => radial(t, z, d, density, min_nodes, budget, spec.phase)?,
        KernelMethod::Lattice { density, budget } => lattice(t, z, d, density, budget, spec.phase)?,
    };
    Ok(KernelSample {
        t,
        z: z.to_vec(),
        value,
    })
}

fn radial(
    t: f64,
    z: &[f64],
    d: usize,
    density: f64,
    min_nodes: usize,
    budget: usize,
    phase: bool,
) -> Result<Complex64> {
    let span = 1.5;
    let nodes = ((span / cell(t, z, density)).ceil() as usize).max(min_nodes);
    if nodes > budget {
        return Err(Error::QuadratureBudgetExceeded { required: nodes, budget });
    }
    let h = span / nodes as f64;
    let mut acc = 0.0;
    for i in 1..nodes {
        let r = 0.5 + i as f64 * h;
        let w = r.powi(d as i32 - 1) * kernel_bump(r);
        let s = if phase {
            let mut v2 = (t * r * r + z[0]).powi(2);
            for zi in &z[1..] {
                v2 += zi * zi;
            }
            r * v2.sqrt()
        } else {
            0.0
        };
        acc += w * sphere_average(d, s);
    }
    Ok(Complex64::new(acc * h, 0.0))
}

fn lattice(t: f64, z: &[f64], d: usize, density: f64, budget: usize, phase: bool) -> Result<Complex64> {
    let h0 = cell(t, z, density);
    let per_axis = (4.0 / h0).ceil() as usize + 1;
    let total = per_axis.checked_pow(d as u32).unwrap_or(usize::MAX);
    if total > budget {
        return Err(Error::QuadratureBudgetExceeded { required: total, budget });
    }
    let h = 4.0 / (per_axis - 1) as f64;
    let coord = |i: usize| -2.0 + i as f64 * h;
    let inner: usize = per_axis.pow(d as u32 - 1);
    let sum: Complex64 = (0..per_axis)
        .into_par_iter()
        .map(|i0| {
            let mut acc = Complex64::default();
            let mut xi = vec![0.0; d];
            xi[0] = coord(i0);
            for rest in 0..inner {
                let mut rem = rest;
                for a in (1..d).rev() {
                    xi[a] = coord(rem % per_axis);
                    rem /= per_axis;
                }
                let r2: f64 = xi.iter().map(|v| v * v).sum();
                let w = kernel_bump(r2.sqrt());
                if w == 0.0 {
                    continue;
                }
                let ph = if phase {
                    t * xi[0] * r2 + xi.iter().zip(z).map(|(a, b)| a * b).sum::<f64>()
                } else {
                    0.0
                };
                acc += Complex64::from_polar(w, ph);
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(sum * h.powi(d as i32))
}

/// How the supremum over `z` is approximated for each `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZStrategy {
    Origin,
    /// `z = 0` plus `z = -gamma t grad Phi(omega)` for unit directions `omega`
    /// at `n_angles` angles in `[0, pi]` from the `xi_1` axis and
    /// `gamma = 2^e`, `e` in `[-2, 2]` with step `gamma_step`.
    StationaryRay { n_angles: usize, gamma_step: f64 },
}

impl Default for ZStrategy {
    fn default() -> Self {
        ZStrategy::StationaryRay {
            n_angles: 13,
            gamma_step: 0.25,
        }
    }
}

impl ZStrategy {
    pub fn candidates(&self, t: f64, d: usize) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; d]];
        if let ZStrategy::StationaryRay { n_angles, gamma_step } = *self {
            let n_g = (4.0 / gamma_step).round() as usize + 1;
            for a in 0..n_angles {
                let ang = PI * a as f64 / (n_angles.max(2) - 1) as f64;
                let (w1, w2) = (ang.cos(), ang.sin());
                // grad of xi_1 |xi|^2 at |xi| = 1.
                let g1 = 3.0 * w1 * w1 + w2 * w2;
                let g2 = 2.0 * w1 * w2;
                for gi in 0..n_g {
                    let gamma = 2f64.powf(-2.0 + gi as f64 * gamma_step);
                    let mut z = vec![0.0; d];
                    z[0] = -gamma * t * g1;
                    if d > 1 {
                        z[1] = -gamma * t * g2;
                    }
                    out.push(z);
                }
            }
        }
        out
    }
}

/// Fit `log2 sup_z |I(t, z)|` against `log2 t`.
pub fn decay_fit(t_list: &[f64], z_strategy: &ZStrategy, d: usize, spec: &QuadratureSpec) -> Result<ScalingFitReport> {
    if t_list.len() < 8 {
        return Err(Error::InvalidArgument("decay fit needs at least 8 times".into()));
    }
    let lo = t_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = t_list.iter().cloned().fold(0.0, f64::max);
    if !(lo > 0.0) || (hi / lo).log10() < 1.5 {
        return Err(Error::InvalidArgument("decay fit needs positive times spanning 1.5 decades".into()));
    }
    let mut pts = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let cands = z_strategy.candidates(t, d);
        let vals: Vec<Result<f64>> = cands
            .par_iter()
            .map(|z| dispersion_kernel(t, z, d, spec).map(|k| k.value.norm()))
            .collect();
        let mut best = 0.0f64;
        for v in vals {
            best = best.max(v?);
        }
        pts.push((t.log2(), best.log2()));
    }
    ScalingFitReport::fit(pts)
}

/// `int_{R^d} psi(|xi|) d xi` by a dense 1-d radial rule.
pub fn bump_mass(d: usize) -> f64 {
    let n = 20_000;
    let h = 1.5 / n as f64;
    let area = match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => panic!("dimension {d} not supported"),
    };
    area * (1..n)
        .map(|i| {
            let r = 0.5 + i as f64 * h;
            r.powi(d as i32 - 1) * kernel_bump(r)
        })
        .sum::<f64>()
        * h
}
