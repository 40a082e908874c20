use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{solve, SolverConfig};
use crate::error::{Error, Result};
use crate::mixed_norms::{mixed_norm, Axis, MixedNormSpec};
use crate::spectral::bump::ball_symbol;
use crate::spectral::SpectralField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseConfig {
    pub solver: SolverConfig,
    /// Truncation frequencies `N = 2^j`.
    pub truncations: Vec<u32>,
    pub epsilons: Vec<f64>,
    /// Horizons `tau <= T` for the exceedance measure.
    pub taus: Vec<f64>,
    pub oversample: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub n: u32,
    /// `||u - u_N||_{L^4_{x,y} L^inf_T}`.
    pub diff_norm: f64,
    /// `||(I - P_N) u0||_{L^2}`.
    pub tail_l2: f64,
    /// `(3/eps)^4 diff^4 + (3/eps)^2 tail^2` for each configured `eps`.
    pub chebyshev_bound: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceRow {
    pub tau: f64,
    pub epsilon: f64,
    /// Lattice measure of `{ max_{t <= tau} |u(t) - u0| > eps }`.
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseReport {
    pub rows: Vec<TruncationRow>,
    pub exceedance: Vec<ExceedanceRow>,
    pub diffs_decreasing: bool,
    /// Exceedance never grows as `tau` shrinks, for every `eps`.
    pub exceedance_monotone: bool,
    /// Exceedance never grows as `eps` grows, for every `tau`.
    pub exceedance_monotone_eps: bool,
}

/// `P_j` with `2^j = n`.
pub fn truncate(u0: &SpectralField, n: u32) -> Result<SpectralField> {
    if !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("truncation {n} is not a power of two")));
    }
    let j = n.trailing_zeros() as i32;
    let ny = (0..u0.grid.dim()).map(|a| u0.grid.nyquist(a)).fold(f64::INFINITY, f64::min);
    if 8.0 * n as f64 > ny {
        return Err(Error::InfeasibleOnGrid(format!("P_N with N = {n} needs Nyquist >= {}, have {ny:.3}", 8 * n)));
    }
    Ok(u0.apply_radial(move |r| ball_symbol(j, r)))
}

/// Convergence of solutions from truncated data and the exceedance measure of `u - u0`.
pub fn pointwise_experiment(u0: &SpectralField, cfg: &PointwiseConfig) -> Result<PointwiseReport> {
    let truncated: Vec<SpectralField> = cfg.truncations.iter().map(|&n| truncate(u0, n)).collect::<Result<_>>()?;
    let mut inputs = vec![u0.clone()];
    inputs.extend(truncated.iter().cloned());
    let outs: Vec<_> = inputs.par_iter().map(|f| solve(f, &cfg.solver)).collect::<Result<Vec<_>>>()?;
    let reference = &outs[0].block;
    let spec = MixedNormSpec::new(vec![(vec![Axis::X, Axis::Y], 4.0), (vec![Axis::T], f64::INFINITY)])?;
    let mut rows = Vec::new();
    for ((&n, tr), out) in cfg.truncations.iter().zip(&truncated).zip(&outs[1..]) {
        let diff_norm = mixed_norm(&reference.sub(&out.block), &spec, cfg.oversample)?;
        let tail_l2 = u0.sub(tr).l2_norm();
        let chebyshev_bound = cfg
            .epsilons
            .iter()
            .map(|&e| (3.0 / e).powi(4) * diff_norm.powi(4) + (3.0 / e).powi(2) * tail_l2.powi(2))
            .collect();
        rows.push(TruncationRow { n, diff_norm, tail_l2, chebyshev_bound });
    }
    let mut base = u0.clone();
    base.zero_nyquist();
    let v0: Vec<f64> = base.to_physical().iter().map(|z| z.re).collect();
    let cell = u0.grid.cell_volume();
    let mut exceedance = Vec::new();
    let mut eps = cfg.epsilons.clone();
    eps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut taus = cfg.taus.clone();
    taus.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut sup = vec![0.0f64; v0.len()];
    let mut by_tau = Vec::new();
    for &tau in &taus {
        sup.iter_mut().for_each(|s| *s = 0.0);
        for (t, f) in reference.times.iter().zip(&reference.frames) {
            if *t > tau * (1.0 + 1e-12) {
                continue;
            }
            for ((s, z), b) in sup.iter_mut().zip(f.to_physical()).zip(&v0) {
                *s = s.max((z.re - b).abs());
            }
        }
        let mut per_eps = Vec::new();
        for &e in &eps {
            let measure = sup.iter().filter(|&&s| s > e).count() as f64 * cell;
            exceedance.push(ExceedanceRow { tau, epsilon: e, measure });
            per_eps.push(measure);
        }
        by_tau.push(per_eps);
    }
    let diffs_decreasing = rows.windows(2).all(|w| w[1].diff_norm < w[0].diff_norm);
    let exceedance_monotone = by_tau.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b <= a));
    let exceedance_monotone_eps = by_tau.iter().all(|row| row.windows(2).all(|w| w[1] <= w[0]));
    Ok(PointwiseReport {
        rows,
        exceedance,
        diffs_decreasing,
        exceedance_monotone,
        exceedance_monotone_eps,
    })
}
