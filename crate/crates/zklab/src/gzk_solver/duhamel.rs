use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Nonlinearity, SolverConfig};
use crate::error::{Error, Result};
use crate::fit::least_squares;
use crate::mixed_norms::{xs_norm, YsVariant};
use crate::propagator::{evolve, FreeFlow, SpaceTimeBlock};
use crate::spectral::SpectralField;

/// Duhamel map `U(t)u0 + int_0^t U(t - t') N(u(t')) dt'` on the block's time grid,
/// where `N(u) = -mu d_x(u^{k+1})`. The time integral is a cumulative trapezoid.
pub fn duhamel_apply(u: &SpaceTimeBlock, u0: &SpectralField, cfg: &SolverConfig) -> Result<SpaceTimeBlock> {
    if u.times.first() != Some(&0.0) {
        return Err(Error::TimeGridMismatch("trajectory must start at t = 0".into()));
    }
    if *u0.grid != *u.grid {
        return Err(Error::TimeGridMismatch("initial data lives on another grid".into()));
    }
    let nl = Nonlinearity::new(&u.grid, cfg.k_power, cfg.nonlinear_coeff, cfg.dealiasing)?;
    let pulled: Vec<Vec<Complex64>> = u
        .frames
        .par_iter()
        .zip(u.times.par_iter())
        .map(|(f, &t)| {
            let n = SpectralField::from_coeffs(u.grid.clone(), nl.eval(&f.coeffs), "N");
            evolve(&n, -t).coeffs
        })
        .collect();
    let len = u.grid.len();
    let mut acc = vec![Complex64::default(); len];
    let mut cumulative = Vec::with_capacity(u.times.len());
    cumulative.push(acc.clone());
    for m in 1..u.times.len() {
        let w = 0.5 * (u.times[m] - u.times[m - 1]);
        for i in 0..len {
            acc[i] += w * (pulled[m - 1][i] + pulled[m][i]);
        }
        cumulative.push(acc.clone());
    }
    let frames: Vec<SpectralField> = cumulative
        .into_par_iter()
        .zip(u.times.par_iter())
        .map(|(s, &t)| {
            let mut c = s;
            for (x, y) in c.iter_mut().zip(&u0.coeffs) {
                *x += y;
            }
            let mut f = evolve(&SpectralField::from_coeffs(u.grid.clone(), c, "duhamel"), t);
            f.symmetrize();
            f
        })
        .collect();
    SpaceTimeBlock::new(u.grid.clone(), u.times.clone(), frames)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardTrace {
    /// `||u^{(n+1)} - u^{(n)}||_{X^s_T}` for each iteration.
    pub iterate_diffs: Vec<f64>,
    /// `||u^{(0)}||_{X^s_T}`.
    pub initial_norm: f64,
    /// Geometric rate fitted to the positive diffs; 0 when fewer than two.
    pub contraction_factor: f64,
    pub converged: bool,
}

/// Runs the iteration and returns the last iterate, the trace and the failure, if any.
pub fn picard_iterate(u0: &SpectralField, cfg: &SolverConfig) -> Result<(SpaceTimeBlock, PicardTrace, Option<Error>)> {
    cfg.validate()?;
    let variant = cfg.variant.unwrap_or_else(|| YsVariant::for_dim(u0.grid.dim()));
    let times = cfg.schedule.times(cfg.horizon)?;
    let mut data = u0.clone();
    data.zero_nyquist();
    data.symmetrize();
    let mut cur = FreeFlow::new(data.clone(), times).materialize();
    let norm0 = xs_norm(&cur, cfg.s, variant, &cfg.ys)?.total;
    let tol = cfg.picard_tol * norm0;
    let mut diffs = Vec::new();
    let mut rising = 0;
    let mut failure = None;
    let mut converged = false;
    for it in 0..cfg.picard_max_iter {
        let next = duhamel_apply(&cur, &data, cfg)?;
        let diff = xs_norm(&next.sub(&cur), cfg.s, variant, &cfg.ys)?.total;
        cur = next;
        if !diff.is_finite() {
            failure = Some(Error::NoContraction { iterations: it + 1, last_diff: diff });
            diffs.push(diff);
            break;
        }
        if let Some(&prev) = diffs.last() {
            if diff >= prev {
                rising += 1;
            } else {
                rising = 0;
            }
        }
        diffs.push(diff);
        if diff <= tol {
            converged = true;
            break;
        }
        if rising >= 3 {
            failure = Some(Error::NoContraction { iterations: it + 1, last_diff: diff });
            break;
        }
    }
    let trace = PicardTrace {
        contraction_factor: contraction_factor(&diffs),
        iterate_diffs: diffs,
        initial_norm: norm0,
        converged,
    };
    Ok((cur, trace, failure))
}

/// Picard iteration for the Duhamel map, with diffs measured in `X^s_T`.
/// Running out of iterations while still contracting returns `converged = false`.
pub fn picard_solve(u0: &SpectralField, cfg: &SolverConfig) -> Result<(SpaceTimeBlock, PicardTrace)> {
    let (block, trace, failure) = picard_iterate(u0, cfg)?;
    match failure {
        Some(e) => Err(e),
        None => Ok((block, trace)),
    }
}

/// `exp` of the least-squares slope of `ln diff` against the iteration index.
pub fn contraction_factor(diffs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = diffs
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > 0.0 && d.is_finite())
        .map(|(i, d)| (i as f64, d.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    least_squares(&pts).0.exp()
}

/// Halves the horizon after each `NoContraction`, at most `max_halvings` times.
/// Returns the horizon that was finally used.
pub fn find_horizon(
    u0: &SpectralField,
    cfg: &SolverConfig,
    max_halvings: usize,
) -> Result<(SpaceTimeBlock, PicardTrace, Option<Error>, f64)> {
    let (block, trace, failure) = picard_iterate(u0, cfg)?;
    if max_halvings == 0 || !matches!(failure, Some(Error::NoContraction { .. })) {
        return Ok((block, trace, failure, cfg.horizon));
    }
    let mut next = cfg.clone();
    next.horizon /= 2.0;
    next.dt = next.dt.min(next.horizon);
    find_horizon(u0, &next, max_halvings - 1)
}
