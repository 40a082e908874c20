//! The free group `U(t)`, sampled trajectories and the dispersion-kernel oracle.

pub mod kernel;

use std::borrow::Cow;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

pub use kernel::{decay_fit, dispersion_kernel, KernelMethod, KernelSample, QuadratureSpec, ZStrategy};

/// Dispersion relation `xi (xi^2 + |eta|^2)`.
#[inline]
pub fn zk_symbol(xi: f64, eta2: f64) -> f64 {
    xi * (xi * xi + eta2)
}

/// `U(t) f`: multiply each coefficient by `exp(i t xi (xi^2 + |eta|^2))`.
pub fn evolve(field: &SpectralField, t: f64) -> SpectralField {
    if t == 0.0 {
        return field.clone();
    }
    field.apply_symbol(|xi, e2| Complex64::from_polar(1.0, t * zk_symbol(xi, e2)))
}

/// Sampling of `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeSchedule {
    /// `n` equispaced samples including both endpoints.
    Uniform { n: usize },
    /// `0` followed by `n` geometric samples from `t_min * T` to `T`.
    Geometric { n: usize, t_min: f64 },
    /// Union of a uniform and a geometric schedule, sorted and deduplicated.
    Mixed { uniform: usize, geometric: usize, t_min: f64 },
}

impl TimeSchedule {
    pub fn times(&self, horizon: f64) -> Result<Vec<f64>> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!("horizon {horizon} must be positive")));
        }
        let uniform = |n: usize| -> Result<Vec<f64>> {
            if n < 2 {
                return Err(Error::InvalidArgument("need at least 2 time samples".into()));
            }
            // i*T/(n-1) keeps shared samples identical when n-1 doubles.
            Ok((0..n).map(|i| horizon * (i as f64 / (n - 1) as f64)).collect())
        };
        let geometric = |n: usize, t_min: f64| -> Result<Vec<f64>> {
            if n < 2 || !(t_min > 0.0 && t_min < 1.0) {
                return Err(Error::InvalidArgument("geometric schedule needs n >= 2, 0 < t_min < 1".into()));
            }
            let mut v = vec![0.0];
            let lr = t_min.ln();
            v.extend((0..n).map(|i| horizon * (lr * (1.0 - i as f64 / (n - 1) as f64)).exp()));
            *v.last_mut().unwrap() = horizon;
            Ok(v)
        };
        let mut out = match *self {
            TimeSchedule::Uniform { n } => uniform(n)?,
            TimeSchedule::Geometric { n, t_min } => geometric(n, t_min)?,
            TimeSchedule::Mixed { uniform: nu, geometric: ng, t_min } => {
                let mut v = uniform(nu)?;
                v.extend(geometric(ng, t_min)?);
                v
            }
        };
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        Ok(out)
    }
}

/// Anything that yields the frames of a sampled trajectory.
pub trait FrameSource: Sync {
    fn grid(&self) -> &Arc<Grid>;
    fn times(&self) -> &[f64];
    fn frame(&self, i: usize) -> Cow<'_, SpectralField>;
    fn len(&self) -> usize {
        self.times().len()
    }
    fn is_empty(&self) -> bool {
        self.times().is_empty()
    }
}

/// Materialized trajectory: one field per sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeBlock {
    pub grid: Arc<Grid>,
    pub times: Vec<f64>,
    pub frames: Vec<SpectralField>,
}

impl SpaceTimeBlock {
    pub fn new(grid: Arc<Grid>, times: Vec<f64>, frames: Vec<SpectralField>) -> Result<Self> {
        if times.len() != frames.len() {
            return Err(Error::TimeGridMismatch(format!(
                "{} times for {} frames",
                times.len(),
                frames.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::TimeGridMismatch("times must increase strictly".into()));
        }
        if frames.iter().any(|f| *f.grid != *grid) {
            return Err(Error::TimeGridMismatch("frames on different grids".into()));
        }
        Ok(SpaceTimeBlock { grid, times, frames })
    }

    pub fn zeros(grid: Arc<Grid>, times: Vec<f64>) -> Self {
        let frames = times.iter().map(|_| SpectralField::zeros(grid.clone())).collect();
        SpaceTimeBlock { grid, times, frames }
    }

    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn map_frames(&self, f: impl Fn(&SpectralField) -> SpectralField + Sync + Send) -> SpaceTimeBlock {
        use rayon::prelude::*;
        SpaceTimeBlock {
            grid: self.grid.clone(),
            times: self.times.clone(),
            frames: self.frames.par_iter().map(f).collect(),
        }
    }

    pub fn sub(&self, other: &SpaceTimeBlock) -> SpaceTimeBlock {
        assert_eq!(self.times, other.times);
        SpaceTimeBlock {
            grid: self.grid.clone(),
            times: self.times.clone(),
            frames: self.frames.iter().zip(&other.frames).map(|(a, b)| a.sub(b)).collect(),
        }
    }
}

impl FrameSource for SpaceTimeBlock {
    fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn frame(&self, i: usize) -> Cow<'_, SpectralField> {
        Cow::Borrowed(&self.frames[i])
    }
}

/// Lazily evaluated free trajectory `U(t_i) u0`.
#[derive(Debug, Clone)]
pub struct FreeFlow {
    pub u0: SpectralField,
    pub times: Vec<f64>,
}

impl FreeFlow {
    pub fn new(u0: SpectralField, times: Vec<f64>) -> Self {
        FreeFlow { u0, times }
    }

    pub fn materialize(&self) -> SpaceTimeBlock {
        use rayon::prelude::*;
        SpaceTimeBlock {
            grid: self.u0.grid.clone(),
            times: self.times.clone(),
            frames: self.times.par_iter().map(|&t| evolve(&self.u0, t)).collect(),
        }
    }
}

impl FrameSource for FreeFlow {
    fn grid(&self) -> &Arc<Grid> {
        &self.u0.grid
    }
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn frame(&self, i: usize) -> Cow<'_, SpectralField> {
        Cow::Owned(evolve(&self.u0, self.times[i]))
    }
}

/// Frames of `inner` with a Fourier multiplier applied on the fly.
pub struct Multiplied<'a, S: FrameSource + ?Sized> {
    pub inner: &'a S,
    pub symbol: Box<dyn Fn(f64, f64) -> Complex64 + Send + Sync + 'a>,
}

impl<'a, S: FrameSource + ?Sized> Multiplied<'a, S> {
    pub fn new(inner: &'a S, symbol: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'a) -> Self {
        Multiplied {
            inner,
            symbol: Box::new(symbol),
        }
    }

    /// Real radial multiplier of `|zeta|`.
    pub fn radial(inner: &'a S, symbol: impl Fn(f64) -> f64 + Send + Sync + 'a) -> Self {
        Self::new(inner, move |xi, e2| Complex64::new(symbol((xi * xi + e2).sqrt()), 0.0))
    }
}

impl<S: FrameSource + ?Sized> FrameSource for Multiplied<'_, S> {
    fn grid(&self) -> &Arc<Grid> {
        self.inner.grid()
    }
    fn times(&self) -> &[f64] {
        self.inner.times()
    }
    fn frame(&self, i: usize) -> Cow<'_, SpectralField> {
        Cow::Owned(self.inner.frame(i).apply_symbol(&self.symbol))
    }
}

/// Uniformly sampled free trajectory on `[0, T]`.
pub fn trajectory(field: &SpectralField, horizon: f64, n_samples: usize) -> Result<SpaceTimeBlock> {
    trajectory_with(field, horizon, &TimeSchedule::Uniform { n: n_samples })
}

pub fn trajectory_with(field: &SpectralField, horizon: f64, schedule: &TimeSchedule) -> Result<SpaceTimeBlock> {
    Ok(FreeFlow::new(field.clone(), schedule.times(horizon)?).materialize())
}

/// `f(x / lambda)` represented on the box scaled by `lambda`.
///
/// Coefficients keep their lattice index and pick up `lambda^d`.
pub fn rescale(field: &SpectralField, lambda: f64) -> Result<SpectralField> {
    let g = Arc::new(field.grid.scaled(lambda)?);
    let w = lambda.powi(field.grid.dim() as i32);
    Ok(SpectralField::from_coeffs(
        g,
        field.coeffs.iter().map(|c| c * w).collect(),
        format!("{}@x{}", field.tag, lambda),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{make_grid, synthesize, GeneratorSpec};

    fn data() -> SpectralField {
        let g = Arc::new(make_grid(2, &[12.0, 10.0], &[32, 32]).unwrap());
        synthesize(&g, &GeneratorSpec::RandomLowpass { radius: 3.0, seed: 3, amplitude: 1.0 }).unwrap()
    }

    #[test]
    fn group_identities() {
        let f = data();
        assert_eq!(evolve(&f, 0.0), f);
        let a = evolve(&evolve(&f, 0.3), -0.7);
        let b = evolve(&f, -0.4);
        assert!(a.sub(&b).l2_norm() < 1e-12 * f.l2_norm());
        let back = evolve(&evolve(&f, 1.1), -1.1);
        assert!(back.sub(&f).l2_norm() < 1e-12 * f.l2_norm());
        assert!((evolve(&f, 2.5).l2_norm() - f.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn trajectory_samples() {
        let f = data();
        let b = trajectory(&f, 1.0, 2).unwrap();
        assert_eq!(b.times, vec![0.0, 1.0]);
        let b5 = trajectory(&f, 1.0, 5).unwrap();
        let b9 = trajectory(&f, 1.0, 9).unwrap();
        for i in 0..5 {
            assert_eq!(b5.times[i], b9.times[2 * i]);
            assert_eq!(b5.frames[i], b9.frames[2 * i]);
        }
        let n0 = f.l2_norm();
        assert!(b9.frames.iter().all(|fr| (fr.l2_norm() - n0).abs() < 1e-10));
    }

    #[test]
    fn schedules() {
        let g = TimeSchedule::Geometric { n: 5, t_min: 1e-4 }.times(2.0).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 2.0);
        assert!((g[1] - 2e-4).abs() < 1e-16);
        let m = TimeSchedule::Mixed { uniform: 3, geometric: 3, t_min: 0.25 }.times(1.0).unwrap();
        assert!(m.windows(2).all(|w| w[1] > w[0]));
        assert!(m.contains(&0.25) && m.contains(&1.0) && m[0] == 0.0);
    }

    #[test]
    fn zero_support_stays_zero() {
        let mut f = data();
        f.coeffs[5] = Complex64::default();
        assert_eq!(evolve(&f, 0.77).coeffs[5], Complex64::default());
    }
}
