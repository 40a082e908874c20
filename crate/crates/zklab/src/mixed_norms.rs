//! Iterated Lebesgue norms of sampled trajectories and the composite
//! `Y^s_T` / `X^s_T` norms built from them.
//!
//! Logical axes: `x` is grid axis 0, `y` the remaining spatial axes, `t` the
//! frame index. Spatial integrals use the trapezoid rule on the periodic
//! lattice (uniform weights), time integrals the trapezoid rule on the sample
//! times, suprema the discrete maximum.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::{FrameSource, Multiplied};
use crate::spectral::bump::lp_symbol;
use crate::spectral::{evaluate_physical, sobolev_norm, BandIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub axes: Vec<Axis>,
    /// In `[1, inf]`.
    pub exponent: f64,
}

/// Stages listed outermost first, as the norm is written.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedNormSpec {
    pub stages: Vec<Stage>,
    /// Use probability measures (divide by box length and time span).
    pub normalized: bool,
}

impl MixedNormSpec {
    pub fn new(stages: Vec<(Vec<Axis>, f64)>) -> Result<Self> {
        let spec = MixedNormSpec {
            stages: stages
                .into_iter()
                .map(|(axes, exponent)| Stage { axes, exponent })
                .collect(),
            normalized: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn normalized(mut self) -> Self {
        self.normalized = true;
        self
    }

    /// `L^p_x L^inf_{y,t}`.
    pub fn lx_linf_yt(p: f64) -> Self {
        Self::new(vec![(vec![Axis::X], p), (vec![Axis::Y, Axis::T], f64::INFINITY)]).unwrap()
    }

    /// `L^q_{x,y} L^inf_t`.
    pub fn lxy_linf_t(q: f64) -> Self {
        Self::new(vec![(vec![Axis::X, Axis::Y], q), (vec![Axis::T], f64::INFINITY)]).unwrap()
    }

    /// `L^r_t L^q_{x,y}`.
    pub fn lt_lxy(r: f64, q: f64) -> Self {
        Self::new(vec![(vec![Axis::T], r), (vec![Axis::X, Axis::Y], q)]).unwrap()
    }

    /// `L^p_x L^q_{y,t}`.
    pub fn lx_lyt(p: f64, q: f64) -> Self {
        Self::new(vec![(vec![Axis::X], p), (vec![Axis::Y, Axis::T], q)]).unwrap()
    }

    /// `L^p_t L^q_{x,y}` with the time stage outermost is `lt_lxy`; this is the
    /// all-axes single stage `L^p_{x,y,t}`.
    pub fn l_all(p: f64) -> Self {
        Self::new(vec![(vec![Axis::X, Axis::Y, Axis::T], p)]).unwrap()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = Vec::new();
        for st in &self.stages {
            if st.axes.is_empty() {
                return Err(Error::InvalidArgument("empty axis group".into()));
            }
            if !(st.exponent >= 1.0) {
                return Err(Error::InvalidArgument(format!("exponent {} < 1", st.exponent)));
            }
            for a in &st.axes {
                if seen.contains(a) {
                    return Err(Error::InvalidArgument(format!("axis {a:?} listed twice")));
                }
                seen.push(*a);
            }
        }
        if seen.len() != 3 {
            return Err(Error::InvalidArgument("axis groups must partition {x, y, t}".into()));
        }
        Ok(())
    }

    /// Parse e.g. `L4_x Linf_{y,t}`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut stages = Vec::new();
        for tok in text.split_whitespace() {
            let body = tok
                .strip_prefix('L')
                .ok_or_else(|| Error::InvalidArgument(format!("bad stage `{tok}`")))?;
            let (e, axes) = body
                .split_once('_')
                .ok_or_else(|| Error::InvalidArgument(format!("bad stage `{tok}`")))?;
            let exponent = if e == "inf" {
                f64::INFINITY
            } else {
                e.parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad exponent `{e}`")))?
            };
            let axes = axes
                .trim_matches(|c| c == '{' || c == '}')
                .split(',')
                .map(|a| match a.trim() {
                    "x" => Ok(Axis::X),
                    "y" => Ok(Axis::Y),
                    "t" => Ok(Axis::T),
                    other => Err(Error::InvalidArgument(format!("unknown axis `{other}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            stages.push((axes, exponent));
        }
        Self::new(stages)
    }
}

impl fmt::Display for MixedNormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .stages
            .iter()
            .map(|s| {
                let e = if s.exponent.is_infinite() {
                    "inf".to_string()
                } else {
                    format!("{}", s.exponent)
                };
                let a: Vec<&str> = s
                    .axes
                    .iter()
                    .map(|a| match a {
                        Axis::X => "x",
                        Axis::Y => "y",
                        Axis::T => "t",
                    })
                    .collect();
                format!("L{}_{{{}}}", e, a.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Partially reduced array over `(x, y)`; a reduced axis has length 1.
#[derive(Clone)]
struct Partial {
    nx: usize,
    ny: usize,
    v: Vec<f64>,
}

/// Combine over the listed spatial axes: `sum w a^p` (root taken if `root`) or max.
fn reduce(a: Partial, axes: &[Axis], p: f64, wx: f64, wy: f64, root: bool) -> Partial {
    let mut cur = a;
    let do_y = axes.contains(&Axis::Y);
    let do_x = axes.contains(&Axis::X);
    let inf = p.is_infinite();
    // Raise once, then sum or max along each requested axis.
    if !inf {
        cur.v.iter_mut().for_each(|x| *x = x.powf(p));
    }
    if do_y {
        let mut v = Vec::with_capacity(cur.nx);
        for row in cur.v.chunks(cur.ny) {
            v.push(if inf {
                row.iter().cloned().fold(0.0, f64::max)
            } else {
                row.iter().sum::<f64>() * wy
            });
        }
        cur = Partial { nx: cur.nx, ny: 1, v };
    }
    if do_x {
        let mut v = vec![0.0f64; cur.ny];
        for row in cur.v.chunks(cur.ny) {
            for (acc, &x) in v.iter_mut().zip(row) {
                if inf {
                    *acc = (*acc).max(x);
                } else {
                    *acc += x;
                }
            }
        }
        if !inf {
            v.iter_mut().for_each(|x| *x *= wx);
        }
        cur = Partial { nx: 1, ny: cur.ny, v };
    }
    if root && !inf {
        cur.v.iter_mut().for_each(|x| *x = x.powf(1.0 / p));
    }
    cur
}

/// Trapezoid weights on the sample times (weight 1 for a single sample).
pub fn time_weights(times: &[f64], normalized: bool) -> Vec<f64> {
    let n = times.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = (times[i + 1] - times[i]) / 2.0;
        w[i] += h;
        w[i + 1] += h;
    }
    if normalized {
        let span = times[n - 1] - times[0];
        w.iter_mut().for_each(|x| *x /= span);
    }
    w
}

/// Discrete iterated norm of the trajectory.
pub fn mixed_norm<S: FrameSource + ?Sized>(src: &S, spec: &MixedNormSpec, oversample: usize) -> Result<f64> {
    spec.validate()?;
    if src.is_empty() {
        return Err(Error::EmptyBlock);
    }
    let g = src.grid().clone();
    let d = g.dim();
    let fine = g.refined(oversample)?;
    let mx = fine.resolution()[0];
    let my = fine.y_len();
    let (mut wx, mut wy) = (fine.spacing(0), if d > 1 { fine.cell_volume() / fine.spacing(0) } else { 1.0 });
    if spec.normalized {
        wx /= g.lengths()[0];
        if d > 1 {
            wy /= g.volume() / g.lengths()[0];
        }
    }
    let wt = time_weights(src.times(), spec.normalized);
    let it = spec.stages.iter().position(|s| s.axes.contains(&Axis::T)).unwrap();
    let t_stage = &spec.stages[it];
    let p_t = t_stage.exponent;
    let t_spatial: Vec<Axis> = t_stage.axes.iter().copied().filter(|a| *a != Axis::T).collect();

    let per_frame = |i: usize| -> Result<Partial> {
        let frame = src.frame(i);
        let phys = evaluate_physical(&frame, oversample)?;
        let mut cur = Partial {
            nx: mx,
            ny: my,
            v: phys.values.iter().map(|z| z.norm()).collect(),
        };
        for st in spec.stages[it + 1..].iter().rev() {
            cur = reduce(cur, &st.axes, st.exponent, wx, wy, true);
        }
        if !t_spatial.is_empty() {
            cur = reduce(cur, &t_spatial, p_t, wx, wy, false);
        } else if !p_t.is_infinite() {
            cur.v.iter_mut().for_each(|x| *x = x.powf(p_t));
        }
        Ok(cur)
    };

    let chunk = rayon::current_num_threads().max(1) * 2;
    let mut acc: Option<Partial> = None;
    let idx: Vec<usize> = (0..src.len()).collect();
    for block in idx.chunks(chunk) {
        let parts: Vec<Result<Partial>> = block.par_iter().map(|&i| per_frame(i)).collect();
        for (&i, part) in block.iter().zip(parts) {
            let part = part?;
            match acc.as_mut() {
                None => {
                    let mut first = part;
                    if !p_t.is_infinite() {
                        first.v.iter_mut().for_each(|x| *x *= wt[i]);
                    }
                    acc = Some(first);
                }
                Some(a) => {
                    for (x, y) in a.v.iter_mut().zip(&part.v) {
                        if p_t.is_infinite() {
                            *x = x.max(*y);
                        } else {
                            *x += wt[i] * y;
                        }
                    }
                }
            }
        }
    }
    let mut cur = acc.unwrap();
    if !p_t.is_infinite() {
        cur.v.iter_mut().for_each(|x| *x = x.powf(1.0 / p_t));
    }
    for st in spec.stages[..it].iter().rev() {
        cur = reduce(cur, &st.axes, st.exponent, wx, wy, true);
    }
    debug_assert_eq!(cur.v.len(), 1);
    Ok(cur.v[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum YsVariant {
    #[serde(rename = "2d")]
    TwoD,
    #[serde(rename = "highd")]
    HighD,
    #[serde(rename = "tilde3")]
    Tilde3,
}

impl YsVariant {
    pub fn for_dim(d: usize) -> Self {
        if d == 2 {
            YsVariant::TwoD
        } else {
            YsVariant::HighD
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "2d" => Ok(YsVariant::TwoD),
            "highd" => Ok(YsVariant::HighD),
            "tilde3" => Ok(YsVariant::Tilde3),
            other => Err(Error::InvalidArgument(format!("unknown Y^s variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YsParams {
    /// Maximal-function regularity used by the 2d variant.
    pub s0: f64,
    /// Offset realizing the `+` in limiting exponents.
    pub epsilon: f64,
    pub oversample: usize,
}

impl Default for YsParams {
    fn default() -> Self {
        YsParams {
            s0: 0.75,
            epsilon: 0.01,
            oversample: 2,
        }
    }
}

fn bessel_src<'a, S: FrameSource + ?Sized>(src: &'a S, sigma: f64) -> Multiplied<'a, S> {
    Multiplied::new(src, move |xi, e2| Complex64::new((1.0 + xi * xi + e2).powf(sigma / 2.0), 0.0))
}

/// Sum of the three component norms defining `Y^s_T` for the chosen variant.
pub fn ys_norm<S: FrameSource + ?Sized>(src: &S, s: f64, variant: YsVariant, par: &YsParams) -> Result<f64> {
    if src.is_empty() {
        return Err(Error::EmptyBlock);
    }
    let d = src.grid().dim() as f64;
    let eps = par.epsilon;
    let os = par.oversample;
    let energy_s = if variant == YsVariant::Tilde3 { 0.0 } else { s };
    let mut energy = 0.0f64;
    for i in 0..src.len() {
        energy = energy.max(sobolev_norm(&src.frame(i), energy_s));
    }
    let smoothing = mixed_norm(&bessel_src(src, s + 1.0), &MixedNormSpec::lx_lyt(f64::INFINITY, 2.0), os)?;
    let maximal = match variant {
        YsVariant::TwoD => mixed_norm(&bessel_src(src, s - par.s0 - eps), &MixedNormSpec::lx_linf_yt(2.0), os)?,
        YsVariant::HighD => {
            let sd = d / 2.0 - 0.25;
            mixed_norm(&bessel_src(src, s - sd - eps), &MixedNormSpec::lx_linf_yt(4.0), os)?
        }
        YsVariant::Tilde3 => mixed_norm(&bessel_src(src, s - 1.0 - eps), &MixedNormSpec::lx_linf_yt(2.0), os)?,
    };
    Ok(energy + smoothing + maximal)
}

/// Per-band `Y^s_T` values and their weighted `l^2` aggregate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeNormReport {
    pub per_band: BTreeMap<BandIndex, f64>,
    pub total: f64,
}

impl CompositeNormReport {
    pub fn from_bands(per_band: BTreeMap<BandIndex, f64>, s: f64) -> Self {
        let total = per_band
            .iter()
            .map(|(&j, &v)| (2f64.powf(s * j as f64) * v).powi(2))
            .sum::<f64>()
            .sqrt();
        CompositeNormReport { per_band, total }
    }
}

/// `X^s_T` norm: `|| 2^{sj} ||Delta_j u||_{Y^s_T} ||_{l^2_j}` for `j` from -1 to
/// the grid's top band.
pub fn xs_norm<S: FrameSource + ?Sized>(src: &S, s: f64, variant: YsVariant, par: &YsParams) -> Result<CompositeNormReport> {
    if src.is_empty() {
        return Err(Error::EmptyBlock);
    }
    let top = src.grid().max_band();
    let mut per_band = BTreeMap::new();
    for j in -1..=top {
        let band = Multiplied::radial(src, move |rho| lp_symbol(j, rho));
        per_band.insert(j, ys_norm(&band, s, variant, par)?);
    }
    Ok(CompositeNormReport::from_bands(per_band, s))
}
