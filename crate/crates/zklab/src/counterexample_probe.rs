//! The `phi_{j,k}` family, necessity-scaling probes and closed-form thresholds.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::ScalingFitReport;
use crate::mixed_norms::{mixed_norm, MixedNormSpec};
use crate::propagator::{evolve, FreeFlow, TimeSchedule};
use crate::spectral::bump::annulus_bump;
use crate::spectral::{sobolev_norm, Grid, SpectralField};

/// `hat phi_{j,k}(xi, eta) = theta(2^j xi) psi(2^-k |eta|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiSpec {
    pub j: i32,
    pub k: i32,
    pub d: usize,
}

impl PhiSpec {
    /// Check the support fits under Nyquist and spans enough lattice points.
    pub fn check(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.d || self.d < 2 {
            return Err(Error::InvalidArgument(format!(
                "phi_(j,k) needs d >= 2 matching the grid (d={}, grid {})",
                self.d,
                grid.dim()
            )));
        }
        if self.k < 0 || self.j < -self.k {
            return Err(Error::InvalidArgument(format!("need k >= 0 and j >= -k, got j={} k={}", self.j, self.k)));
        }
        let xi_top = 4.0 * 2f64.powi(-self.j);
        if xi_top > grid.nyquist(0) {
            return Err(Error::InfeasibleOnGrid(format!(
                "xi support edge {xi_top} above Nyquist {}",
                grid.nyquist(0)
            )));
        }
        if 2f64.powi(-self.j) < grid.dual_spacing(0) {
            return Err(Error::InfeasibleOnGrid(format!(
                "xi support 2^{} spans fewer than 8 lattice points (spacing {})",
                -self.j,
                grid.dual_spacing(0)
            )));
        }
        let eta_top = 4.0 * 2f64.powi(self.k);
        for a in 1..grid.dim() {
            if eta_top > grid.nyquist(a) {
                return Err(Error::InfeasibleOnGrid(format!(
                    "eta support edge {eta_top} above Nyquist {} on axis {a}",
                    grid.nyquist(a)
                )));
            }
            if 2f64.powi(self.k) < grid.dual_spacing(a) {
                return Err(Error::InfeasibleOnGrid(format!(
                    "eta annulus 2^{} spans fewer than 8 lattice points on axis {a}",
                    self.k
                )));
            }
        }
        Ok(())
    }
}

pub fn make_phi_jk(grid: &Arc<Grid>, spec: PhiSpec) -> Result<SpectralField> {
    spec.check(grid)?;
    let sj = 2f64.powi(spec.j);
    let sk = 2f64.powi(-spec.k);
    let mut f = SpectralField::zeros(grid.clone()).with_tag(format!("phi(j={},k={})", spec.j, spec.k));
    grid.for_each_mode(|flat, xi, e2| {
        let a = annulus_bump((sj * xi).abs());
        if a != 0.0 {
            f.coeffs[flat] = Complex64::new(a * annulus_bump(sk * e2.sqrt()), 0.0);
        }
    });
    Ok(f)
}

/// Feasible `(j, k)` pairs on a grid for `k` in `k_range` and `j` in `j_range`.
pub fn feasible_window(grid: &Grid, k_range: std::ops::RangeInclusive<i32>, j_range: std::ops::RangeInclusive<i32>) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for k in k_range {
        for j in j_range.clone() {
            if (PhiSpec { j, k, d: grid.dim() }).check(grid).is_ok() {
                out.push((j, k));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JRule {
    /// `j = -k`, the extremal configuration.
    NegK,
    Const { j: i32 },
}

impl JRule {
    pub fn j_for(&self, k: i32) -> i32 {
        match *self {
            JRule::NegK => -k,
            JRule::Const { j } => j,
        }
    }
}

impl FromStr for JRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "neg-k" || s == "neg_k" {
            return Ok(JRule::NegK);
        }
        let v = s.strip_prefix("const:").unwrap_or(s);
        v.parse::<i32>()
            .map(|j| JRule::Const { j })
            .map_err(|_| Error::InvalidArgument(format!("unknown j rule `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityConfig {
    pub schedule: TimeSchedule,
    /// Time horizon of the `L^inf_t` stage.
    pub horizon: f64,
    pub oversample: usize,
}

impl Default for NecessityConfig {
    fn default() -> Self {
        NecessityConfig {
            schedule: TimeSchedule::Geometric { n: 63, t_min: 1e-6 },
            horizon: 1.0,
            oversample: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityRow {
    pub j: i32,
    pub k: i32,
    pub lhs: f64,
    pub sobolev: f64,
    pub log2_ratio: f64,
    /// `min |U(t) phi| / |phi(0)|` over the corners of the small region.
    pub lower_bound_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityReport {
    pub d: usize,
    pub p: f64,
    pub s_trial: f64,
    pub j_rule: JRule,
    pub rows: Vec<NecessityRow>,
    pub fit: ScalingFitReport,
    /// `d/2 - 1/p - s_trial`, the slope expected under `j = -k`.
    pub predicted_slope: f64,
    pub n_times: usize,
}

/// For each `k`, `R(k) = ||U(t) phi_{j,k}||_{L^p_x L^inf_{y,t}} / ||phi_{j,k}||_{H^s}`,
/// then the slope of `log2 R` against `k`.
pub fn necessity_probe(
    grid: &Arc<Grid>,
    p: f64,
    k_list: &[i32],
    j_rule: JRule,
    s_trial: f64,
    cfg: &NecessityConfig,
) -> Result<NecessityReport> {
    let d = grid.dim();
    let times = cfg.schedule.times(cfg.horizon)?;
    let specs: Vec<PhiSpec> = k_list
        .iter()
        .map(|&k| PhiSpec { j: j_rule.j_for(k), k, d })
        .collect();
    for s in &specs {
        s.check(grid)?;
    }
    let norm = MixedNormSpec::lx_linf_yt(p);
    let mut rows = Vec::with_capacity(specs.len());
    for s in &specs {
        let phi = make_phi_jk(grid, *s)?;
        let lhs = mixed_norm(&FreeFlow::new(phi.clone(), times.clone()), &norm, cfg.oversample)?;
        let sob = sobolev_norm(&phi, s_trial);
        rows.push(NecessityRow {
            j: s.j,
            k: s.k,
            lhs,
            sobolev: sob,
            log2_ratio: (lhs / sob).log2(),
            lower_bound_ratio: lower_bound_ratio(&phi, *s)?,
        });
    }
    let fit = ScalingFitReport::fit(rows.iter().map(|r| (r.k as f64, r.log2_ratio)).collect())?;
    Ok(NecessityReport {
        d,
        p,
        s_trial,
        j_rule,
        rows,
        fit,
        predicted_slope: d as f64 / 2.0 - 1.0 / p - s_trial,
        n_times: times.len(),
    })
}

/// Corner sampling of `|U(t) phi|` on `|x| <= 2^j/16`, `|y| <= 2^-k/16`,
/// `0 <= t <= min(1, 2^{j-2k})/16`, relative to `|phi(0)|`.
pub fn lower_bound_ratio(phi: &SpectralField, s: PhiSpec) -> Result<f64> {
    let d = phi.grid.dim();
    let xr = 2f64.powi(s.j) / 16.0;
    let yr = 2f64.powi(-s.k) / 16.0;
    let tr = 1f64.min(2f64.powi(s.j - 2 * s.k)) / 16.0;
    let origin = phi.value_at(&vec![0.0; d]).norm();
    let later = evolve(phi, tr);
    let mut pts = Vec::new();
    for &sx in &[-1.0, 0.0, 1.0] {
        for &sy in &[-1.0, 0.0, 1.0] {
            let mut p = vec![0.0; d];
            p[0] = sx * xr;
            p[1] = sy * yr;
            pts.push(p);
        }
    }
    let vals: Vec<f64> = pts
        .par_iter()
        .flat_map(|p| vec![phi.value_at(p).norm(), later.value_at(p).norm()])
        .collect();
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min) / origin)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    SpacetimeNecessary,
    #[serde(alias = "timeonly")]
    TimeonlyNecessary,
    Sjolin,
    Rogers,
}

impl FromStr for ThresholdKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "spacetime_necessary" => Ok(ThresholdKind::SpacetimeNecessary),
            "timeonly_necessary" | "timeonly" => Ok(ThresholdKind::TimeonlyNecessary),
            "sjolin" => Ok(ThresholdKind::Sjolin),
            "rogers" => Ok(ThresholdKind::Rogers),
            _ => Err(Error::UnsupportedKind(s.to_string())),
        }
    }
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdKind::SpacetimeNecessary => "spacetime_necessary",
            ThresholdKind::TimeonlyNecessary => "timeonly_necessary",
            ThresholdKind::Sjolin => "sjolin",
            ThresholdKind::Rogers => "rogers",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdQuery {
    pub kind: ThresholdKind,
    /// Space dimension (`n` for the Sjolin bound).
    pub d: i64,
    pub p: Rational64,
    /// Rogers input regularity; defaults to the Sjolin value at `(d, p)`.
    pub s0: Option<Rational64>,
    /// Rogers power; defaults to 3.
    pub m: Option<i64>,
}

impl ThresholdQuery {
    pub fn new(kind: ThresholdKind, d: i64, p: Rational64) -> Self {
        ThresholdQuery { kind, d, p, s0: None, m: None }
    }
}

fn r(n: i64, den: i64) -> Rational64 {
    Rational64::new(n, den)
}

/// Exact threshold exponent.
pub fn threshold_exact(q: &ThresholdQuery) -> Result<Rational64> {
    if q.p < r(1, 1) {
        return Err(Error::InvalidArgument(format!("p = {} < 1", q.p)));
    }
    if q.d < 2 {
        return Err(Error::InvalidArgument(format!("d = {} < 2", q.d)));
    }
    let d = r(q.d, 1);
    let inv_p = q.p.recip();
    let half = r(1, 2);
    Ok(match q.kind {
        ThresholdKind::SpacetimeNecessary => d * half - inv_p,
        ThresholdKind::TimeonlyNecessary => {
            let a = d * (half - inv_p);
            let b = r(3, 2) * inv_p - d * half * (half - inv_p);
            a.max(b)
        }
        ThresholdKind::Sjolin => d / r(4, 1) - (d - r(1, 1)) * half * inv_p,
        ThresholdKind::Rogers => {
            let s0 = match q.s0 {
                Some(s) => s,
                None => threshold_exact(&ThresholdQuery::new(ThresholdKind::Sjolin, q.d, q.p))?,
            };
            let m = r(q.m.unwrap_or(3), 1);
            m * s0 - (m - r(1, 1)) * d * (half - inv_p)
        }
    })
}

pub fn threshold_calc(q: &ThresholdQuery) -> Result<f64> {
    let v = threshold_exact(q)?;
    Ok(*v.numer() as f64 / *v.denom() as f64)
}

/// Parse `4`, `7/2` or a terminating decimal such as `2.5` into a rational.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let bad = || Error::InvalidArgument(format!("not a rational number: `{s}`"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a = a.trim().parse::<i64>().map_err(|_| bad())?;
        let b = b.trim().parse::<i64>().map_err(|_| bad())?;
        if b == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(a, b));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let den = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let neg = int.starts_with('-');
        let ip = if int.is_empty() || int == "-" { 0 } else { int.parse::<i64>().map_err(|_| bad())?.abs() };
        let fp = if frac.is_empty() { 0 } else { frac.parse::<i64>().map_err(|_| bad())? };
        let v = Rational64::new(ip * den + fp, den);
        return Ok(if neg { -v } else { v });
    }
    s.parse::<i64>().map(|v| Rational64::new(v, 1)).map_err(|_| bad())
}

/// `d/2 - 2/k`, the scaling-critical regularity of the `u^{k+1}` nonlinearity.
pub fn gzk_critical(d: i64, k: i64) -> Rational64 {
    r(d, 2) - r(2, k)
}

/// `d/2 - 1/4`, the regularity of the `L^4_x L^inf_{y,t}` maximal estimate.
pub fn maximal_l4_threshold(d: i64) -> Rational64 {
    r(d, 2) - r(1, 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    #[test]
    fn thresholds_exact() {
        let q = |kind, d, p: i64| ThresholdQuery::new(kind, d, r(p, 1));
        assert_eq!(threshold_exact(&q(ThresholdKind::SpacetimeNecessary, 3, 4)).unwrap(), r(5, 4));
        assert_eq!(threshold_exact(&q(ThresholdKind::Sjolin, 3, 2)).unwrap(), r(1, 4));
        assert_eq!(threshold_exact(&q(ThresholdKind::TimeonlyNecessary, 2, 2)).unwrap(), r(3, 4));
        assert_eq!(threshold_exact(&q(ThresholdKind::Rogers, 2, 2)).unwrap(), r(3, 4));
        assert_eq!("bogus".parse::<ThresholdKind>(), Err(Error::UnsupportedKind("bogus".into())));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("4").unwrap(), r(4, 1));
        assert_eq!(parse_rational("7/2").unwrap(), r(7, 2));
        assert_eq!(parse_rational("2.25").unwrap(), r(9, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), r(-1, 2));
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn infeasible_phi() {
        let g = Arc::new(make_grid(2, &[64.0, 64.0], &[256, 256]).unwrap());
        assert!(matches!(
            make_phi_jk(&g, PhiSpec { j: 20, k: 20, d: 2 }),
            Err(Error::InfeasibleOnGrid(_))
        ));
        assert!(make_phi_jk(&g, PhiSpec { j: -1, k: 1, d: 2 }).is_ok());
    }
}
