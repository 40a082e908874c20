//! Norm-ratio probes for the positive estimates of the free flow.
//!
//! Band `k` data live on the box `L0 / 2^k` with horizon `T0 / 2^{3k}` and the
//! same resolution as band 0 (the `BandScaled` policy). With equal seeds the
//! lattice coefficients coincide across bands, so a ratio changes with `k`
//! only through the regularity weights of the inequality. `Fixed` keeps one box
//! and one horizon for every band.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::ScalingFitReport;
use crate::mixed_norms::{mixed_norm, MixedNormSpec};
use crate::propagator::{evolve, FreeFlow, Multiplied, SpaceTimeBlock, TimeSchedule};
use crate::spectral::bump::lp_symbol;
use crate::spectral::{make_grid, sobolev_norm, synthesize, BandIndex, GeneratorSpec, Grid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Strichartz,
    DispersionLp,
    Kato,
    #[serde(rename = "maximal_L4")]
    MaximalL4,
    #[serde(rename = "maximal_L4xy")]
    MaximalL4xy,
    RetardedGroup,
    RetardedSmooth,
    RetardedMax,
    ConjectureP3,
}

impl ProbeKind {
    pub const ALL: [ProbeKind; 9] = [
        ProbeKind::Strichartz,
        ProbeKind::DispersionLp,
        ProbeKind::Kato,
        ProbeKind::MaximalL4,
        ProbeKind::MaximalL4xy,
        ProbeKind::RetardedGroup,
        ProbeKind::RetardedSmooth,
        ProbeKind::RetardedMax,
        ProbeKind::ConjectureP3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ProbeKind::Strichartz => "strichartz",
            ProbeKind::DispersionLp => "dispersion_lp",
            ProbeKind::Kato => "kato",
            ProbeKind::MaximalL4 => "maximal_L4",
            ProbeKind::MaximalL4xy => "maximal_L4xy",
            ProbeKind::RetardedGroup => "retarded_group",
            ProbeKind::RetardedSmooth => "retarded_smooth",
            ProbeKind::RetardedMax => "retarded_max",
            ProbeKind::ConjectureP3 => "conjecture_p3",
        }
    }
}

impl fmt::Display for ProbeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProbeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProbeKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s) || k.name().replace('_', "-").eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown probe kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPolicy {
    BandScaled,
    Fixed,
}

/// Everything needed to reproduce a probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    pub d: usize,
    /// Spatial exponent of the dispersion estimate.
    pub p: f64,
    /// Strichartz spatial / time exponents.
    pub q: f64,
    pub r: f64,
    /// Regularity; `None` selects the kind's sharp value (plus `epsilon` where
    /// the estimate excludes the endpoint).
    pub s: Option<f64>,
    /// Band-0 horizon `T0`.
    pub horizon: f64,
    /// Band-0 cube side `L0`.
    pub length: f64,
    pub resolution: usize,
    pub n_times: usize,
    pub oversample: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub grid_policy: GridPolicy,
    /// Evaluation time of the dispersion estimate at band 0 (defaults to `T0`).
    pub dispersion_time: Option<f64>,
}

impl ProbeParams {
    pub fn for_dim(d: usize) -> Self {
        let (n, l) = match d {
            1 | 2 => (64, 8.0 * std::f64::consts::PI),
            3 => (32, 8.0 * std::f64::consts::PI),
            _ => (16, 4.0 * std::f64::consts::PI),
        };
        ProbeParams {
            d,
            p: 4.0,
            q: 4.0,
            r: 4.0,
            s: None,
            horizon: 0.25,
            length: l,
            resolution: n,
            n_times: 24,
            oversample: 2,
            epsilon: 0.05,
            seed: 1,
            grid_policy: GridPolicy::BandScaled,
            dispersion_time: None,
        }
    }

    /// Regularity index used for `kind`.
    pub fn regularity(&self, kind: ProbeKind) -> f64 {
        if let Some(s) = self.s {
            return s;
        }
        let d = self.d as f64;
        match kind {
            ProbeKind::Strichartz => d * (0.5 - 1.0 / self.q) - 3.0 / self.r,
            ProbeKind::MaximalL4 => d / 2.0 - 0.25 + self.epsilon,
            ProbeKind::MaximalL4xy => d / 4.0 + self.epsilon,
            ProbeKind::ConjectureP3 => 2.0 / 3.0 + self.epsilon,
            ProbeKind::DispersionLp | ProbeKind::Kato => 0.0,
            ProbeKind::RetardedGroup | ProbeKind::RetardedSmooth => 0.0,
            ProbeKind::RetardedMax => self.epsilon,
        }
    }

    fn check(&self, kind: ProbeKind) -> Result<()> {
        let bad = |m: String| Err(Error::ExponentConstraintViolated(m));
        match kind {
            ProbeKind::Strichartz => {
                if self.q < 2.0 || self.r < 2.0 {
                    return bad(format!("q={} and r={} must be >= 2", self.q, self.r));
                }
                if 2.0 / self.q + 2.0 / self.r > 1.0 {
                    return bad(format!("2/q + 2/r = {} > 1", 2.0 / self.q + 2.0 / self.r));
                }
            }
            ProbeKind::DispersionLp if self.p < 2.0 => return bad(format!("p={} < 2", self.p)),
            ProbeKind::ConjectureP3 if self.d != 2 => return bad("conjecture probe is two-dimensional".into()),
            _ => {}
        }
        if self.d < 2 {
            return bad("probes need d >= 2".into());
        }
        Ok(())
    }

    /// Grid and horizon used for `band`.
    pub fn band_setup(&self, band: BandIndex) -> Result<(Arc<Grid>, f64)> {
        if band < 0 {
            return Err(Error::InvalidArgument("probe bands start at 0".into()));
        }
        let (len, horizon) = match self.grid_policy {
            GridPolicy::BandScaled => (self.length * 2f64.powi(-band), self.horizon * 2f64.powi(-3 * band)),
            GridPolicy::Fixed => (self.length, self.horizon),
        };
        let g = make_grid(self.d, &vec![len; self.d], &vec![self.resolution; self.d])?;
        let top = 2f64.powi(band + 2);
        if top > g.nyquist(0) {
            return Err(Error::InfeasibleOnGrid(format!(
                "band {band} edge {top} above Nyquist {}",
                g.nyquist(0)
            )));
        }
        if 2f64.powi(band - 1) < 2.0 * g.dual_spacing(0) {
            return Err(Error::InfeasibleOnGrid(format!(
                "band {band} inner radius below two lattice spacings ({})",
                g.dual_spacing(0)
            )));
        }
        Ok((Arc::new(g), horizon))
    }
}

/// Ratios of one probe kind on one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub kind: ProbeKind,
    pub band: BandIndex,
    pub samples: usize,
    pub seeds: Vec<u64>,
    pub ratios: Vec<f64>,
    pub max: f64,
    pub median: f64,
    pub s: f64,
    pub config: ProbeParams,
}

fn smooth_profile(seed: u64) -> [f64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5e_ed0f_7133);
    let u = Uniform::new(-0.5, 0.5);
    [u.sample(&mut rng), u.sample(&mut rng), u.sample(&mut rng)]
}

/// `h(tau) = 1 + sum_m a_m cos(m pi tau)` on `tau in [0, 1]`.
pub fn profile_value(a: &[f64; 3], tau: f64) -> f64 {
    1.0 + a
        .iter()
        .enumerate()
        .map(|(m, am)| am * ((m + 1) as f64 * std::f64::consts::PI * tau).cos())
        .sum::<f64>()
}

/// `D f(t_m) = int_0^{t_m} U(t_m - t') f(t') dt'` by the trapezoid rule on the
/// sample times, with `U` applied exactly.
pub fn duhamel_free(forcing: &SpaceTimeBlock) -> SpaceTimeBlock {
    let times = &forcing.times;
    let pulled: Vec<SpectralField> = forcing
        .frames
        .par_iter()
        .zip(times.par_iter())
        .map(|(f, &t)| evolve(f, -t))
        .collect();
    let mut acc = SpectralField::zeros(forcing.grid.clone());
    let mut sums = Vec::with_capacity(times.len());
    sums.push(acc.clone());
    for m in 1..times.len() {
        let h = (times[m] - times[m - 1]) / 2.0;
        acc = acc.axpy(h, &pulled[m - 1]).axpy(h, &pulled[m]);
        sums.push(acc.clone());
    }
    let frames = sums
        .par_iter()
        .zip(times.par_iter())
        .map(|(s, &t)| evolve(s, t))
        .collect();
    SpaceTimeBlock {
        grid: forcing.grid.clone(),
        times: times.clone(),
        frames,
    }
}

fn radial_power(power: f64) -> impl Fn(f64, f64) -> Complex64 + Send + Sync {
    move |xi, e2| Complex64::new((xi * xi + e2).powf(power / 2.0), 0.0)
}

/// One LHS / RHS ratio for the datum with `seed`.
pub fn probe_ratio(kind: ProbeKind, band: BandIndex, params: &ProbeParams, seed: u64) -> Result<f64> {
    params.check(kind)?;
    let (g, horizon) = params.band_setup(band)?;
    let s = params.regularity(kind);
    let os = params.oversample;
    let d = params.d as f64;
    let u0 = synthesize(&g, &GeneratorSpec::RandomBand { band, seed, amplitude: 1.0 })?;
    let times = TimeSchedule::Uniform { n: params.n_times }.times(horizon)?;
    let flow = FreeFlow::new(u0.clone(), times.clone());
    let ratio = match kind {
        ProbeKind::Strichartz => {
            mixed_norm(&flow, &MixedNormSpec::lt_lxy(params.r, params.q), os)? / sobolev_norm(&u0, s)
        }
        ProbeKind::DispersionLp => {
            let t0 = params.dispersion_time.unwrap_or(params.horizon);
            let t = match params.grid_policy {
                GridPolicy::BandScaled => t0 * 2f64.powi(-3 * band),
                GridPolicy::Fixed => t0,
            };
            let p = params.p;
            let decay = if p.is_infinite() { 1.0 } else { 1.0 - 2.0 / p };
            let p_dual = if p.is_infinite() { 1.0 } else { p / (p - 1.0) };
            let at_t = FreeFlow::new(u0.clone(), vec![t]);
            let lhs = mixed_norm(&at_t, &MixedNormSpec::l_all(p), os)?;
            let weighted = FreeFlow::new(
                u0.apply_symbol(|xi, e2| Complex64::new((1.0 + xi * xi + e2).powf((d - 3.0) * decay / 2.0), 0.0)),
                vec![0.0],
            );
            let rhs = t.abs().powf(-decay) * mixed_norm(&weighted, &MixedNormSpec::l_all(p_dual), os)?;
            lhs / rhs
        }
        ProbeKind::Kato => {
            let w = Multiplied::new(&flow, |xi, e2| Complex64::new((3.0 * xi * xi + e2).sqrt(), 0.0));
            mixed_norm(&w, &MixedNormSpec::lx_lyt(f64::INFINITY, 2.0), os)? / u0.l2_norm()
        }
        ProbeKind::MaximalL4 => mixed_norm(&flow, &MixedNormSpec::lx_linf_yt(4.0), os)? / sobolev_norm(&u0, s),
        ProbeKind::MaximalL4xy => mixed_norm(&flow, &MixedNormSpec::lxy_linf_t(4.0), os)? / sobolev_norm(&u0, s),
        ProbeKind::ConjectureP3 => mixed_norm(&flow, &MixedNormSpec::lx_linf_yt(3.0), os)? / sobolev_norm(&u0, s),
        ProbeKind::RetardedGroup | ProbeKind::RetardedSmooth | ProbeKind::RetardedMax => {
            let profile = smooth_profile(seed);
            let forcing = SpaceTimeBlock {
                grid: g.clone(),
                times: times.clone(),
                frames: times
                    .iter()
                    .map(|&t| u0.scale(profile_value(&profile, t / horizon)))
                    .collect(),
            };
            retarded_ratio(kind, &forcing, band, params, s)?
        }
    };
    Ok(ratio)
}

fn retarded_ratio(kind: ProbeKind, forcing: &SpaceTimeBlock, band: BandIndex, params: &ProbeParams, s: f64) -> Result<f64> {
    let os = params.oversample;
    let l1l2 = MixedNormSpec::lx_lyt(1.0, 2.0);
    match kind {
        ProbeKind::RetardedGroup => {
            let duh = duhamel_free(forcing);
            let lhs = duh
                .frames
                .iter()
                .map(|f| f.apply_symbol(radial_power(1.0)).l2_norm())
                .fold(0.0, f64::max);
            Ok(lhs / mixed_norm(forcing, &l1l2, os)?)
        }
        ProbeKind::RetardedSmooth => {
            let duh = duhamel_free(forcing);
            let lhs = mixed_norm(&Multiplied::new(&duh, radial_power(2.0)), &MixedNormSpec::lx_lyt(f64::INFINITY, 2.0), os)?;
            Ok(lhs / mixed_norm(forcing, &l1l2, os)?)
        }
        ProbeKind::RetardedMax => {
            let piece = forcing.map_frames(|f| f.apply_radial(|rho| lp_symbol(band, rho)));
            let duh = duhamel_free(&piece);
            let lhs = mixed_norm(&duh, &MixedNormSpec::lx_linf_yt(4.0), os)?;
            let sd = params.d as f64 / 2.0 - 0.25;
            let rhs = 2f64.powf((sd - 1.0 + s) * band as f64) * mixed_norm(&piece, &l1l2, os)?;
            Ok(lhs / rhs)
        }
        _ => unreachable!(),
    }
}

/// Evaluate `n_seeds` random data on `band` and aggregate.
pub fn ratio_probe(kind: ProbeKind, band: BandIndex, params: &ProbeParams, n_seeds: usize) -> Result<RatioStats> {
    params.check(kind)?;
    params.band_setup(band)?;
    if n_seeds == 0 {
        return Err(Error::InvalidArgument("n_seeds must be positive".into()));
    }
    let seeds: Vec<u64> = (0..n_seeds as u64).map(|i| params.seed.wrapping_add(i)).collect();
    let ratios = seeds
        .par_iter()
        .map(|&sd| probe_ratio(kind, band, params, sd))
        .collect::<Result<Vec<f64>>>()?;
    let mut sorted = ratios.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Ok(RatioStats {
        kind,
        band,
        samples: n,
        seeds,
        max: sorted[n - 1],
        median,
        ratios,
        s: params.regularity(kind),
        config: params.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub kind: ProbeKind,
    pub fit: ScalingFitReport,
    pub stats: Vec<RatioStats>,
}

impl FlatnessReport {
    /// `max_k max / min_k max` over the bands.
    pub fn spread(&self) -> f64 {
        let hi = self.stats.iter().map(|s| s.max).fold(0.0, f64::max);
        let lo = self.stats.iter().map(|s| s.max).fold(f64::INFINITY, f64::min);
        hi / lo
    }
}

/// Slope of `log2(max ratio)` against the band index.
pub fn band_flatness(kind: ProbeKind, params: &ProbeParams, bands: &[BandIndex], n_seeds: usize) -> Result<FlatnessReport> {
    if bands.len() < 4 {
        return Err(Error::InvalidArgument(format!("band flatness needs >= 4 bands, got {}", bands.len())));
    }
    let stats = bands
        .iter()
        .map(|&b| ratio_probe(kind, b, params, n_seeds))
        .collect::<Result<Vec<_>>>()?;
    let fit = ScalingFitReport::fit(stats.iter().map(|s| (s.band as f64, s.max.log2())).collect())?;
    Ok(FlatnessReport { kind, fit, stats })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(d: usize) -> ProbeParams {
        let mut p = ProbeParams::for_dim(d);
        p.n_times = 6;
        p.resolution = 32;
        p.length = 8.0 * std::f64::consts::PI;
        p
    }

    #[test]
    fn strichartz_constraint() {
        let mut p = small(3);
        p.q = 3.0;
        p.r = 3.0;
        assert!(matches!(
            ratio_probe(ProbeKind::Strichartz, 0, &p, 1),
            Err(Error::ExponentConstraintViolated(_))
        ));
    }

    #[test]
    fn dispersion_at_p2_is_unitary() {
        let mut p = small(2);
        p.p = 2.0;
        for &t in &[0.01, 0.3, 2.0] {
            p.dispersion_time = Some(t);
            let r = ratio_probe(ProbeKind::DispersionLp, 1, &p, 3).unwrap();
            for v in r.ratios {
                assert!((v - 1.0).abs() < 1e-10, "{v}");
            }
        }
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ProbeKind::ALL {
            assert_eq!(k.name().parse::<ProbeKind>().unwrap(), k);
        }
    }

    #[test]
    fn single_band_is_rejected() {
        assert!(band_flatness(ProbeKind::Kato, &small(2), &[1], 1).is_err());
    }

    #[test]
    fn degenerate_duhamel_matches_single_frame() {
        let p = small(2);
        let (g, horizon) = p.band_setup(1).unwrap();
        let u = synthesize(&g, &GeneratorSpec::RandomBand { band: 1, seed: 4, amplitude: 1.0 }).unwrap();
        let times = TimeSchedule::Uniform { n: 7 }.times(horizon).unwrap();
        let m = 3;
        let frames = (0..times.len())
            .map(|i| if i == m { u.clone() } else { SpectralField::zeros(g.clone()) })
            .collect();
        let forcing = SpaceTimeBlock { grid: g, times: times.clone(), frames };
        let duh = duhamel_free(&forcing);
        let h = times[1] - times[0];
        for n in 0..times.len() {
            let direct = if n < m {
                SpectralField::zeros(u.grid.clone())
            } else {
                // Trapezoid weight h/2 when t_m is the endpoint, h otherwise.
                let w = if n == m { h / 2.0 } else { h };
                evolve(&u, times[n] - times[m]).scale(w)
            };
            let err = duh.frames[n].sub(&direct).l2_norm();
            assert!(err <= 1e-10 * u.l2_norm() * h, "n={n} err={err}");
        }
    }
}
