use serde::{Deserialize, Serialize};
use serde_json::Value;
use zklab::estimate_probe::{band_flatness, FlatnessReport, GridPolicy, ProbeKind, ProbeParams};

use super::{get_usize, json, Outcome};
use crate::config::{IntList, Interval};
use crate::{fit_plot, rec, CliError, Global};

#[derive(clap::Args, Serialize, Debug, Default)]
pub struct Args {
    /// Probe kind (for example maximal_L4 or retarded_max).
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Regularity (default: the kind's threshold).
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub n_times: Option<usize>,
    #[arg(long)]
    pub oversample: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// band_scaled | fixed
    #[arg(long)]
    pub grid_policy: Option<String>,
    #[arg(long)]
    pub dispersion_time: Option<f64>,
    /// Bands, e.g. `0..5`.
    #[arg(long)]
    pub bands: Option<String>,
    #[arg(long)]
    pub n_seeds: Option<usize>,
    /// Fail (exit 2) unless the flatness slope lies in `lo..hi`.
    #[arg(long)]
    pub expect_slope: Option<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct Params {
    pub kind: ProbeKind,
    pub d: usize,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: Option<f64>,
    pub horizon: f64,
    pub length: f64,
    pub resolution: usize,
    pub n_times: usize,
    pub oversample: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub grid_policy: GridPolicy,
    pub dispersion_time: Option<f64>,
    pub bands: IntList,
    pub n_seeds: usize,
    pub expect_slope: Option<Interval>,
}

impl Params {
    pub fn probe_params(&self) -> ProbeParams {
        ProbeParams {
            d: self.d,
            p: self.p,
            q: self.q,
            r: self.r,
            s: self.s,
            horizon: self.horizon,
            length: self.length,
            resolution: self.resolution,
            n_times: self.n_times,
            oversample: self.oversample,
            epsilon: self.epsilon,
            seed: self.seed,
            grid_policy: self.grid_policy,
            dispersion_time: self.dispersion_time,
        }
    }

    pub fn with_defaults(kind: ProbeKind, d: usize) -> Self {
        let pp = ProbeParams::for_dim(d);
        Params {
            kind,
            d,
            p: pp.p,
            q: pp.q,
            r: pp.r,
            s: pp.s,
            horizon: pp.horizon,
            length: pp.length,
            resolution: pp.resolution,
            n_times: pp.n_times,
            oversample: pp.oversample,
            epsilon: pp.epsilon,
            seed: pp.seed,
            grid_policy: pp.grid_policy,
            dispersion_time: pp.dispersion_time,
            bands: IntList((0..=5).collect()),
            n_seeds: 16,
            expect_slope: None,
        }
    }
}

/// Default kind, default dimension and accepted kinds of each probe command.
fn command_kinds(name: &str) -> (ProbeKind, usize, &'static [ProbeKind]) {
    use ProbeKind::*;
    match name {
        "probe-strichartz" => (Strichartz, 3, &[Strichartz]),
        "probe-maximal" => (MaximalL4, 3, &[MaximalL4, MaximalL4xy]),
        "probe-kato" => (Kato, 2, &[Kato]),
        "probe-retarded" => (RetardedGroup, 2, &[RetardedGroup, RetardedSmooth, RetardedMax]),
        "probe-conjecture" => (ConjectureP3, 2, &[ConjectureP3]),
        _ => (DispersionLp, 2, &[DispersionLp]),
    }
}

pub(crate) fn drive_kind(name: &str, g: &Global, args: &Args) -> Result<i32, CliError> {
    let (kind0, d0, allowed) = command_kinds(name);
    let defaults = move |peek: &Value| -> Result<Params, CliError> {
        let d = get_usize(peek, "d").unwrap_or(d0);
        Ok(Params::with_defaults(kind0, d))
    };
    let execute = move |p: &Params| -> Result<Outcome, CliError> {
        if !allowed.contains(&p.kind) {
            let names: Vec<&str> = allowed.iter().map(|k| k.name()).collect();
            return Err(CliError::config("params.kind", format!("`{}` is not one of {}", p.kind, names.join(", "))));
        }
        run_flatness(p)
    };
    crate::drive(name, g, args, defaults, execute)
}

pub fn run_flatness(p: &Params) -> Result<Outcome, CliError> {
    let pp = p.probe_params();
    let report = band_flatness(p.kind, &pp, &p.bands.0, p.n_seeds)?;
    Ok(flatness_outcome(p.kind, &pp, &report, p.expect_slope))
}

pub fn flatness_outcome(kind: ProbeKind, pp: &ProbeParams, report: &FlatnessReport, expect: Option<Interval>) -> Outcome {
    let s = pp.regularity(kind);
    let base = |k: &str, v: f64| {
        let mut r = rec(kind.name(), k, v);
        r.d = Some(pp.d);
        r.p = Some(pp.p);
        r.q = Some(pp.q);
        r.r = Some(pp.r);
        r.s = Some(s);
        r
    };
    let mut records = Vec::new();
    for st in &report.stats {
        for (seed, v) in st.seeds.iter().zip(&st.ratios) {
            let mut r = base("ratio", *v);
            r.band = Some(st.band);
            r.seed = Some(*seed);
            records.push(r);
        }
        for (k, v) in [("max", st.max), ("median", st.median)] {
            let mut r = base(k, v);
            r.band = Some(st.band);
            records.push(r);
        }
    }
    records.push(base("slope", report.fit.slope));
    let mut summary = vec![
        format!("{} d={} s={s:.4} grid policy {:?}", kind, pp.d, pp.grid_policy),
        format!(
            "band-flatness slope {:.4}, spread {:.4}, max residual {:.3e}",
            report.fit.slope,
            report.spread(),
            report.fit.max_residual
        ),
    ];
    for st in &report.stats {
        summary.push(format!("  band {} max {:.6} median {:.6} ({} seeds)", st.band, st.max, st.median, st.samples));
    }
    let mut failures = Vec::new();
    if let Some(iv) = expect {
        if !iv.contains(report.fit.slope) {
            failures.push(format!("slope {:.4} outside {iv}", report.fit.slope));
        }
    }
    Outcome {
        records,
        report: json(report),
        summary,
        plot: Some(fit_plot(format!("{kind} d={}", pp.d), &report.fit.points, report.fit.slope, report.fit.intercept)),
        failures,
        stdout: vec![format!("slope {:.6}", report.fit.slope)],
    }
}
