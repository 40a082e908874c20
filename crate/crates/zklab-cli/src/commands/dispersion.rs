use serde::{Deserialize, Serialize};
use serde_json::Value;
use zklab::estimate_probe::ProbeKind;
use zklab::propagator::kernel::{decay_fit, KernelMethod, QuadratureSpec, ZStrategy};

use super::estimate::{flatness_outcome, Params as EstimateParams};
use super::{get_usize, json, Outcome};
use crate::config::{IntList, Interval};
use crate::emit::Plot;
use crate::{rec, CliError};

#[derive(clap::Args, Serialize, Debug, Default)]
pub struct Args {
    /// `kernel` (decay of the frequency-localized kernel) or `dispersion_lp`.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub n_t: Option<usize>,
    /// radial | lattice
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub density: Option<f64>,
    /// stationary_ray | origin
    #[arg(long)]
    pub z_strategy: Option<String>,
    #[arg(long)]
    pub n_angles: Option<usize>,
    #[arg(long)]
    pub gamma_step: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
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
    pub seed: Option<u64>,
    #[arg(long)]
    pub dispersion_time: Option<f64>,
    #[arg(long)]
    pub bands: Option<String>,
    #[arg(long)]
    pub n_seeds: Option<usize>,
    #[arg(long)]
    pub expect_slope: Option<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct Params {
    pub kind: String,
    pub d: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub method: String,
    pub density: f64,
    pub z_strategy: String,
    pub n_angles: usize,
    pub gamma_step: f64,
    pub p: f64,
    pub horizon: f64,
    pub length: f64,
    pub resolution: usize,
    pub n_times: usize,
    pub oversample: usize,
    pub seed: u64,
    pub dispersion_time: Option<f64>,
    pub bands: IntList,
    pub n_seeds: usize,
    pub expect_slope: Option<Interval>,
}

pub fn defaults(peek: &Value) -> Result<Params, CliError> {
    let d = get_usize(peek, "d").unwrap_or(3);
    let e = EstimateParams::with_defaults(ProbeKind::DispersionLp, d);
    Ok(Params {
        kind: "kernel".into(),
        d,
        t_min: 1.0,
        t_max: 100.0,
        n_t: 12,
        method: "radial".into(),
        density: 4.0,
        z_strategy: "stationary_ray".into(),
        n_angles: 13,
        gamma_step: 0.25,
        p: e.p,
        horizon: e.horizon,
        length: e.length,
        resolution: e.resolution,
        n_times: e.n_times,
        oversample: e.oversample,
        seed: e.seed,
        dispersion_time: e.dispersion_time,
        bands: e.bands,
        n_seeds: e.n_seeds,
        expect_slope: None,
    })
}

/// `n` times spaced evenly in `log t` over `[lo, hi]`.
pub fn log_times(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

pub fn execute(p: &Params) -> Result<Outcome, CliError> {
    match p.kind.as_str() {
        "kernel" => kernel(p),
        "dispersion_lp" => {
            let mut e = EstimateParams::with_defaults(ProbeKind::DispersionLp, p.d);
            e.p = p.p;
            e.horizon = p.horizon;
            e.length = p.length;
            e.resolution = p.resolution;
            e.n_times = p.n_times;
            e.oversample = p.oversample;
            e.seed = p.seed;
            e.dispersion_time = p.dispersion_time;
            e.bands = p.bands.clone();
            e.n_seeds = p.n_seeds;
            let pp = e.probe_params();
            let report = zklab::estimate_probe::band_flatness(ProbeKind::DispersionLp, &pp, &e.bands.0, e.n_seeds)?;
            Ok(flatness_outcome(ProbeKind::DispersionLp, &pp, &report, p.expect_slope))
        }
        other => Err(CliError::config("params.kind", format!("`{other}` is not kernel or dispersion_lp"))),
    }
}

fn kernel(p: &Params) -> Result<Outcome, CliError> {
    let spec = match p.method.as_str() {
        "radial" => QuadratureSpec {
            method: KernelMethod::Radial {
                density: p.density,
                min_nodes: 2048,
                budget: 1 << 22,
            },
            phase: true,
        },
        "lattice" => QuadratureSpec::lattice(p.density),
        other => return Err(CliError::config("params.method", format!("`{other}` is not radial or lattice"))),
    };
    let zs = match p.z_strategy.as_str() {
        "stationary_ray" => ZStrategy::StationaryRay {
            n_angles: p.n_angles,
            gamma_step: p.gamma_step,
        },
        "origin" => ZStrategy::Origin,
        other => return Err(CliError::config("params.z_strategy", format!("`{other}` is not stationary_ray or origin"))),
    };
    let times = log_times(p.t_min, p.t_max, p.n_t);
    let fit = decay_fit(&times, &zs, p.d, &spec)?;
    let mut records = Vec::new();
    // Rows sharing `j` belong to the same time sample.
    for (i, ((_, lv), t)) in fit.points.iter().zip(&times).enumerate() {
        for (kind, v) in [("t", *t), ("sup_abs_kernel", lv.exp2())] {
            let mut r = rec("dispersion_kernel", kind, v);
            r.d = Some(p.d);
            r.j = Some(i as i32);
            records.push(r);
        }
    }
    let mut r = rec("dispersion_kernel", "slope", fit.slope);
    r.d = Some(p.d);
    records.push(r);
    let mut failures = Vec::new();
    if let Some(iv) = p.expect_slope {
        if !iv.contains(fit.slope) {
            failures.push(format!("slope {:.4} outside {iv}", fit.slope));
        }
    }
    let summary = vec![
        format!("dispersion kernel d={} t in [{}, {}] ({} times, {} quadrature)", p.d, p.t_min, p.t_max, p.n_t, p.method),
        format!("fitted decay slope {:.4}, max residual {:.3e}", fit.slope, fit.max_residual),
    ];
    let plot = Plot {
        title: format!("kernel decay d={}", p.d),
        x_label: "log₂t".into(),
        y_label: "log₂ sup|I|".into(),
        points: fit.points.clone(),
        line: Some((fit.slope, fit.intercept)),
    };
    Ok(Outcome {
        records,
        report: json(&fit),
        summary,
        plot: Some(plot),
        failures,
        stdout: vec![format!("slope {:.6}", fit.slope)],
    })
}
