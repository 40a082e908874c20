use serde::{Deserialize, Serialize};
use serde_json::Value;
use zklab::gzk_solver::{find_horizon, Dealiasing, SolverConfig};
use zklab::mixed_norms::{YsParams, YsVariant};
use zklab::propagator::TimeSchedule;

use super::solve::initial_data;
use super::{get_usize, Outcome};
use crate::emit::Plot;
use crate::{rec, CliError};

#[derive(clap::Args, Serialize, Debug, Default)]
pub struct Args {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long)]
    pub normalize_hs: Option<f64>,
    #[arg(long)]
    pub k_power: Option<u32>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub n_frames: Option<usize>,
    #[arg(long)]
    pub dealiasing: Option<String>,
    #[arg(long)]
    pub nonlinear_coeff: Option<f64>,
    #[arg(long)]
    pub picard_max_iter: Option<usize>,
    #[arg(long)]
    pub picard_tol: Option<f64>,
    /// Halve T up to this many times after a failed contraction.
    #[arg(long)]
    pub max_halvings: Option<usize>,
    /// 2d | highd | tilde3 (default by dimension)
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub ys_oversample: Option<usize>,
    #[arg(long)]
    pub ys_epsilon: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct Params {
    pub d: usize,
    pub resolution: usize,
    pub length: f64,
    pub generator: String,
    pub normalize_hs: Option<f64>,
    pub k_power: u32,
    pub s: f64,
    pub horizon: f64,
    pub n_frames: usize,
    pub dealiasing: Dealiasing,
    pub nonlinear_coeff: f64,
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    pub max_halvings: usize,
    pub variant: Option<String>,
    pub ys_oversample: usize,
    pub ys_epsilon: f64,
}

pub fn defaults(peek: &Value) -> Result<Params, CliError> {
    let d = get_usize(peek, "d").unwrap_or(3);
    let k_power = peek.get("k_power").and_then(Value::as_u64).unwrap_or(4) as u32;
    let ys = YsParams::default();
    Ok(Params {
        d,
        resolution: 32,
        length: 2.0 * std::f64::consts::PI,
        generator: "gaussian:sigma=0.3".into(),
        normalize_hs: Some(0.1),
        k_power,
        s: d as f64 / 2.0 - 2.0 / k_power as f64 + 0.1,
        horizon: 1.0,
        n_frames: 17,
        dealiasing: Dealiasing::FullPadding,
        nonlinear_coeff: 1.0,
        picard_max_iter: 30,
        picard_tol: 1e-8,
        max_halvings: 0,
        variant: None,
        ys_oversample: ys.oversample,
        ys_epsilon: ys.epsilon,
    })
}

pub fn solver_config(p: &Params) -> Result<SolverConfig, CliError> {
    let variant = p
        .variant
        .as_deref()
        .map(YsVariant::parse)
        .transpose()
        .map_err(|e| CliError::config("params.variant", e.to_string()))?;
    Ok(SolverConfig {
        k_power: p.k_power,
        s: p.s,
        horizon: p.horizon,
        dt: p.horizon,
        dealiasing: p.dealiasing,
        picard_max_iter: p.picard_max_iter,
        picard_tol: p.picard_tol,
        schedule: TimeSchedule::Uniform { n: p.n_frames },
        nonlinear_coeff: p.nonlinear_coeff,
        ys: YsParams {
            oversample: p.ys_oversample,
            epsilon: p.ys_epsilon,
            ..YsParams::default()
        },
        variant,
        ..Default::default()
    })
}

pub fn execute(p: &Params) -> Result<Outcome, CliError> {
    let u0 = initial_data(p.d, p.resolution, p.length, &p.generator, p.normalize_hs, p.s)?;
    let cfg = solver_config(p)?;
    let (_, trace, failure, horizon) = find_horizon(&u0, &cfg, p.max_halvings)?;
    let base = |kind: &str, v: f64| {
        let mut r = rec("picard", kind, v);
        r.d = Some(p.d);
        r.s = Some(p.s);
        r.k_power = Some(p.k_power);
        r
    };
    let mut records: Vec<_> = trace
        .iterate_diffs
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut r = base("iterate_diff", v);
            r.j = Some(i as i32 + 1);
            r
        })
        .collect();
    records.push(base("initial_norm", trace.initial_norm));
    records.push(base("contraction_factor", trace.contraction_factor));
    records.push(base("horizon", horizon));
    let status = match &failure {
        Some(e) => e.to_string(),
        None if trace.converged => "converged".to_string(),
        None => "iteration limit reached".to_string(),
    };
    let summary = vec![
        format!("picard d={} N={} k_power={} s={} T={horizon}", p.d, p.resolution, p.k_power, p.s),
        format!(
            "{} iterations, contraction factor {:.3e}, status: {status}",
            trace.iterate_diffs.len(),
            trace.contraction_factor
        ),
        format!(
            "diffs: {}",
            trace.iterate_diffs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>().join(" ")
        ),
    ];
    let points: Vec<(f64, f64)> = trace
        .iterate_diffs
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > 0.0 && d.is_finite())
        .map(|(i, d)| ((i + 1) as f64, d.log2()))
        .collect();
    let plot = Plot {
        title: format!("Picard diffs d={} k_power={}", p.d, p.k_power),
        x_label: "iteration".into(),
        y_label: "log₂ diff".into(),
        points,
        line: None,
    };
    let failures = failure.iter().map(|e| e.to_string()).collect();
    Ok(Outcome {
        records,
        report: serde_json::json!({ "trace": trace, "horizon": horizon, "status": status }),
        summary,
        plot: Some(plot),
        failures,
        stdout: vec![format!("contraction factor {:.6e} ({status})", trace.contraction_factor)],
    })
}
