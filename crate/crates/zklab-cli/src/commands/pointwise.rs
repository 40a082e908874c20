use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use zklab::gzk_solver::{pointwise_experiment, Dealiasing, PointwiseConfig, SolverConfig};
use zklab::propagator::TimeSchedule;

use super::solve::initial_data;
use super::{json, Outcome};
use crate::config::{FloatList, IntList};
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
    /// Regularity of the rough data.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `H^s` norm of the data.
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub k_power: Option<u32>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub n_frames: Option<usize>,
    #[arg(long)]
    pub dealiasing: Option<String>,
    /// Truncations `N`, powers of two.
    #[arg(long)]
    pub truncations: Option<String>,
    #[arg(long)]
    pub epsilons: Option<String>,
    #[arg(long)]
    pub taus: Option<String>,
    #[arg(long)]
    pub oversample: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct Params {
    pub d: usize,
    pub resolution: usize,
    pub length: f64,
    pub s: f64,
    pub delta: f64,
    pub seed: u64,
    pub amplitude: f64,
    pub k_power: u32,
    pub horizon: f64,
    pub dt: f64,
    pub n_frames: usize,
    pub dealiasing: Dealiasing,
    pub truncations: IntList,
    pub epsilons: FloatList,
    pub taus: FloatList,
    pub oversample: usize,
}

pub fn defaults(peek: &Value) -> Result<Params, CliError> {
    let horizon = peek.get("horizon").and_then(Value::as_f64).unwrap_or(0.02);
    Ok(Params {
        d: 2,
        resolution: 256,
        length: PI,
        s: 0.6,
        delta: 0.1,
        seed: 3,
        amplitude: 1.0,
        k_power: 2,
        horizon,
        dt: horizon / 64.0,
        n_frames: 33,
        dealiasing: Dealiasing::FullPadding,
        truncations: IntList(vec![4, 8, 16, 32]),
        epsilons: FloatList(vec![0.05, 0.1, 0.2, 0.4]),
        taus: FloatList((0..5).map(|i| horizon / 2f64.powi(i)).collect()),
        oversample: 1,
    })
}

pub fn execute(p: &Params) -> Result<Outcome, CliError> {
    let generator = format!("rough:s={},delta={},seed={},amplitude={}", p.s, p.delta, p.seed, p.amplitude);
    let u0 = initial_data(p.d, p.resolution, p.length, &generator, None, p.s)?;
    let truncations = p
        .truncations
        .0
        .iter()
        .map(|&n| u32::try_from(n).map_err(|_| CliError::config("params.truncations", format!("{n} is negative"))))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = PointwiseConfig {
        solver: SolverConfig {
            k_power: p.k_power,
            s: p.s,
            horizon: p.horizon,
            dt: p.dt,
            dealiasing: p.dealiasing,
            schedule: TimeSchedule::Uniform { n: p.n_frames },
            ..Default::default()
        },
        truncations,
        epsilons: p.epsilons.0.clone(),
        taus: p.taus.0.clone(),
        oversample: p.oversample,
    };
    let report = pointwise_experiment(&u0, &cfg)?;
    let base = |kind: &str, v: f64| {
        let mut r = rec("pointwise", kind, v);
        r.d = Some(p.d);
        r.s = Some(p.s);
        r.k_power = Some(p.k_power);
        r
    };
    let mut records = Vec::new();
    let mut summary = vec![format!(
        "pointwise d={} N={} L={:.4} s={} k_power={} T={}",
        p.d, p.resolution, p.length, p.s, p.k_power, p.horizon
    )];
    for row in &report.rows {
        for (kind, v) in [("diff_l4_linf", row.diff_norm), ("tail_l2", row.tail_l2)] {
            let mut r = base(kind, v);
            r.k = Some(row.n as i32);
            records.push(r);
        }
        summary.push(format!("  N={:>3} ||u_N - u||={:.6e} ||(I-P_N)u0||={:.6e}", row.n, row.diff_norm, row.tail_l2));
    }
    // Exceedance rows: `q` holds tau, `r` holds epsilon.
    for e in &report.exceedance {
        let mut r = base("exceedance", e.measure);
        r.q = Some(e.tau);
        r.r = Some(e.epsilon);
        records.push(r);
    }
    let mut failures = Vec::new();
    if !report.diffs_decreasing {
        failures.push("||u_N - u|| not strictly decreasing in N".to_string());
    }
    if !report.exceedance_monotone {
        failures.push("exceedance grows as tau shrinks".to_string());
    }
    if !report.exceedance_monotone_eps {
        failures.push("exceedance grows with epsilon".to_string());
    }
    summary.push(format!(
        "decreasing in N: {}; monotone in tau: {}; monotone in eps: {}",
        report.diffs_decreasing, report.exceedance_monotone, report.exceedance_monotone_eps
    ));
    let plot = Plot {
        title: "truncated-data convergence".into(),
        x_label: "log₂N".into(),
        y_label: "log₂ ||u_N - u||".into(),
        points: report.rows.iter().map(|r| ((r.n as f64).log2(), r.diff_norm.log2())).collect(),
        line: None,
    };
    Ok(Outcome {
        records,
        report: json(&report),
        summary,
        plot: Some(plot),
        failures,
        stdout: vec![format!("decreasing {}", report.diffs_decreasing)],
    })
}
