use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use zklab::counterexample_probe::{necessity_probe, JRule, NecessityConfig, PhiSpec};
use zklab::propagator::TimeSchedule;
use zklab::spectral::make_grid;

use super::{get_usize, json, Outcome};
use crate::config::{IntList, Interval};
use crate::{fit_plot, rec, CliError};

#[derive(clap::Args, Serialize, Debug, Default)]
pub struct Args {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Frequency indices, e.g. `2..6` or `1,2,4`.
    #[arg(long)]
    pub k: Option<String>,
    /// `neg-k` or a constant `j`.
    #[arg(long)]
    pub j_rule: Option<String>,
    #[arg(long)]
    pub s_trial: Option<f64>,
    #[arg(long)]
    pub length: Option<f64>,
    /// Points per axis (default: smallest power of two that fits every `k`).
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub n_times: Option<usize>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub oversample: Option<usize>,
    /// Fail (exit 2) unless the fitted slope lies in `lo..hi`.
    #[arg(long)]
    pub expect_slope: Option<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct Params {
    pub d: usize,
    pub p: f64,
    pub k: IntList,
    pub j_rule: String,
    pub s_trial: f64,
    pub length: f64,
    pub resolution: usize,
    pub horizon: f64,
    pub n_times: usize,
    pub t_min: f64,
    pub oversample: usize,
    pub expect_slope: Option<Interval>,
}

fn default_length(d: usize) -> f64 {
    if d == 2 {
        8.0
    } else {
        2.0 * PI
    }
}

/// Smallest power-of-two resolution on which every `phi_{j,k}` is feasible.
pub fn auto_resolution(d: usize, length: f64, ks: &[i32], rule: JRule) -> Option<usize> {
    let cap = match d {
        2 => 4096,
        3 => 256,
        _ => 64,
    };
    let mut n = 16;
    while n <= cap {
        if let Ok(g) = make_grid(d, &vec![length; d], &vec![n; d]) {
            if ks.iter().all(|&k| PhiSpec { j: rule.j_for(k), k, d }.check(&g).is_ok()) {
                return Some(n);
            }
        }
        n *= 2;
    }
    None
}

pub fn defaults(peek: &Value) -> Result<Params, CliError> {
    let d = get_usize(peek, "d").unwrap_or(2);
    let length = peek.get("length").and_then(Value::as_f64).unwrap_or_else(|| default_length(d));
    let k = match peek.get("k") {
        Some(v) => serde_json::from_value(v.clone()).unwrap_or(IntList(vec![])),
        None => IntList(if d == 2 { vec![1, 2, 3, 4] } else { vec![0, 1, 2, 3] }),
    };
    let j_rule = peek.get("j_rule").and_then(Value::as_str).unwrap_or("neg-k").to_string();
    let rule = j_rule.parse().unwrap_or(JRule::NegK);
    let resolution = auto_resolution(d, length, &k.0, rule).unwrap_or(if d == 2 { 256 } else { 64 });
    Ok(Params {
        d,
        p: 4.0,
        k,
        j_rule,
        s_trial: 0.0,
        length,
        resolution,
        horizon: 1.0,
        n_times: 63,
        t_min: 1e-6,
        oversample: 2,
        expect_slope: None,
    })
}

pub fn execute(p: &Params) -> Result<Outcome, CliError> {
    let rule: JRule = p.j_rule.parse().map_err(|e: zklab::Error| CliError::config("params.j_rule", e.to_string()))?;
    let grid = Arc::new(make_grid(p.d, &vec![p.length; p.d], &vec![p.resolution; p.d])?);
    let cfg = NecessityConfig {
        schedule: TimeSchedule::Geometric { n: p.n_times, t_min: p.t_min },
        horizon: p.horizon,
        oversample: p.oversample,
    };
    let report = necessity_probe(&grid, p.p, &p.k.0, rule, p.s_trial, &cfg)?;
    let mut records = Vec::new();
    for row in &report.rows {
        for (kind, v) in [("ratio", (row.lhs / row.sobolev)), ("lower_bound_ratio", row.lower_bound_ratio)] {
            let mut r = rec("necessity", kind, v);
            r.d = Some(p.d);
            r.p = Some(p.p);
            r.s = Some(p.s_trial);
            r.j = Some(row.j);
            r.k = Some(row.k);
            records.push(r);
        }
    }
    let mut r = rec("necessity", "slope", report.fit.slope);
    r.d = Some(p.d);
    r.p = Some(p.p);
    r.s = Some(p.s_trial);
    records.push(r);
    let mut summary = vec![
        format!("necessity probe d={} p={} s={} j-rule {} on {}^{} box {}", p.d, p.p, p.s_trial, p.j_rule, p.resolution, p.d, p.length),
        format!("fitted slope {:.4} (predicted {:.4}), max residual {:.3e}", report.fit.slope, report.predicted_slope, report.fit.max_residual),
    ];
    for row in &report.rows {
        summary.push(format!(
            "  k={} j={} log2 R={:.4} lower-bound ratio {:.3}",
            row.k, row.j, row.log2_ratio, row.lower_bound_ratio
        ));
    }
    let mut failures = Vec::new();
    if let Some(iv) = p.expect_slope {
        if !iv.contains(report.fit.slope) {
            failures.push(format!("slope {:.4} outside {iv}", report.fit.slope));
        }
    }
    let plot = fit_plot(
        format!("necessity d={} p={}", p.d, p.p),
        &report.fit.points,
        report.fit.slope,
        report.fit.intercept,
    );
    Ok(Outcome {
        records,
        report: json(&report),
        summary,
        plot: Some(plot),
        failures,
        stdout: vec![format!("slope {:.6}", report.fit.slope)],
    })
}
