use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use zklab::gzk_solver::{solve, Dealiasing, SolverConfig};
use zklab::propagator::TimeSchedule;
use zklab::spectral::{make_grid, sobolev_norm, synthesize, GeneratorSpec, SpectralField};

use super::{get_usize, Outcome};
use crate::config::Interval;
use crate::{rec, CliError};

#[derive(clap::Args, Serialize, Debug, Default)]
pub struct Args {
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub length: Option<f64>,
    /// Initial data, e.g. `gaussian:sigma=2` or `rough:s=0.6,seed=3`.
    #[arg(long)]
    pub generator: Option<String>,
    /// Rescale the data to this `H^s` norm.
    #[arg(long)]
    pub normalize_hs: Option<f64>,
    #[arg(long)]
    pub k_power: Option<u32>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub n_frames: Option<usize>,
    /// full_padding | two_thirds
    #[arg(long)]
    pub dealiasing: Option<String>,
    #[arg(long)]
    pub nonlinear_coeff: Option<f64>,
    #[arg(long)]
    pub c_stab: Option<f64>,
    /// Also run with dt/2 and dt/4 and report the error ratio.
    #[arg(long)]
    pub self_convergence: Option<bool>,
    /// Fail (exit 2) unless the self-convergence ratio lies in `lo..hi`.
    #[arg(long)]
    pub expect_ratio: Option<String>,
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
    pub dt: f64,
    pub n_frames: usize,
    pub dealiasing: Dealiasing,
    pub nonlinear_coeff: f64,
    pub c_stab: f64,
    pub self_convergence: bool,
    pub expect_ratio: Option<Interval>,
}

pub fn defaults(peek: &Value) -> Result<Params, CliError> {
    let d = get_usize(peek, "d").unwrap_or(2);
    Ok(Params {
        d,
        resolution: if d == 2 { 64 } else { 32 },
        length: 24.0,
        generator: "gaussian:sigma=2".into(),
        normalize_hs: None,
        k_power: 1,
        s: 1.0,
        horizon: 1.0,
        dt: 1.0 / 64.0,
        n_frames: 11,
        dealiasing: if d == 2 { Dealiasing::FullPadding } else { Dealiasing::TwoThirds },
        nonlinear_coeff: 1.0,
        c_stab: 1.0,
        self_convergence: false,
        expect_ratio: None,
    })
}

/// Synthesizes the initial data on a cube and optionally rescales it in `H^s`.
pub fn initial_data(
    d: usize,
    resolution: usize,
    length: f64,
    generator: &str,
    normalize_hs: Option<f64>,
    s: f64,
) -> Result<SpectralField, CliError> {
    let grid = Arc::new(make_grid(d, &vec![length; d], &vec![resolution; d])?);
    let spec = GeneratorSpec::parse(generator).map_err(|e| CliError::config("params.generator", e.to_string()))?;
    let mut u0 = synthesize(&grid, &spec)?;
    if let Some(target) = normalize_hs {
        let n = sobolev_norm(&u0, s);
        if n > 0.0 {
            u0 = u0.scale(target / n);
        }
    }
    Ok(u0)
}

pub fn solver_config(p: &Params) -> SolverConfig {
    SolverConfig {
        k_power: p.k_power,
        s: p.s,
        horizon: p.horizon,
        dt: p.dt,
        dealiasing: p.dealiasing,
        schedule: TimeSchedule::Uniform { n: p.n_frames },
        nonlinear_coeff: p.nonlinear_coeff,
        c_stab: p.c_stab,
        ..Default::default()
    }
}

/// `||u_dt - u_{dt/2}|| / ||u_{dt/2} - u_{dt/4}||` at the final time. Steps go
/// straight to `T` so that halving `dt` exactly doubles the step count.
pub fn self_convergence_ratio(u0: &SpectralField, cfg: &SolverConfig) -> Result<f64, CliError> {
    let mut finals = Vec::new();
    for f in [1.0, 0.5, 0.25] {
        let c = SolverConfig {
            dt: cfg.dt * f,
            schedule: TimeSchedule::Uniform { n: 2 },
            ..cfg.clone()
        };
        let out = solve(u0, &c)?;
        finals.push(out.block.frames.last().expect("at least one frame").clone());
    }
    Ok(finals[0].sub(&finals[1]).l2_norm() / finals[1].sub(&finals[2]).l2_norm())
}

pub fn execute(p: &Params) -> Result<Outcome, CliError> {
    let u0 = initial_data(p.d, p.resolution, p.length, &p.generator, p.normalize_hs, p.s)?;
    let cfg = solver_config(p);
    let out = solve(&u0, &cfg)?;
    let diag = &out.diagnostics;
    let base = |kind: &str, v: f64| {
        let mut r = rec("solve", kind, v);
        r.d = Some(p.d);
        r.s = Some(p.s);
        r.k_power = Some(p.k_power);
        r
    };
    let mut records = Vec::new();
    for (i, ((t, m), h)) in out.block.times.iter().zip(&diag.mass).zip(&diag.hamiltonian).enumerate() {
        for (kind, v) in [("t", *t), ("mass", *m), ("hamiltonian", *h)] {
            let mut r = base(kind, v);
            r.j = Some(i as i32);
            records.push(r);
        }
    }
    records.push(base("max_mass_drift", diag.max_mass_drift));
    records.push(base("max_hamiltonian_drift", diag.max_hamiltonian_drift));
    if let Some(a) = diag.aliasing_level {
        records.push(base("aliasing_level", a));
    }
    let mut summary = vec![
        format!(
            "solve d={} N={} L={} k_power={} T={} dt={} ({} steps, {:?})",
            p.d, p.resolution, p.length, p.k_power, p.horizon, p.dt, diag.steps, p.dealiasing
        ),
        format!("max mass drift {:.3e}, max hamiltonian drift {:.3e}", diag.max_mass_drift, diag.max_hamiltonian_drift),
    ];
    if let Some(a) = diag.aliasing_level {
        summary.push(format!("two-thirds aliasing level {a:.3e}"));
    }
    let mut failures = Vec::new();
    let mut ratio = None;
    if p.self_convergence {
        let r = self_convergence_ratio(&u0, &cfg)?;
        records.push(base("self_convergence_ratio", r));
        summary.push(format!("dt-halving error ratio {r:.3}"));
        if let Some(iv) = p.expect_ratio {
            if !iv.contains(r) {
                failures.push(format!("self-convergence ratio {r:.3} outside {iv}"));
            }
        }
        ratio = Some(r);
    }
    let norms: Vec<f64> = out.block.frames.iter().map(|f| f.l2_norm()).collect();
    let mut stdout = vec![format!("max mass drift {:.6e}", diag.max_mass_drift)];
    if let Some(r) = ratio {
        stdout.push(format!("self-convergence ratio {r:.6}"));
    }
    Ok(Outcome {
        records,
        report: serde_json::json!({
            "times": out.block.times,
            "l2_norms": norms,
            "diagnostics": diag,
            "self_convergence_ratio": ratio,
        }),
        summary,
        plot: None,
        failures,
        stdout,
    })
}
