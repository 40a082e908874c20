use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use zklab::gzk_solver::paraproduct_check;
use zklab::spectral::{make_grid, synthesize, GeneratorSpec};

use super::{json, Outcome};
use crate::config::IntList;
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
    pub k_power: Option<u32>,
    #[arg(long)]
    pub bands: Option<String>,
    #[arg(long)]
    pub n_inputs: Option<usize>,
    /// Cutoff radius of the random band-limited inputs.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct Params {
    pub d: usize,
    pub resolution: usize,
    pub length: f64,
    pub k_power: u32,
    pub bands: IntList,
    pub n_inputs: usize,
    pub radius: f64,
    pub seed: u64,
    pub tolerance: f64,
}

pub fn defaults(_: &Value) -> Result<Params, CliError> {
    Ok(Params {
        d: 2,
        resolution: 48,
        length: 16.0,
        k_power: 2,
        bands: IntList(vec![0, 1, 2, 3, 4]),
        n_inputs: 50,
        radius: 8.0,
        seed: 0,
        tolerance: 1e-10,
    })
}

pub fn execute(p: &Params) -> Result<Outcome, CliError> {
    let grid = std::sync::Arc::new(make_grid(p.d, &vec![p.length; p.d], &vec![p.resolution; p.d])?);
    let seeds: Vec<u64> = (0..p.n_inputs as u64).map(|i| p.seed + i).collect();
    let reports = seeds
        .par_iter()
        .map(|&seed| {
            let u = synthesize(&grid, &GeneratorSpec::RandomLowpass { radius: p.radius, seed, amplitude: 1.0 })?;
            p.bands.0.iter().map(|&b| paraproduct_check(&u, p.k_power, b)).collect::<zklab::Result<Vec<_>>>()
        })
        .collect::<zklab::Result<Vec<_>>>()?;
    let mut records = Vec::new();
    let mut worst = 0.0f64;
    for (seed, rs) in seeds.iter().zip(&reports) {
        for r in rs {
            let mut row = rec("paraproduct", "relative_error", r.relative_error);
            row.d = Some(p.d);
            row.k_power = Some(p.k_power);
            row.band = Some(r.band);
            row.seed = Some(*seed);
            records.push(row);
            worst = worst.max(r.relative_error);
        }
    }
    let mut failures = Vec::new();
    if !(worst < p.tolerance) {
        failures.push(format!("worst relative error {worst:.3e} >= {:.1e}", p.tolerance));
    }
    Ok(Outcome {
        records,
        report: json(&reports),
        summary: vec![
            format!("paraproduct identity d={} N={} k_power={} bands {:?}", p.d, p.resolution, p.k_power, p.bands.0),
            format!("{} inputs, worst relative error {worst:.3e}", p.n_inputs),
        ],
        plot: None,
        failures,
        stdout: vec![format!("worst relative error {worst:.6e}")],
    })
}
