use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use zklab::counterexample_probe::{threshold_exact, ThresholdKind, ThresholdQuery};

use super::{json, Outcome};
use crate::config::Ratio;
use crate::{rec, CliError};

#[derive(clap::Args, Serialize, Debug, Default)]
pub struct Args {
    /// spacetime_necessary | timeonly_necessary | sjolin | rogers
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub d: Option<i64>,
    /// Exponent, e.g. `4` or `7/2`.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub s0: Option<String>,
    #[arg(long)]
    pub m: Option<i64>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct Params {
    pub kind: ThresholdKind,
    pub d: i64,
    pub p: Ratio,
    pub s0: Option<Ratio>,
    pub m: Option<i64>,
}

pub fn defaults(_: &Value) -> Result<Params, CliError> {
    Ok(Params {
        kind: ThresholdKind::SpacetimeNecessary,
        d: 3,
        p: Ratio(Rational64::from_integer(4)),
        s0: None,
        m: None,
    })
}

fn as_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn execute(p: &Params) -> Result<Outcome, CliError> {
    let q = ThresholdQuery {
        kind: p.kind,
        d: p.d,
        p: p.p.0,
        s0: p.s0.map(|r| r.0),
        m: p.m,
    };
    let exact = threshold_exact(&q)?;
    let value = as_f64(exact);
    let mut r = rec("thresholds", &p.kind.to_string(), value);
    r.d = Some(p.d as usize);
    r.p = Some(as_f64(p.p.0));
    Ok(Outcome {
        records: vec![r],
        report: serde_json::json!({ "query": json(&q), "exact": exact.to_string(), "value": value }),
        summary: vec![format!("{}(d={}, p={}) = {exact} = {value}", p.kind, p.d, p.p.0)],
        stdout: vec![format!("{value}")],
        ..Default::default()
    })
}
