pub mod dispersion;
pub mod estimate;
pub mod necessity;
pub mod paraproduct;
pub mod picard;
pub mod pointwise;
pub mod solve;
pub mod thresholds;

use crate::emit::{Plot, Record};

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub records: Vec<Record>,
    pub report: serde_json::Value,
    pub summary: Vec<String>,
    pub plot: Option<Plot>,
    /// Violated invariants; any entry makes the exit code 2.
    pub failures: Vec<String>,
    pub stdout: Vec<String>,
}

pub(crate) fn json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("reports serialize")
}

pub(crate) fn get_usize(v: &serde_json::Value, key: &str) -> Option<usize> {
    v.get(key).and_then(|x| x.as_u64()).map(|x| x as usize)
}
