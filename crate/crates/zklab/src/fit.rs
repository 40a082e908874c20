use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(log2 scale, log2 value)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFitReport {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

impl ScalingFitReport {
    pub fn fit(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::InvalidArgument(format!(
                "a scaling fit needs at least 4 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidArgument("non-finite point in scaling fit".into()));
        }
        let (slope, intercept) = least_squares(&points);
        let max_residual = points
            .iter()
            .map(|(x, y)| (y - slope * x - intercept).abs())
            .fold(0.0, f64::max);
        Ok(ScalingFitReport {
            points,
            slope,
            intercept,
            max_residual,
        })
    }

    /// Fit `log2 value` against `log2 scale` for positive raw pairs.
    pub fn fit_log2(raw: &[(f64, f64)]) -> Result<Self> {
        Self::fit(raw.iter().map(|(x, y)| (x.log2(), y.log2())).collect())
    }
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (slope, my - slope * mx)
}
