use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Guard against division by zero in MAPE.
pub const MAPE_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rmse: f64,
    pub mae: f64,
    pub mape: f64,
    /// Absent when the targets have zero variance.
    pub r2: Option<f64>,
}

/// RMSE, MAE, MAPE and R^2 of `pred` against `truth`.
pub fn metrics(truth: &[f64], pred: &[f64]) -> Result<MetricReport> {
    if truth.len() != pred.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} targets vs {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::invalid("metrics need at least one value"));
    }
    let n = truth.len() as f64;
    let mean_t = truth.iter().sum::<f64>() / n;
    let (mut se, mut ae, mut ape, mut tot) = (0.0, 0.0, 0.0, 0.0);
    for (&t, &p) in truth.iter().zip(pred) {
        let e = p - t;
        se += e * e;
        ae += e.abs();
        ape += e.abs() / t.abs().max(MAPE_EPSILON);
        tot += (t - mean_t) * (t - mean_t);
    }
    Ok(MetricReport {
        rmse: (se / n).sqrt(),
        mae: ae / n,
        mape: ape / n,
        r2: (tot > 0.0).then(|| 1.0 - se / tot),
    })
}
