//! Trailing-window gas-price oracles.

use crate::error::{Error, Result};
use crate::stats::percentile;

pub const GETH_BLOCKS: usize = 20;
pub const GETH_PERCENTILE: f64 = 60.0;
pub const GSE_BLOCKS: usize = 200;

/// 60th percentile of the trailing 20 block minima.
pub fn baseline_geth(minima: &[f64]) -> Result<f64> {
    if minima.len() < GETH_BLOCKS {
        return Err(Error::invalid(format!(
            "geth oracle needs {GETH_BLOCKS} block minima, got {}",
            minima.len()
        )));
    }
    Ok(percentile(&minima[minima.len() - GETH_BLOCKS..], GETH_PERCENTILE))
}

/// Fraction of the trailing 200 blocks whose minimum price is at or below
/// `candidate`.
pub fn baseline_gse(minima: &[f64], candidate: f64) -> Result<f64> {
    if minima.len() < GSE_BLOCKS {
        return Err(Error::invalid(format!(
            "gas-station oracle needs {GSE_BLOCKS} block minima, got {}",
            minima.len()
        )));
    }
    let window = &minima[minima.len() - GSE_BLOCKS..];
    Ok(window.iter().filter(|&&m| m <= candidate).count() as f64 / GSE_BLOCKS as f64)
}
