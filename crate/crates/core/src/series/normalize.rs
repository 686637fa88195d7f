use serde::{Deserialize, Serialize};

use super::FeatureFrame;
use crate::error::{Error, Result};
use crate::stats::{mean, pop_std};

/// Cap values above `mean + k * std` (population moments of the input).
/// Values below are left alone. A constant series is returned unchanged.
pub fn truncate_outliers(series: &[f64], k: f64) -> Vec<f64> {
    let sd = pop_std(series);
    if !(sd > 0.0) {
        log::warn!("truncate_outliers: constant series left unchanged");
        return series.to_vec();
    }
    let cap = mean(series) + k * sd;
    series.iter().map(|&x| x.min(cap)).collect()
}

/// Mean and population standard deviation of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZScore {
    pub mean: f64,
    pub std: f64,
}

impl ZScore {
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

pub fn zscore_fit(series: &[f64]) -> Result<ZScore> {
    if series.is_empty() {
        return Err(Error::invalid("cannot fit z-score on an empty series"));
    }
    let std = pop_std(series);
    if !(std > 0.0) {
        return Err(Error::ZeroVariance("constant series has no z-score".into()));
    }
    Ok(ZScore {
        mean: mean(series),
        std,
    })
}

pub fn zscore_apply(series: &[f64], p: &ZScore) -> Vec<f64> {
    series.iter().map(|&x| p.apply(x)).collect()
}

pub fn zscore_invert(series: &[f64], p: &ZScore) -> Vec<f64> {
    series.iter().map(|&z| p.invert(z)).collect()
}

/// Per-variable z-score parameters for a frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScoreParams {
    pub variables: Vec<String>,
    pub params: Vec<ZScore>,
}

impl ZScoreParams {
    /// Fit on rows `[from, to)` of every variable, skipping gap cells.
    pub fn fit(frame: &FeatureFrame, from: usize, to: usize) -> Result<Self> {
        let params = (0..frame.n_vars())
            .map(|v| {
                let xs: Vec<f64> = (from..to).filter_map(|t| frame.get(t, v)).collect();
                zscore_fit(&xs).map_err(|e| match e {
                    Error::ZeroVariance(_) => Error::ZeroVariance(format!(
                        "variable `{}` is constant over the fitting rows",
                        frame.variables()[v]
                    )),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ZScoreParams {
            variables: frame.variables().to_vec(),
            params,
        })
    }

    pub fn get(&self, name: &str) -> Result<&ZScore> {
        self.variables
            .iter()
            .position(|v| v == name)
            .map(|i| &self.params[i])
            .ok_or_else(|| Error::invalid(format!("no normalization for `{name}`")))
    }

    /// Normalize every column of `frame`; its variables must match.
    pub fn apply(&self, frame: &FeatureFrame) -> Result<FeatureFrame> {
        self.map(frame, ZScore::apply)
    }

    pub fn invert(&self, frame: &FeatureFrame) -> Result<FeatureFrame> {
        self.map(frame, ZScore::invert)
    }

    fn map(&self, frame: &FeatureFrame, f: fn(&ZScore, f64) -> f64) -> Result<FeatureFrame> {
        if frame.variables() != self.variables.as_slice() {
            return Err(Error::invalid(format!(
                "frame variables {:?} do not match normalization {:?}",
                frame.variables(),
                self.variables
            )));
        }
        let cols = self
            .variables
            .iter()
            .zip(&self.params)
            .enumerate()
            .map(|(v, (name, p))| {
                (
                    name.clone(),
                    frame.column(v).into_iter().map(|x| x.map(|x| f(p, x))).collect(),
                )
            })
            .collect();
        FeatureFrame::from_columns(frame.start_time(), frame.step(), cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn truncation_hand_moments() {
        // mean 20, population std 40: cap at 100 leaves the series alone
        let s = [0.0, 0.0, 0.0, 0.0, 100.0];
        assert_eq!(truncate_outliers(&s, 2.0), s.to_vec());
        // k = 1 caps at 60
        assert_eq!(truncate_outliers(&s, 1.0), vec![0.0, 0.0, 0.0, 0.0, 60.0]);
    }

    #[test]
    fn truncation_degenerate_cases() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(truncate_outliers(&s, 3.0), s.to_vec());
        assert!(truncate_outliers(&s, 0.0).iter().all(|&x| x <= 2.5));
        assert_eq!(truncate_outliers(&[5.0; 4], 2.0), vec![5.0; 4]);
    }

    #[test]
    fn zscore_hand_values() {
        let p = zscore_fit(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.mean, 2.0);
        assert!((p.std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let z = zscore_apply(&[1.0, 2.0, 3.0], &p);
        assert!((z[0] + 1.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(z[1], 0.0);
        assert!((z[2] - 1.5f64.sqrt()).abs() < 1e-12);
        assert!(matches!(zscore_fit(&[4.0; 3]), Err(Error::ZeroVariance(_))));
    }

    proptest! {
        #[test]
        fn zscore_round_trip(xs in prop::collection::vec(-1e4f64..1e4, 2..200)) {
            prop_assume!(pop_std(&xs) > 1e-6);
            let p = zscore_fit(&xs).unwrap();
            let back = zscore_invert(&zscore_apply(&xs, &p), &p);
            for (a, b) in xs.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
            let z = zscore_apply(&xs, &p);
            prop_assert!(mean(&z).abs() < 1e-9);
            prop_assert!((pop_std(&z) - 1.0).abs() < 1e-9);
        }
    }
}
