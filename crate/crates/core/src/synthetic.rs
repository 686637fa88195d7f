//! Synthetic gas-price-like series for tests and demos.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::series::{FeatureFrame, DEFAULT_STEP_SECS};

/// Daily sinusoid plus AR(1) noise for the target, and a co-oscillating
/// exogenous series lagging the target by `exo_lag` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub days: usize,
    pub step_secs: i64,
    pub start_time: i64,
    pub level: f64,
    pub amplitude: f64,
    /// AR(1) coefficient.
    pub phi: f64,
    /// Innovation standard deviation.
    pub sigma: f64,
    pub exo_lag: usize,
    pub exo_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            days: 60,
            step_secs: DEFAULT_STEP_SECS,
            start_time: 1_636_156_800,
            level: 100.0,
            amplitude: 30.0,
            phi: 0.9,
            sigma: 6.0,
            exo_lag: 12,
            exo_noise: 3.0,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    pub fn steps_per_day(&self) -> usize {
        (86_400 / self.step_secs) as usize
    }
}

pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Frame with variables `min_gas_price` and `base_fee`.
pub fn generate(cfg: &SyntheticConfig) -> Result<FeatureFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let period = cfg.steps_per_day() as f64;
    let n = cfg.days * cfg.steps_per_day();
    let mut ar = 0.0;
    let mut target = Vec::with_capacity(n);
    let mut exo = Vec::with_capacity(n);
    for t in 0..n {
        ar = cfg.phi * ar + cfg.sigma * standard_normal(&mut rng);
        let phase = 2.0 * PI * t as f64 / period;
        target.push(cfg.level + cfg.amplitude * phase.sin() + ar);
        let lagged = 2.0 * PI * (t as f64 - cfg.exo_lag as f64) / period;
        exo.push(0.8 * cfg.level + 0.8 * cfg.amplitude * lagged.sin() + cfg.exo_noise * standard_normal(&mut rng));
    }
    FeatureFrame::from_dense(
        cfg.start_time,
        cfg.step_secs,
        vec![("min_gas_price".into(), target), ("base_fee".into(), exo)],
    )
}
