use serde::{Deserialize, Serialize};

use super::dwt::{dwt_decompose, dwt_reconstruct};
use super::filters::WaveletFilterBank;
use crate::error::{Error, Result};

/// Threshold statistics of one detail level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelThreshold {
    pub level: usize,
    /// Mean absolute deviation about the level mean.
    pub mad: f64,
    /// `mad / lambda`.
    pub sigma: f64,
    /// `sigma * sqrt(3 ln count)`.
    pub threshold: f64,
    pub count: usize,
    pub zeroed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams {
    pub lambda: f64,
    pub levels: Vec<LevelThreshold>,
}

/// Threshold for a detail band given the denoising factor `lambda`.
pub fn level_threshold(detail: &[f64], lambda: f64) -> (f64, f64, f64) {
    let n = detail.len() as f64;
    let mean = detail.iter().sum::<f64>() / n;
    let mad = detail.iter().map(|d| (d - mean).abs()).sum::<f64>() / n;
    let sigma = mad / lambda;
    let u = sigma * (3.0 * n.ln()).sqrt();
    (mad, sigma, u)
}

/// Decompose to depth `depth`, hard-threshold the selected detail levels
/// (1-based, 1 = finest) and reconstruct.
pub fn hard_threshold_denoise(
    signal: &[f64],
    bank: &WaveletFilterBank,
    depth: usize,
    levels: &[usize],
    lambda: f64,
) -> Result<(Vec<f64>, ThresholdParams)> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(format!("denoising factor must be positive, got {lambda}")));
    }
    if let Some(l) = levels.iter().find(|&&l| l == 0 || l > depth) {
        return Err(Error::invalid(format!("level {l} outside 1..={depth}")));
    }
    let mut dec = dwt_decompose(signal, bank, depth)?;
    let mut selected = levels.to_vec();
    selected.sort_unstable();
    selected.dedup();
    let mut stats = Vec::with_capacity(selected.len());
    for level in selected {
        let band = &mut dec.details[level - 1];
        let (mad, sigma, threshold) = level_threshold(band, lambda);
        let mut zeroed = 0;
        for d in band.iter_mut() {
            if d.abs() < threshold {
                *d = 0.0;
                zeroed += 1;
            }
        }
        stats.push(LevelThreshold {
            level,
            mad,
            sigma,
            threshold,
            count: band.len(),
            zeroed,
        });
    }
    let out = dwt_reconstruct(&dec, bank)?;
    Ok((out, ThresholdParams { lambda, levels: stats }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseReport {
    pub rmse: f64,
    /// `10 log10(sum denoised^2 / sum (raw - denoised)^2)`; +inf when nothing
    /// was removed.
    pub snr_db: f64,
}

impl DenoiseReport {
    /// Key-value text block.
    pub fn to_kv(&self) -> String {
        let snr = if self.snr_db.is_infinite() {
            "inf".to_string()
        } else {
            self.snr_db.to_string()
        };
        format!("rmse={}\nsnr_db={}\n", self.rmse, snr)
    }
}

pub fn denoise_report(raw: &[f64], denoised: &[f64]) -> Result<DenoiseReport> {
    if raw.len() != denoised.len() || raw.is_empty() {
        return Err(Error::invalid("raw and denoised series must have the same non-zero length"));
    }
    let removed: f64 = raw.iter().zip(denoised).map(|(r, d)| (r - d) * (r - d)).sum();
    let kept: f64 = denoised.iter().map(|d| d * d).sum();
    let snr_db = if removed == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (kept / removed).log10()
    };
    Ok(DenoiseReport {
        rmse: (removed / raw.len() as f64).sqrt(),
        snr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelets::WaveletName;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy_sine(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| (i as f64 * 0.05).sin() * 10.0 + rng.gen_range(-1.0..1.0))
            .collect()
    }

    #[test]
    fn alternating_band_hand_values() {
        let (mad, sigma, u) = level_threshold(&[1.0, -1.0, 1.0, -1.0], 1.0);
        assert_eq!(mad, 1.0);
        assert_eq!(sigma, 1.0);
        assert!((u - (3.0 * 4f64.ln()).sqrt()).abs() < 1e-15);
        assert!(u > 2.03 && u < 2.04);
    }

    #[test]
    fn huge_lambda_is_identity() {
        let x = noisy_sine(300, 3);
        let bank = WaveletFilterBank::new(WaveletName::Db4);
        let (y, params) = hard_threshold_denoise(&x, &bank, 2, &[1, 2], 1e9).unwrap();
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-9));
        assert!(params.levels.iter().all(|l| l.threshold < 1e-6));
    }

    #[test]
    fn level_one_and_two_configuration_runs() {
        let x = noisy_sine(1024, 4);
        let bank = WaveletFilterBank::new(WaveletName::Db4);
        let (y, params) = hard_threshold_denoise(&x, &bank, 2, &[1, 2], 3.0).unwrap();
        assert_eq!(y.len(), x.len());
        assert_eq!(params.levels.iter().map(|l| l.level).collect::<Vec<_>>(), vec![1, 2]);
        assert!(params.levels.iter().all(|l| l.zeroed > 0));
    }

    #[test]
    fn invalid_arguments() {
        let x = noisy_sine(64, 1);
        let bank = WaveletFilterBank::new(WaveletName::Db4);
        assert!(hard_threshold_denoise(&x, &bank, 2, &[1], 0.0).is_err());
        assert!(hard_threshold_denoise(&x, &bank, 2, &[3], 1.0).is_err());
    }

    #[test]
    fn report_basics() {
        let x = noisy_sine(100, 5);
        let r = denoise_report(&x, &x).unwrap();
        assert_eq!(r.rmse, 0.0);
        assert!(r.snr_db.is_infinite());
        let shifted: Vec<f64> = x.iter().map(|v| v + 0.75).collect();
        assert!((denoise_report(&x, &shifted).unwrap().rmse - 0.75).abs() < 1e-12);
        assert!(denoise_report(&x, &x[1..]).is_err());
    }

    #[test]
    fn report_matches_naive_loop() {
        let raw = noisy_sine(512, 6);
        let bank = WaveletFilterBank::new(WaveletName::Bior33);
        let (den, _) = hard_threshold_denoise(&raw, &bank, 2, &[1, 2], 10.0).unwrap();
        let r = denoise_report(&raw, &den).unwrap();
        let mut acc = 0.0;
        for i in 0..raw.len() {
            acc += (raw[i] - den[i]).powi(2);
        }
        assert!((r.rmse - (acc / raw.len() as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rmse_non_increasing_in_lambda() {
        for name in [WaveletName::Db4, WaveletName::Bior33] {
            let bank = WaveletFilterBank::new(name);
            let x = noisy_sine(2048, 9);
            let mut prev = f64::INFINITY;
            let mut prev_u = f64::INFINITY;
            for lambda in [1.0, 2.0, 3.0, 5.0, 10.0] {
                let (y, p) = hard_threshold_denoise(&x, &bank, 2, &[1, 2], lambda).unwrap();
                let r = denoise_report(&x, &y).unwrap().rmse;
                assert!(r <= prev + 1e-12, "{name} lambda={lambda}");
                assert!(p.levels[0].threshold < prev_u);
                prev = r;
                prev_u = p.levels[0].threshold;
            }
        }
    }
}
