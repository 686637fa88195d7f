use super::filters::{WaveletFilterBank, WaveletName};
use crate::error::{Error, Result};

/// Multi-level decomposition: `details[0]` is D_1 (finest), the approximation
/// is A_J. Boundary handling is half-sample symmetric extension.
#[derive(Debug, Clone, PartialEq)]
pub struct DwtDecomposition {
    pub wavelet: WaveletName,
    pub approximation: Vec<f64>,
    pub details: Vec<Vec<f64>>,
    pub original_len: usize,
}

impl DwtDecomposition {
    pub fn depth(&self) -> usize {
        self.details.len()
    }
}

/// Half-sample symmetric index: `x[-1] = x[0]`, `x[n] = x[n-1]`, repeated
/// reflection for far indices.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = i.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// One analysis step: filter with `h` and keep odd positions of the full
/// convolution, giving `floor((n + L - 1) / 2)` outputs.
fn analysis(x: &[f64], h: &[f64]) -> Vec<f64> {
    let n = x.len();
    let l = h.len();
    let out_len = (n + l - 1) / 2;
    (0..out_len)
        .map(|k| {
            let i = 2 * k as isize + 1;
            h.iter()
                .enumerate()
                .map(|(j, hj)| hj * x[reflect(i - j as isize, n)])
                .sum()
        })
        .collect()
}

/// One synthesis step: upsample both bands, filter, keep the central
/// `2m - L + 2` samples.
fn synthesis(a: &[f64], d: &[f64], g_lo: &[f64], g_hi: &[f64]) -> Vec<f64> {
    let m = a.len();
    let l = g_lo.len();
    let out_len = 2 * m + 2 - l;
    let mut out = vec![0.0; out_len];
    for (o, slot) in out.iter_mut().enumerate() {
        let pos = o + l - 2;
        let mut acc = 0.0;
        // full-convolution index pos = 2k + j
        let k_lo = pos.saturating_sub(l - 1).div_ceil(2);
        let k_hi = (pos / 2).min(m - 1);
        for k in k_lo..=k_hi {
            let j = pos - 2 * k;
            acc += a[k] * g_lo[j] + d[k] * g_hi[j];
        }
        *slot = acc;
    }
    out
}

/// Deepest level whose input is still at least one filter long.
pub fn max_depth(len: usize, bank: &WaveletFilterBank) -> usize {
    let l = bank.filter_len();
    let mut depth = 0;
    let mut n = len;
    while n >= l {
        depth += 1;
        n = (n + l - 1) / 2;
    }
    depth
}

pub fn dwt_decompose(signal: &[f64], bank: &WaveletFilterBank, levels: usize) -> Result<DwtDecomposition> {
    if signal.len() < bank.filter_len() {
        return Err(Error::invalid(format!(
            "signal of length {} is shorter than the {}-tap filter",
            signal.len(),
            bank.filter_len()
        )));
    }
    let max = max_depth(signal.len(), bank);
    if levels == 0 || levels > max {
        return Err(Error::InfeasibleDepth { requested: levels, max });
    }
    let mut approx = signal.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let d = analysis(&approx, &bank.dec_hi);
        approx = analysis(&approx, &bank.dec_lo);
        details.push(d);
    }
    Ok(DwtDecomposition {
        wavelet: bank.name,
        approximation: approx,
        details,
        original_len: signal.len(),
    })
}

pub fn dwt_reconstruct(dec: &DwtDecomposition, bank: &WaveletFilterBank) -> Result<Vec<f64>> {
    if dec.wavelet != bank.name {
        return Err(Error::invalid(format!(
            "decomposition used {} but reconstruction bank is {}",
            dec.wavelet, bank.name
        )));
    }
    let mut a = dec.approximation.clone();
    for d in dec.details.iter().rev() {
        // odd-length inputs leave one extra sample at the coarser level
        if a.len() == d.len() + 1 {
            a.pop();
        }
        if a.len() != d.len() {
            return Err(Error::invalid(format!(
                "coefficient length mismatch: approximation {} vs detail {}",
                a.len(),
                d.len()
            )));
        }
        a = synthesis(&a, d, &bank.rec_lo, &bank.rec_hi);
    }
    a.truncate(dec.original_len);
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn banks() -> [WaveletFilterBank; 2] {
        [
            WaveletFilterBank::new(WaveletName::Db4),
            WaveletFilterBank::new(WaveletName::Bior33),
        ]
    }

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    // Reference coefficients for x[i] = (i + 1)^1.5, i = 0..10, computed with
    // PyWavelets in "symmetric" mode.
    #[test]
    fn single_level_matches_reference() {
        let x: Vec<f64> = (1..=10).map(|i| (i as f64).powf(1.5)).collect();
        let db4_a = [
            15.78445046247499, 7.300174468677376, 1.4049476918782213, 4.037922913138506,
            11.344686139363974, 20.8117057162848, 32.05659272934642, 44.72414692864266,
        ];
        let db4_d = [
            0.04840872998185891, 0.07766824470862803, -0.08907626623988402, -0.00566455249184933,
            -0.0022711533108317056, -0.11898800479602596, -0.20327746010652833, 0.3123261103243616,
        ];
        let bior_a = [
            5.326704267965136, 0.10764102339367965, 5.326704267965137, 13.315875451223878,
            23.280968890665672, 34.911101402636916, 47.992175674485885, 34.91110140263691,
        ];
        let dec = dwt_decompose(&x, &banks()[0], 1).unwrap();
        for (a, b) in dec.approximation.iter().zip(db4_a) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in dec.details[0].iter().zip(db4_d) {
            assert!((a - b).abs() < 1e-12);
        }
        let dec = dwt_decompose(&x, &banks()[1], 1).unwrap();
        for (a, b) in dec.approximation.iter().zip(bior_a) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dyadic_ladder_lengths() {
        let dec = dwt_decompose(&noise(64, 1), &banks()[0], 3).unwrap();
        let lens: Vec<usize> = dec.details.iter().map(Vec::len).collect();
        assert_eq!(lens, vec![35, 21, 14]);
        assert_eq!(dec.approximation.len(), 14);
    }

    #[test]
    fn constant_signal_has_zero_details() {
        for bank in banks() {
            let dec = dwt_decompose(&[3.25; 128], &bank, 3).unwrap();
            for d in &dec.details {
                assert!(d.iter().all(|v| v.abs() < 1e-10), "{}", bank.name);
            }
            let mut zeroed = dec.clone();
            zeroed.details.iter_mut().for_each(|d| d.fill(0.0));
            let back = dwt_reconstruct(&zeroed, &bank).unwrap();
            assert!(back.iter().all(|v| (v - 3.25).abs() < 1e-10));
        }
    }

    #[test]
    fn db4_annihilates_cubics_away_from_edges() {
        let bank = &banks()[0];
        let x: Vec<f64> = (0..256)
            .map(|i| {
                let t = i as f64 / 256.0;
                2.0 - t + 3.0 * t * t - 1.5 * t * t * t
            })
            .collect();
        let dec = dwt_decompose(&x, bank, 1).unwrap();
        let d = &dec.details[0];
        for v in &d[8..d.len() - 8] {
            assert!(v.abs() < 1e-8);
        }
    }

    #[test]
    fn perfect_reconstruction() {
        for bank in banks() {
            for (n, seed) in [(64usize, 1u64), (257, 2), (1024, 3), (8, 4), (9, 5)] {
                let x = noise(n, seed);
                for j in 1..=max_depth(n, &bank).min(5) {
                    let dec = dwt_decompose(&x, &bank, j).unwrap();
                    let back = dwt_reconstruct(&dec, &bank).unwrap();
                    assert_eq!(back.len(), n);
                    let err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    assert!(err < 1e-10, "{} n={n} J={j}: {err}", bank.name);
                }
            }
        }
    }

    #[test]
    fn infeasible_depth_names_max() {
        let bank = &banks()[0];
        assert_eq!(max_depth(64, bank), 6);
        match dwt_decompose(&noise(64, 1), bank, 9) {
            Err(Error::InfeasibleDepth { requested: 9, max: 6 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(dwt_decompose(&noise(7, 1), bank, 1).is_err());
    }

    #[test]
    fn bank_mismatch_rejected() {
        let [db4, bior] = banks();
        let dec = dwt_decompose(&noise(64, 1), &db4, 2).unwrap();
        assert!(dwt_reconstruct(&dec, &bior).is_err());
    }

    #[test]
    fn coefficient_energy_matches_direct_convolution() {
        // naive oracle: explicitly extend, fully convolve, keep odd samples
        fn oracle(x: &[f64], h: &[f64]) -> Vec<f64> {
            let l = h.len();
            let n = x.len();
            let mut ext = Vec::new();
            for i in -(l as isize - 1)..(n as isize + l as isize - 1) {
                let mut k = i;
                while k < 0 || k >= n as isize {
                    k = if k < 0 { -k - 1 } else { 2 * n as isize - 1 - k };
                }
                ext.push(x[k as usize]);
            }
            let full: Vec<f64> = (0..ext.len() + l - 1)
                .map(|i| (0..l).filter(|&j| i >= j && i - j < ext.len()).map(|j| h[j] * ext[i - j]).sum())
                .collect();
            // full[i] corresponds to output index i - (l - 1) of the unextended convolution
            (0..(n + l - 1) / 2).map(|k| full[2 * k + 1 + l - 1]).collect()
        }
        let x = noise(1024, 11);
        let bank = &banks()[0];
        let dec = dwt_decompose(&x, bank, 2).unwrap();
        let d1 = oracle(&x, &bank.dec_hi);
        let a1 = oracle(&x, &bank.dec_lo);
        let d2 = oracle(&a1, &bank.dec_hi);
        let energy = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        assert!((energy(&dec.details[0]) - energy(&d1)).abs() < 1e-10);
        assert!((energy(&dec.details[1]) - energy(&d2)).abs() < 1e-10);
    }
}
