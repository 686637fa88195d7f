use std::f64::consts::SQRT_2;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::cwt::{cwt_morlet, default_scales, DEFAULT_OMEGA0};
use crate::error::{Error, Result};
use crate::stats::pop_std;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceParams {
    pub dt: f64,
    pub omega0: f64,
    /// Defaults to [`default_scales`] when `None`.
    pub scales: Option<Vec<f64>>,
    /// Scale-smoothing boxcar width in octaves.
    pub scale_window_octaves: f64,
    /// Disable to get the unsmoothed (degenerate, identically 1) coherence.
    pub smooth: bool,
}

impl Default for CoherenceParams {
    fn default() -> Self {
        CoherenceParams {
            dt: 1.0,
            omega0: DEFAULT_OMEGA0,
            scales: None,
            scale_window_octaves: 0.6,
            smooth: true,
        }
    }
}

/// Time-scale coherence and phase between two series.
///
/// Matrices are indexed `[scale][time]`. Phase is
/// `atan2(Im, Re)` of the smoothed cross spectrum: 0 is in phase, +-pi
/// anti-phase, positive values mean `x` leads.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMap {
    pub times: Vec<f64>,
    pub scales: Vec<f64>,
    pub coherence: Vec<Vec<f64>>,
    pub phase: Vec<Vec<f64>>,
    pub cross_power: Vec<Vec<f64>>,
    /// Largest scale inside the cone of influence at each time.
    pub coi: Vec<f64>,
}

impl CoherenceMap {
    pub fn in_cone(&self, t: usize, s: usize) -> bool {
        self.scales[s] <= self.coi[t]
    }

    /// Mean coherence over all in-cone cells; NaN if the cone is empty.
    pub fn mean_in_cone(&self) -> f64 {
        let mut sum = 0.0;
        let mut n = 0usize;
        for s in 0..self.scales.len() {
            for t in 0..self.times.len() {
                if self.in_cone(t, s) {
                    sum += self.coherence[s][t];
                    n += 1;
                }
            }
        }
        sum / n as f64
    }
}

/// Convolve each row with a unit-sum Gaussian of `sigma` samples, treating
/// samples outside the series as zero.
fn smooth_time(row: &[Complex64], sigma: f64, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let n = row.len();
    let half = ((3.0 * sigma).ceil() as usize).clamp(1, n - 1);
    let weights: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let d = i as f64 - half as f64;
            (-0.5 * d * d / (sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let len = (n + 2 * half).next_power_of_two();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut a = row.to_vec();
    a.resize(len, Complex64::new(0.0, 0.0));
    let mut k = vec![Complex64::new(0.0, 0.0); len];
    for (i, w) in weights.iter().enumerate() {
        k[i] = Complex64::new(w / total, 0.0);
    }
    fwd.process(&mut a);
    fwd.process(&mut k);
    for (x, y) in a.iter_mut().zip(&k) {
        *x *= y;
    }
    inv.process(&mut a);
    let norm = 1.0 / len as f64;
    (0..n).map(|t| a[t + half] * norm).collect()
}

/// Average rows over a centered window of `width` scale indices, clipped at
/// the ladder ends.
fn smooth_scale(rows: &[Vec<Complex64>], width: usize) -> Vec<Vec<Complex64>> {
    let half = width / 2;
    let ns = rows.len();
    (0..ns)
        .map(|s| {
            let lo = s.saturating_sub(half);
            let hi = (s + half).min(ns - 1);
            let count = (hi - lo + 1) as f64;
            (0..rows[s].len())
                .map(|t| (lo..=hi).map(|j| rows[j][t]).sum::<Complex64>() / count)
                .collect()
        })
        .collect()
}

fn smooth(rows: Vec<Vec<Complex64>>, scales: &[f64], dt: f64, width: usize) -> Vec<Vec<Complex64>> {
    let timed: Vec<Vec<Complex64>> = rows
        .par_iter()
        .zip(scales)
        .map(|(row, &s)| {
            let mut planner = FftPlanner::new();
            smooth_time(row, s / dt, &mut planner)
        })
        .collect();
    smooth_scale(&timed, width)
}

pub fn wavelet_coherence(x: &[f64], y: &[f64], params: &CoherenceParams) -> Result<CoherenceMap> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 4 {
        return Err(Error::invalid("coherence needs at least 4 samples"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("coherence inputs must be gap-free and finite"));
    }
    if pop_std(x) == 0.0 || pop_std(y) == 0.0 {
        return Err(Error::ZeroVariance("zero auto-power: constant input series".into()));
    }
    let n = x.len();
    let dt = params.dt;
    let scales = params.scales.clone().unwrap_or_else(|| default_scales(n, dt));
    let wx = cwt_morlet(x, &scales, params.omega0, dt)?;
    let wy = cwt_morlet(y, &scales, params.omega0, dt)?;

    let mut cross = Vec::with_capacity(scales.len());
    let mut px = Vec::with_capacity(scales.len());
    let mut py = Vec::with_capacity(scales.len());
    let mut cross_power = Vec::with_capacity(scales.len());
    for (k, &s) in scales.iter().enumerate() {
        let (a, b) = (&wx.coeffs[k], &wy.coeffs[k]);
        let c: Vec<Complex64> = a.iter().zip(b).map(|(u, v)| u * v.conj()).collect();
        cross_power.push(c.iter().map(|v| v.norm()).collect::<Vec<f64>>());
        cross.push(c.iter().map(|v| v / s).collect::<Vec<_>>());
        px.push(a.iter().map(|u| Complex64::new(u.norm_sqr() / s, 0.0)).collect::<Vec<_>>());
        py.push(b.iter().map(|v| Complex64::new(v.norm_sqr() / s, 0.0)).collect::<Vec<_>>());
    }

    let (cross_s, px_s, py_s) = if params.smooth {
        let dj = scales
            .windows(2)
            .map(|w| (w[1] / w[0]).log2())
            .next()
            .unwrap_or(1.0);
        let width = ((params.scale_window_octaves / dj).round() as usize).max(1);
        (
            smooth(cross, &scales, dt, width),
            smooth(px, &scales, dt, width),
            smooth(py, &scales, dt, width),
        )
    } else {
        (cross, px, py)
    };

    let mut coherence = Vec::with_capacity(scales.len());
    let mut phase = Vec::with_capacity(scales.len());
    for k in 0..scales.len() {
        let mut r = Vec::with_capacity(n);
        let mut p = Vec::with_capacity(n);
        for t in 0..n {
            let c = cross_s[k][t];
            let denom = px_s[k][t].re * py_s[k][t].re;
            r.push(if denom > 0.0 { c.norm_sqr() / denom } else { 0.0 });
            p.push(c.im.atan2(c.re));
        }
        coherence.push(r);
        phase.push(p);
    }
    let coi = (0..n)
        .map(|t| t.min(n - 1 - t) as f64 * dt / SQRT_2)
        .collect();
    Ok(CoherenceMap {
        times: (0..n).map(|t| t as f64 * dt).collect(),
        scales,
        coherence,
        phase,
        cross_power,
        coi,
    })
}

/// Header comment describing the phase-arrow convention of exported grids.
pub const PHASE_CONVENTION: &str = "# phase = atan2(Im, Re) of the smoothed cross spectrum; arrows: \
in-phase -> right (0), anti-phase -> left (pi), x leads -> right-up (+), y leads -> left-down (-)";

/// Write one `(tau, scale, r2, phase, in_cone)` row per grid cell, time
/// outermost.
pub fn export_coherence(map: &CoherenceMap, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(PHASE_CONVENTION);
    out.push('\n');
    out.push_str("tau,scale,r2,phase,in_cone\n");
    for t in 0..map.times.len() {
        for s in 0..map.scales.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                map.times[t],
                map.scales[s],
                map.coherence[s][t],
                map.phase[s][t],
                u8::from(map.in_cone(t, s))
            )
            .unwrap();
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Grid read back from an exported coherence file.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceGrid {
    pub times: Vec<f64>,
    pub scales: Vec<f64>,
    pub coherence: Vec<Vec<f64>>,
    pub phase: Vec<Vec<f64>>,
    pub in_cone: Vec<Vec<bool>>,
}

pub fn read_coherence(path: &Path) -> Result<CoherenceGrid> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cells = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.starts_with("tau") || line.trim().is_empty() {
            continue;
        }
        let perr = |m: &str| Error::Parse {
            path: path.to_path_buf(),
            line: i as u64 + 1,
            message: m.to_string(),
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(perr("expected 5 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| perr("bad number"));
        cells.push((num(f[0])?, num(f[1])?, num(f[2])?, num(f[3])?, f[4] == "1"));
    }
    let mut times: Vec<f64> = Vec::new();
    let mut scales: Vec<f64> = Vec::new();
    for c in &cells {
        if times.last() != Some(&c.0) {
            times.push(c.0);
        }
        if times.len() == 1 {
            scales.push(c.1);
        }
    }
    let (nt, ns) = (times.len(), scales.len());
    if nt * ns != cells.len() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "grid is not rectangular".into(),
        });
    }
    let mut coherence = vec![vec![0.0; nt]; ns];
    let mut phase = vec![vec![0.0; nt]; ns];
    let mut in_cone = vec![vec![false; nt]; ns];
    for (i, c) in cells.iter().enumerate() {
        let (t, s) = (i / ns, i % ns);
        coherence[s][t] = c.2;
        phase[s][t] = c.3;
        in_cone[s][t] = c.4;
    }
    Ok(CoherenceGrid {
        times,
        scales,
        coherence,
        phase,
        in_cone,
    })
}

/// Mean in-cone coherence of one octave of scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSummary {
    pub scale_lo: f64,
    pub scale_hi: f64,
    /// NaN when no cell of the band is inside the cone.
    pub mean_coherence: f64,
    pub cells: usize,
}

/// Group scales into octaves starting at the smallest scale.
pub fn band_summary(map: &CoherenceMap) -> Vec<BandSummary> {
    let s0 = map.scales[0];
    let mut bands: Vec<BandSummary> = Vec::new();
    for (k, &s) in map.scales.iter().enumerate() {
        let octave = ((s / s0).log2() + 1e-9).floor() as usize;
        while bands.len() <= octave {
            let lo = s0 * 2f64.powi(bands.len() as i32);
            bands.push(BandSummary {
                scale_lo: lo,
                scale_hi: 2.0 * lo,
                mean_coherence: 0.0,
                cells: 0,
            });
        }
        let b = &mut bands[octave];
        for t in 0..map.times.len() {
            if map.in_cone(t, k) {
                b.mean_coherence += map.coherence[k][t];
                b.cells += 1;
            }
        }
    }
    for b in &mut bands {
        b.mean_coherence = if b.cells > 0 {
            b.mean_coherence / b.cells as f64
        } else {
            f64::NAN
        };
    }
    bands
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr_free::normal;
    use std::f64::consts::{FRAC_PI_2, PI};

    mod rand_distr_free {
        use rand::Rng;
        // Box-Muller
        pub fn normal<R: Rng>(rng: &mut R) -> f64 {
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| normal(&mut rng)).collect()
    }

    #[test]
    fn self_coherence_is_one() {
        let x = noise(256, 1);
        let m = wavelet_coherence(&x, &x, &CoherenceParams::default()).unwrap();
        for s in 0..m.scales.len() {
            for t in 0..m.times.len() {
                if m.in_cone(t, s) {
                    assert!((m.coherence[s][t] - 1.0).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn unsmoothed_coherence_is_degenerate() {
        let x = noise(128, 2);
        let y = noise(128, 3);
        let params = CoherenceParams {
            smooth: false,
            ..Default::default()
        };
        let m = wavelet_coherence(&x, &y, &params).unwrap();
        assert!(m.coherence.iter().flatten().all(|r| (r - 1.0).abs() < 1e-9));
    }

    #[test]
    fn bounded_for_noise() {
        let m = wavelet_coherence(&noise(512, 4), &noise(512, 5), &CoherenceParams::default()).unwrap();
        assert!(m.coherence.iter().flatten().all(|&r| (0.0..=1.0 + 1e-9).contains(&r)));
        assert!(m.phase.iter().flatten().all(|p| p.is_finite()));
        assert!(m.mean_in_cone() < 0.5);
    }

    #[test]
    fn quarter_period_lag_gives_right_angle() {
        let period = 32.0;
        let n = 512;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / period).sin()).collect();
        let y: Vec<f64> = (0..n).map(|i| (2.0 * PI * (i as f64 - period / 4.0) / period).sin()).collect();
        let m = wavelet_coherence(&x, &y, &CoherenceParams::default()).unwrap();
        let target = period * 6.0 / (2.0 * PI);
        let k = (0..m.scales.len())
            .min_by(|&a, &b| (m.scales[a] - target).abs().total_cmp(&(m.scales[b] - target).abs()))
            .unwrap();
        assert!((m.phase[k][n / 2] - FRAC_PI_2).abs() < 0.2);
    }

    #[test]
    fn constant_series_rejected() {
        assert!(matches!(
            wavelet_coherence(&[1.0; 64], &noise(64, 1), &CoherenceParams::default()),
            Err(Error::ZeroVariance(_))
        ));
        assert!(wavelet_coherence(&[1.0; 64], &[1.0; 63], &CoherenceParams::default()).is_err());
    }

    #[test]
    fn export_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let params = CoherenceParams {
            scales: Some(vec![2.0, 3.0, 4.0, 6.0, 8.0]),
            ..Default::default()
        };
        let x = noise(10, 7);
        let y = noise(10, 8);
        let m = wavelet_coherence(&x, &y, &params).unwrap();
        let p = dir.path().join("coh.csv");
        export_coherence(&m, &p).unwrap();
        let body = fs::read_to_string(&p).unwrap();
        assert_eq!(body.lines().filter(|l| !l.starts_with('#') && !l.starts_with("tau")).count(), 50);
        let g = read_coherence(&p).unwrap();
        assert_eq!(g.times, m.times);
        assert_eq!(g.scales, m.scales);
        for s in 0..5 {
            for t in 0..10 {
                assert!((g.coherence[s][t] - m.coherence[s][t]).abs() < 1e-9);
                assert!((g.phase[s][t] - m.phase[s][t]).abs() < 1e-9);
                assert_eq!(g.in_cone[s][t], m.in_cone(t, s));
            }
        }
    }

    #[test]
    fn bands_cover_ladder() {
        let x = noise(256, 9);
        let m = wavelet_coherence(&x, &x, &CoherenceParams::default()).unwrap();
        let bands = band_summary(&m);
        assert_eq!(bands.len(), 6);
        for b in bands.iter().filter(|b| b.cells > 0) {
            assert!(b.mean_coherence > 0.999);
        }
    }
}
