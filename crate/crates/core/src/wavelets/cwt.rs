use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Morlet central frequency used unless configured otherwise.
pub const DEFAULT_OMEGA0: f64 = 6.0;

/// Morlet mother wavelet `pi^(-1/4) exp(i w0 t) exp(-t^2 / 2)`.
pub fn morlet(t: f64, omega0: f64) -> Complex64 {
    let env = PI.powf(-0.25) * (-0.5 * t * t).exp();
    Complex64::from_polar(env, omega0 * t)
}

/// Dyadic scale ladder with 8 sub-octaves from `2 dt` to `n dt / 4`.
pub fn default_scales(n: usize, dt: f64) -> Vec<f64> {
    let s0 = 2.0 * dt;
    let top = n as f64 * dt / 4.0;
    if top < s0 {
        return vec![s0];
    }
    let dj = 1.0 / 8.0;
    let count = ((top / s0).log2() / dj + 1e-9).floor() as usize;
    (0..=count).map(|j| s0 * 2f64.powf(j as f64 * dj)).collect()
}

/// Continuous wavelet coefficients, one row per scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CwtSpectrum {
    pub scales: Vec<f64>,
    pub dt: f64,
    pub omega0: f64,
    /// `coeffs[scale][time]`.
    pub coeffs: Vec<Vec<Complex64>>,
}

impl CwtSpectrum {
    pub fn n_times(&self) -> usize {
        self.coeffs.first().map(Vec::len).unwrap_or(0)
    }

    pub fn at(&self, time: usize, scale: usize) -> Complex64 {
        self.coeffs[scale][time]
    }

    /// Time (in units of `dt`) of sample `t`.
    pub fn time(&self, t: usize) -> f64 {
        t as f64 * self.dt
    }
}

fn check_args(scales: &[f64], dt: f64, omega0: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::invalid("sampling interval must be positive"));
    }
    if !(omega0 > 0.0) {
        return Err(Error::invalid("central frequency must be positive"));
    }
    if scales.is_empty() {
        return Err(Error::invalid("no scales given"));
    }
    if let Some(s) = scales.iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::invalid(format!("non-positive scale {s}")));
    }
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("scales must be strictly increasing"));
    }
    Ok(())
}

/// Kernel value for offset `d = t - tau` samples.
#[inline]
fn kernel(d: f64, s: f64, dt: f64, omega0: f64) -> Complex64 {
    morlet(d * dt / s, omega0).conj() * (dt / s.sqrt())
}

/// Reference transform by direct summation: `W(tau, s) = sum_t x(t)
/// conj(psi((t - tau) / s)) |s|^(-1/2) dt`, with zeros outside the series.
pub fn cwt_morlet_direct(signal: &[f64], scales: &[f64], omega0: f64, dt: f64) -> Result<CwtSpectrum> {
    check_args(scales, dt, omega0)?;
    let n = signal.len();
    let coeffs = scales
        .par_iter()
        .map(|&s| {
            (0..n)
                .map(|tau| {
                    signal
                        .iter()
                        .enumerate()
                        .map(|(t, &x)| kernel(t as f64 - tau as f64, s, dt, omega0) * x)
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(CwtSpectrum {
        scales: scales.to_vec(),
        dt,
        omega0,
        coeffs,
    })
}

/// Same transform computed per scale as an FFT convolution. Agrees with
/// [`cwt_morlet_direct`] to rounding.
pub fn cwt_morlet(signal: &[f64], scales: &[f64], omega0: f64, dt: f64) -> Result<CwtSpectrum> {
    check_args(scales, dt, omega0)?;
    let n = signal.len();
    if n == 0 {
        return Err(Error::invalid("empty signal"));
    }
    let len = (2 * n - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);

    let mut xf: Vec<Complex64> = signal.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    xf.resize(len, Complex64::new(0.0, 0.0));
    fwd.process(&mut xf);

    let coeffs = scales
        .par_iter()
        .map(|&s| {
            // W[k] = sum_t x[t] K[t - k] = (x * g)[k] with g[m] = K[-m]
            let mut g = vec![Complex64::new(0.0, 0.0); len];
            for m in -(n as isize - 1)..=(n as isize - 1) {
                g[m.rem_euclid(len as isize) as usize] = kernel(-m as f64, s, dt, omega0);
            }
            fwd.process(&mut g);
            for (gi, xi) in g.iter_mut().zip(&xf) {
                *gi *= xi;
            }
            inv.process(&mut g);
            let scale = 1.0 / len as f64;
            g.truncate(n);
            g.iter_mut().for_each(|v| *v *= scale);
            g
        })
        .collect();
    Ok(CwtSpectrum {
        scales: scales.to_vec(),
        dt,
        omega0,
        coeffs,
    })
}
