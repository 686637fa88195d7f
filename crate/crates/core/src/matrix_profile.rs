//! Matrix profile: for every length-`m` subsequence, the z-normalized
//! Euclidean distance to its nearest neighbor outside the trivial-match
//! zone `|i - j| <= ceil(m / 2)`.
//!
//! Windows with standard deviation at or below [`SIGMA_FLOOR`] are treated as
//! constant: their z-normalized form is the zero vector, so the distance to
//! another constant window is 0 and to a non-constant one is `sqrt(m)`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series::FeatureFrame;

pub const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProfile {
    pub window: usize,
    pub exclusion: usize,
    /// Distance to the nearest admissible neighbor (`inf` if none).
    pub values: Vec<f64>,
    pub index: Vec<Option<usize>>,
    /// Starts of windows that were constant under the sigma floor.
    pub flat_windows: Vec<usize>,
}

impl MatrixProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Start of the most anomalous subsequence.
    pub fn discord(&self) -> Option<usize> {
        (0..self.len())
            .filter(|&i| self.values[i].is_finite())
            .max_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
    }

    /// Start of the best-matching repeated subsequence.
    pub fn motif(&self) -> Option<usize> {
        (0..self.len()).min_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
    }

    /// Two-column text: `value,neighbor` (empty neighbor when none).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = format!("# window={} exclusion={}\nvalue,neighbor\n", self.window, self.exclusion);
        for (v, i) in self.values.iter().zip(&self.index) {
            match i {
                Some(i) => writeln!(out, "{v},{i}").unwrap(),
                None => writeln!(out, "{v},").unwrap(),
            }
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut window = None;
        let mut exclusion = None;
        let mut values = Vec::new();
        let mut index = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let perr = |m: String| Error::Parse {
                path: path.to_path_buf(),
                line: n as u64 + 1,
                message: m,
            };
            if let Some(meta) = line.strip_prefix('#') {
                for kv in meta.split_whitespace() {
                    if let Some((k, v)) = kv.split_once('=') {
                        let v: usize = v.parse().map_err(|_| perr(format!("bad {k}")))?;
                        match k {
                            "window" => window = Some(v),
                            "exclusion" => exclusion = Some(v),
                            _ => {}
                        }
                    }
                }
                continue;
            }
            if line == "value,neighbor" || line.is_empty() {
                continue;
            }
            let (v, i) = line.split_once(',').ok_or_else(|| perr("expected two columns".into()))?;
            values.push(v.parse::<f64>().map_err(|_| perr(format!("bad value {v:?}")))?);
            index.push(if i.is_empty() {
                None
            } else {
                Some(i.parse().map_err(|_| perr(format!("bad index {i:?}")))?)
            });
        }
        let window = window.ok_or_else(|| Error::invalid("profile file lacks window header"))?;
        Ok(MatrixProfile {
            window,
            exclusion: exclusion.unwrap_or(window.div_ceil(2)),
            values,
            index,
            flat_windows: Vec::new(),
        })
    }
}

pub fn exclusion_radius(m: usize) -> usize {
    m.div_ceil(2)
}

fn check(series: &[f64], m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::invalid("subsequence length must be at least 2"));
    }
    if series.len() < 2 * m {
        return Err(Error::invalid(format!(
            "series of length {} is shorter than twice the window {m}",
            series.len()
        )));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("series contains non-finite values"));
    }
    Ok(())
}

/// Two-pass mean and population standard deviation of every window.
fn window_stats(series: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let count = series.len() - m + 1;
    let mut means = Vec::with_capacity(count);
    let mut stds = Vec::with_capacity(count);
    for w in series.windows(m) {
        let mu = w.iter().sum::<f64>() / m as f64;
        let var = w.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / m as f64;
        means.push(mu);
        stds.push(var.sqrt());
    }
    (means, stds)
}

fn flat_list(stds: &[f64]) -> Vec<usize> {
    let flat: Vec<usize> = (0..stds.len()).filter(|&i| stds[i] <= SIGMA_FLOOR).collect();
    if !flat.is_empty() {
        log::warn!("matrix profile: {} constant windows under the sigma floor", flat.len());
    }
    flat
}

/// Reference implementation: explicit z-normalization of every window and an
/// `O(T^2 m)` double loop.
pub fn mp_bruteforce(series: &[f64], m: usize) -> Result<MatrixProfile> {
    check(series, m)?;
    let (means, stds) = window_stats(series, m);
    let count = means.len();
    let excl = exclusion_radius(m);
    let z: Vec<Vec<f64>> = (0..count)
        .map(|i| {
            if stds[i] <= SIGMA_FLOOR {
                vec![0.0; m]
            } else {
                series[i..i + m].iter().map(|x| (x - means[i]) / stds[i]).collect()
            }
        })
        .collect();
    let rows: Vec<(f64, Option<usize>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut best = f64::INFINITY;
            let mut arg = None;
            for j in 0..count {
                if i.abs_diff(j) <= excl {
                    continue;
                }
                let d = z[i]
                    .iter()
                    .zip(&z[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if d < best {
                    best = d;
                    arg = Some(j);
                }
            }
            (best, arg)
        })
        .collect();
    Ok(MatrixProfile {
        window: m,
        exclusion: excl,
        values: rows.iter().map(|r| r.0).collect(),
        index: rows.iter().map(|r| r.1).collect(),
        flat_windows: flat_list(&stds),
    })
}

struct Diagonals {
    count: usize,
    excl: usize,
    stds: Vec<f64>,
    /// `diag[d][i]` is the distance between windows `i` and `i + excl + 1 + d`.
    diag: Vec<Vec<f64>>,
}

/// Distances of every admissible pair, computed along diagonals with the
/// recurrence `QT[i+1][j+1] = QT[i][j] - x[i] x[j] + x[i+m] x[j+m]`.
fn diagonals(series: &[f64], m: usize) -> Diagonals {
    let (means, stds) = window_stats(series, m);
    let count = means.len();
    let excl = exclusion_radius(m);
    let mf = m as f64;
    let flat: Vec<bool> = stds.iter().map(|&s| s <= SIGMA_FLOOR).collect();

    let dist = |i: usize, j: usize, qt: f64| -> f64 {
        match (flat[i], flat[j]) {
            (true, true) => 0.0,
            (true, false) | (false, true) => mf.sqrt(),
            (false, false) => {
                let corr = (qt - mf * means[i] * means[j]) / (mf * stds[i] * stds[j]);
                (2.0 * mf * (1.0 - corr)).max(0.0).sqrt()
            }
        }
    };

    // each diagonal is independent; callers reduce in fixed order
    let diag = (excl + 1..count)
        .into_par_iter()
        .map(|k| {
            let len = count - k;
            let mut out = Vec::with_capacity(len);
            let mut qt: f64 = series[..m].iter().zip(&series[k..k + m]).map(|(a, b)| a * b).sum();
            out.push(dist(0, k, qt));
            for i in 1..len {
                let j = i + k;
                qt += series[i + m - 1] * series[j + m - 1] - series[i - 1] * series[j - 1];
                out.push(dist(i, j, qt));
            }
            out
        })
        .collect();
    Diagonals { count, excl, stds, diag }
}

/// `O(T^2)` profile from the diagonal dot-product recurrence.
pub fn mp_fast(series: &[f64], m: usize) -> Result<MatrixProfile> {
    check(series, m)?;
    let Diagonals { count, excl, stds, diag: diagonals } = diagonals(series, m);
    let mut values = vec![f64::INFINITY; count];
    let mut index = vec![None; count];
    for (di, diag) in diagonals.iter().enumerate() {
        let k = excl + 1 + di;
        for (i, &d) in diag.iter().enumerate() {
            let j = i + k;
            if d < values[i] || (d == values[i] && index[i].is_some_and(|p| j < p)) {
                values[i] = d;
                index[i] = Some(j);
            }
            if d < values[j] || (d == values[j] && index[j].is_some_and(|p| i < p)) {
                values[j] = d;
                index[j] = Some(i);
            }
        }
    }
    Ok(MatrixProfile {
        window: m,
        exclusion: excl,
        values,
        index,
        flat_windows: flat_list(&stds),
    })
}

/// A profile computed from the first `prefix_len` samples only.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub prefix_len: usize,
    pub profile: MatrixProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingProfile {
    pub snapshots: Vec<Snapshot>,
    /// Prefix lengths skipped because they were shorter than `2m`.
    pub skipped: Vec<usize>,
}

/// Profiles of the prefixes `step, 2 step, ...` and finally the full series.
/// No snapshot sees data past its prefix.
pub fn mp_rolling(series: &[f64], m: usize, step: usize) -> Result<RollingProfile> {
    if step == 0 {
        return Err(Error::invalid("rolling step must be at least 1"));
    }
    let mut ends: Vec<usize> = (1..).map(|k| k * step).take_while(|&e| e <= series.len()).collect();
    if ends.last() != Some(&series.len()) {
        ends.push(series.len());
    }
    let mut snapshots = Vec::new();
    let mut skipped = Vec::new();
    for end in ends {
        if end < 2 * m {
            log::info!("mp_rolling: prefix {end} shorter than 2m = {}, skipped", 2 * m);
            skipped.push(end);
            continue;
        }
        snapshots.push(Snapshot {
            prefix_len: end,
            profile: mp_fast(&series[..end], m)?,
        });
    }
    Ok(RollingProfile { snapshots, skipped })
}

/// Left profile: each window's distance to its nearest admissible
/// predecessor only. Entry `i` equals the last value of [`mp_fast`] on the
/// prefix ending with window `i`, so it never sees later data.
pub fn left_profile(series: &[f64], m: usize) -> Result<Vec<f64>> {
    check(series, m)?;
    let d = diagonals(series, m);
    let mut left = vec![f64::INFINITY; d.count];
    for (di, diag) in d.diag.iter().enumerate() {
        let k = d.excl + 1 + di;
        for (i, &v) in diag.iter().enumerate() {
            if v < left[i + k] {
                left[i + k] = v;
            }
        }
    }
    Ok(left)
}

/// Causal profile feature aligned to series rows: row `r` holds the left
/// profile of the window ending at `r`, or `None` while no earlier
/// admissible window exists.
pub fn causal_profile_column(series: &[f64], m: usize) -> Result<Vec<Option<f64>>> {
    let left = left_profile(series, m)?;
    let mut col = vec![None; series.len()];
    for (i, v) in left.into_iter().enumerate() {
        if v.is_finite() {
            col[i + m - 1] = Some(v);
        }
    }
    Ok(col)
}

/// Drop the first `m - 1` rows of `frame` and append the profile as column
/// `mp`, so every variable has `T - m + 1` rows.
pub fn align_mp(frame: &FeatureFrame, mp: &[f64], m: usize) -> Result<FeatureFrame> {
    if m == 0 || m > frame.len() {
        return Err(Error::invalid(format!("window {m} invalid for frame of {} rows", frame.len())));
    }
    let trimmed = frame.slice(m - 1, frame.len())?;
    if trimmed.len() != mp.len() {
        return Err(Error::invalid(format!(
            "profile has {} values but the trimmed frame has {} rows",
            mp.len(),
            trimmed.len()
        )));
    }
    trimmed.with_column("mp", mp.iter().map(|&v| Some(v)).collect())
}

/// The profile values in reverse time order.
pub fn reverse_mp(values: &[f64]) -> Vec<f64> {
    values.iter().rev().copied().collect()
}
