use crate::error::{Error, Result};
use crate::matrix_profile::causal_profile_column;
use crate::neural::Seq;
use crate::series::{make_windows, split_70_30, FeatureFrame, WindowedDataset, ZScoreParams};
use crate::stats::{mean, pop_std};
use crate::wavelets::{hard_threshold_denoise, ThresholdParams, WaveletFilterBank};

use super::spec::{StrategySpec, MP_COLUMN};

/// One span of data ready for fitting: preprocessed, normalized and windowed.
#[derive(Debug, Clone)]
pub struct PreparedData {
    /// Normalized model inputs, columns in `spec.input_variables()` order.
    pub frame: FeatureFrame,
    /// The untouched target series of the span, in original units.
    pub raw_target: Vec<Option<f64>>,
    pub norm: ZScoreParams,
    pub train: WindowedDataset,
    pub validation: WindowedDataset,
    /// Column reversed inside every input window, if any.
    pub reversed_column: Option<usize>,
    pub denoise: Option<ThresholdParams>,
    /// Upper cap applied to the target, if truncation is on.
    pub cap: Option<f64>,
}

fn gap_free(col: &[Option<f64>], what: &str) -> Result<Vec<f64>> {
    col.iter()
        .map(|v| v.ok_or_else(|| Error::invalid(format!("{what} requires a gap-free target series"))))
        .collect()
}

/// Select variables, add the causal (left) matrix-profile column, window and split
/// 70:30, then truncate, denoise and z-score using statistics of the rows
/// touched by training examples.
pub fn prepare(frame: &FeatureFrame, spec: &StrategySpec) -> Result<PreparedData> {
    spec.validate()?;
    let mut base_vars = spec.input_variables();
    if spec.mp {
        base_vars.pop();
    }
    let mut sel = frame.select(&base_vars)?;
    let raw_target = sel.column(0);
    if spec.mp {
        let y = gap_free(&raw_target, "the matrix profile")?;
        let col = causal_profile_column(&y, spec.mp_window)?;
        sel = sel.with_column(MP_COLUMN, col)?;
    }
    let ds = make_windows(&sel, spec.input_len, spec.horizon, &spec.target)?;
    let (train, _) = split_70_30(&ds)?;
    let fit_from = train.starts()[0];
    let fit_to = train.starts().last().unwrap() + spec.input_len + spec.horizon;

    let mut target = sel.column(0);
    let mut cap = None;
    if let Some(k) = spec.truncate_k {
        let fit: Vec<f64> = target[fit_from..fit_to].iter().flatten().copied().collect();
        let c = mean(&fit) + k * pop_std(&fit);
        for v in target.iter_mut().flatten() {
            *v = v.min(c);
        }
        cap = Some(c);
    }
    let mut denoise = None;
    if let Some(name) = spec.denoise_wavelet {
        let y = gap_free(&target, "denoising")?;
        let depth = spec.denoise_levels.iter().copied().max().unwrap_or(1);
        let (den, params) = hard_threshold_denoise(&y, &WaveletFilterBank::new(name), depth, &spec.denoise_levels, spec.denoise_lambda)?;
        target = den.into_iter().map(Some).collect();
        denoise = Some(params);
    }
    let mut cols: Vec<(String, Vec<Option<f64>>)> = vec![(spec.target.clone(), target)];
    for v in 1..sel.n_vars() {
        cols.push((sel.variables()[v].clone(), sel.column(v)));
    }
    let processed = FeatureFrame::from_columns(sel.start_time(), sel.step(), cols)?;
    let norm = ZScoreParams::fit(&processed, fit_from, fit_to)?;
    let normalized = norm.apply(&processed)?;
    let ds = make_windows(&normalized, spec.input_len, spec.horizon, &spec.target)?;
    let (train, validation) = split_70_30(&ds)?;
    Ok(PreparedData {
        reversed_column: spec.mp_reversed.then(|| normalized.n_vars() - 1),
        frame: normalized,
        raw_target,
        norm,
        train,
        validation,
        denoise,
        cap,
    })
}

/// Input window `k` of `ds` as a sequence, with the reversed column (if any)
/// flipped in time.
pub fn window_seq(ds: &WindowedDataset, k: usize, reversed_column: Option<usize>) -> Seq {
    let v = ds.frame().n_vars();
    let mut s = Seq::from_vec(ds.input_len(), v, ds.input(k).to_vec());
    if let Some(c) = reversed_column {
        reverse_column(&mut s, c);
    }
    s
}

pub fn reverse_column(s: &mut Seq, c: usize) {
    let n = s.steps;
    for t in 0..n / 2 {
        let (a, b) = (t * s.features + c, (n - 1 - t) * s.features + c);
        s.data.swap(a, b);
    }
}

/// Append one row per prediction: the target channel (column 0) holds the
/// prediction, the other channels repeat the last observed row.
pub fn extend_with_predictions(base: &Seq, preds: &[f64]) -> Seq {
    let f = base.features;
    let mut data = Vec::with_capacity((base.steps + preds.len()) * f);
    data.extend_from_slice(&base.data);
    let last = base.row(base.steps - 1).to_vec();
    for &p in preds {
        data.push(p);
        data.extend_from_slice(&last[1..]);
    }
    Seq::from_vec(base.steps + preds.len(), f, data)
}
