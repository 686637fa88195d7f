use std::sync::Arc;

use super::FeatureFrame;
use crate::error::{Error, Result};

/// Sliding-window supervised examples over a frame.
///
/// Example `k` starts at row `starts[k]`: its input block is rows
/// `[s, s + input_len)` of every variable and its target is the target
/// variable at rows `[s + input_len, s + input_len + horizon)`.
#[derive(Debug, Clone)]
pub struct WindowedDataset {
    frame: Arc<FeatureFrame>,
    input_len: usize,
    horizon: usize,
    target: usize,
    starts: Vec<usize>,
    dropped: usize,
}

impl WindowedDataset {
    pub fn frame(&self) -> &FeatureFrame {
        &self.frame
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target_name(&self) -> &str {
        &self.frame.variables()[self.target]
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    /// Start rows of the examples, ascending.
    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    /// Windows discarded because they touched a gap.
    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// Row-major `input_len x V` block of example `k`.
    pub fn input(&self, k: usize) -> &[f64] {
        let s = self.starts[k];
        self.frame.rows(s, s + self.input_len)
    }

    /// Target values `y_{t+1..t+H}` of example `k`.
    pub fn target(&self, k: usize) -> Vec<f64> {
        let s = self.starts[k] + self.input_len;
        (s..s + self.horizon)
            .map(|t| self.frame.row(t)[self.target])
            .collect()
    }

    /// Timestamp of the first target row of example `k`.
    pub fn target_time(&self, k: usize) -> i64 {
        self.frame.time(self.starts[k] + self.input_len)
    }

    fn with_starts(&self, starts: Vec<usize>) -> Self {
        WindowedDataset {
            frame: Arc::clone(&self.frame),
            input_len: self.input_len,
            horizon: self.horizon,
            target: self.target,
            starts,
            dropped: 0,
        }
    }
}

/// Enumerate every sliding window of `input_len` inputs and `horizon` targets.
/// Windows whose input rows contain a gap in any variable, or whose target
/// rows contain a gap in the target variable, are dropped and counted.
pub fn make_windows(frame: &FeatureFrame, input_len: usize, horizon: usize, target: &str) -> Result<WindowedDataset> {
    if input_len == 0 || horizon == 0 {
        return Err(Error::invalid("input length and horizon must be at least 1"));
    }
    let t_len = frame.len();
    if input_len + horizon > t_len {
        return Err(Error::invalid(format!(
            "input length {input_len} + horizon {horizon} exceeds frame length {t_len}"
        )));
    }
    let target_idx = frame.var_index(target)?;
    let complete: Vec<bool> = (0..t_len).map(|t| frame.row_complete(t)).collect();
    let target_ok: Vec<bool> = (0..t_len).map(|t| !frame.is_gap(t, target_idx)).collect();

    let count = t_len - input_len - horizon + 1;
    let mut starts = Vec::with_capacity(count);
    let mut dropped = 0;
    for s in 0..count {
        let ok = complete[s..s + input_len].iter().all(|&c| c)
            && target_ok[s + input_len..s + input_len + horizon].iter().all(|&c| c);
        if ok {
            starts.push(s);
        } else {
            dropped += 1;
        }
    }
    if dropped > 0 {
        log::info!("make_windows: dropped {dropped} windows touching gaps");
    }
    Ok(WindowedDataset {
        frame: Arc::new(frame.clone()),
        input_len,
        horizon,
        target: target_idx,
        starts,
        dropped,
    })
}

/// Chronological split: the first `floor(0.7 * count)` examples train, the
/// rest validate.
pub fn split_70_30(ds: &WindowedDataset) -> Result<(WindowedDataset, WindowedDataset)> {
    if ds.len() < 10 {
        return Err(Error::invalid(format!(
            "need at least 10 examples to split, have {}",
            ds.len()
        )));
    }
    let cut = ds.len() * 7 / 10;
    Ok((
        ds.with_starts(ds.starts[..cut].to_vec()),
        ds.with_starts(ds.starts[cut..].to_vec()),
    ))
}
