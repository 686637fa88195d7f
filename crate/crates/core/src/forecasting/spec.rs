use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neural::builders::{attention_network, cnn_lstm_network, lstm_network};
use crate::neural::{AdamConfig, NetworkSpec, TrainConfig};
use crate::wavelets::WaveletName;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Recursive,
    Direct,
    Hybrid,
    MultiOutput,
    MultiOutputBlockRecursive,
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrategyKind::Recursive => "recursive",
            StrategyKind::Direct => "direct",
            StrategyKind::Hybrid => "hybrid",
            StrategyKind::MultiOutput => "multi-output",
            StrategyKind::MultiOutputBlockRecursive => "multi-output-block-recursive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    Lstm,
    Attention,
    CnnLstm,
}

fn default_input_len() -> usize {
    288
}
fn default_target() -> String {
    "min_gas_price".into()
}
fn default_units() -> Vec<usize> {
    vec![50]
}
fn one() -> usize {
    1
}
fn default_filters() -> usize {
    9
}
fn default_kernel() -> usize {
    7
}
fn default_mp_window() -> usize {
    288
}
fn default_lambda() -> f64 {
    3.0
}
fn default_levels() -> Vec<usize> {
    vec![1, 2]
}
fn default_epochs() -> usize {
    15
}
fn default_batch() -> usize {
    32
}
fn default_lr() -> f64 {
    1e-3
}

/// Declarative description of one forecasting model and its preprocessing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub strategy: StrategyKind,
    pub horizon: usize,
    #[serde(default = "default_input_len")]
    pub input_len: usize,
    #[serde(default = "default_target")]
    pub target: String,
    /// Input variables; the target is always included. Empty = univariate.
    #[serde(default)]
    pub variables: Vec<String>,
    #[serde(default = "Architecture::default_lstm")]
    pub architecture: Architecture,
    /// LSTM layer sizes (for attention, the first entry is the head size).
    #[serde(default = "default_units")]
    pub units: Vec<usize>,
    /// Heads per attention bank or CNN-LSTM branch count.
    #[serde(default = "one")]
    pub att_heads: usize,
    #[serde(default = "one")]
    pub att_layers: usize,
    #[serde(default = "default_filters")]
    pub cnn_filters: usize,
    #[serde(default = "default_kernel")]
    pub cnn_kernel: usize,
    /// Block size of the block-recursive multi-output variant.
    #[serde(default)]
    pub block: Option<usize>,
    #[serde(default)]
    pub mp: bool,
    #[serde(default)]
    pub mp_reversed: bool,
    #[serde(default = "default_mp_window")]
    pub mp_window: usize,
    #[serde(default)]
    pub denoise_wavelet: Option<WaveletName>,
    #[serde(default = "default_lambda")]
    pub denoise_lambda: f64,
    #[serde(default = "default_levels")]
    pub denoise_levels: Vec<usize>,
    /// Cap the target at mean + k std of the training rows.
    #[serde(default)]
    pub truncate_k: Option<f64>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
}

impl Architecture {
    fn default_lstm() -> Self {
        Architecture::Lstm
    }
}

pub const MP_COLUMN: &str = "mp";

impl StrategySpec {
    /// Univariate LSTM with the library defaults.
    pub fn new(strategy: StrategyKind, horizon: usize) -> Self {
        StrategySpec {
            strategy,
            horizon,
            input_len: default_input_len(),
            target: default_target(),
            variables: Vec::new(),
            architecture: Architecture::Lstm,
            units: default_units(),
            att_heads: 1,
            att_layers: 1,
            cnn_filters: default_filters(),
            cnn_kernel: default_kernel(),
            block: None,
            mp: false,
            mp_reversed: false,
            mp_window: default_mp_window(),
            denoise_wavelet: None,
            denoise_lambda: default_lambda(),
            denoise_levels: default_levels(),
            truncate_k: None,
            epochs: default_epochs(),
            batch_size: default_batch(),
            learning_rate: default_lr(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.input_len == 0 {
            return bad("input_len must be at least 1".into());
        }
        if self.mp_reversed && !self.mp {
            return bad("mp_reversed requires mp = true".into());
        }
        if self.units.is_empty() || self.units.contains(&0) {
            return bad("units must be a non-empty list of positive sizes".into());
        }
        if self.att_heads == 0 || !(1..=2).contains(&self.att_layers) {
            return bad("att_heads must be positive and att_layers 1 or 2".into());
        }
        if self.epochs == 0 || self.batch_size == 0 || !(self.learning_rate >= 0.0) {
            return bad("epochs and batch_size must be positive, learning_rate non-negative".into());
        }
        if self.mp && self.mp_window < 2 {
            return bad("mp_window must be at least 2".into());
        }
        if self.denoise_wavelet.is_some() && (self.denoise_levels.is_empty() || !(self.denoise_lambda > 0.0)) {
            return bad("denoising needs levels and a positive lambda".into());
        }
        if self.variables.iter().any(|v| v == MP_COLUMN) {
            return bad(format!("`{MP_COLUMN}` is derived; enable it with mp = true"));
        }
        if self.strategy == StrategyKind::MultiOutputBlockRecursive && self.block.is_some_and(|b| b == 0) {
            return bad("block must be positive".into());
        }
        Ok(())
    }

    /// Frame variables fed to the network: target first, then the other
    /// selected variables, then the matrix-profile column if enabled.
    pub fn input_variables(&self) -> Vec<String> {
        let mut vars = vec![self.target.clone()];
        vars.extend(self.variables.iter().filter(|v| **v != self.target).cloned());
        if self.mp {
            vars.push(MP_COLUMN.into());
        }
        vars
    }

    /// Number of output steps per block for block-recursive multi-output.
    pub fn block_size(&self) -> usize {
        match self.strategy {
            StrategyKind::MultiOutputBlockRecursive => self.block.unwrap_or(self.horizon).min(self.horizon),
            _ => self.horizon,
        }
    }

    pub fn network(&self, vars: usize, input_len: usize, output_len: usize) -> NetworkSpec {
        match self.architecture {
            Architecture::Lstm => lstm_network(vars, input_len, &self.units, output_len),
            Architecture::Attention => {
                attention_network(vars, input_len, self.att_heads, self.att_layers, self.units[0], output_len)
            }
            Architecture::CnnLstm => cnn_lstm_network(
                vars,
                input_len,
                self.cnn_filters,
                self.cnn_kernel,
                &self.units,
                self.att_heads,
                output_len,
            ),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            adam: AdamConfig {
                learning_rate: self.learning_rate,
                ..Default::default()
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_keys() {
        let s: StrategySpec = toml_like(
            r#"{"strategy":"multi-output","horizon":10,"att_heads":4,"att_layers":2,"mp":true,"mp_reversed":true,"denoise_wavelet":"bior3.3","architecture":"attention"}"#,
        );
        assert_eq!(s.strategy, StrategyKind::MultiOutput);
        assert_eq!(s.input_len, 288);
        assert_eq!(s.denoise_wavelet, Some(WaveletName::Bior33));
        assert!(s.validate().is_ok());
        assert_eq!(s.input_variables(), vec!["min_gas_price".to_string(), "mp".into()]);
    }

    fn toml_like(json: &str) -> StrategySpec {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn inconsistent_flags_rejected() {
        let mut s = StrategySpec::new(StrategyKind::Hybrid, 10);
        s.mp_reversed = true;
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        let s = StrategySpec::new(StrategyKind::Hybrid, 0);
        assert!(s.validate().is_err());
        assert!(serde_json::from_str::<StrategySpec>(r#"{"strategy":"direct","horizon":1,"bogus":1}"#).is_err());
    }
}
