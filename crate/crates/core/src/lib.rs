//! Gas-price forecasting toolkit.
//!
//! The pipeline runs from exported block and tick dumps through uniform
//! feature frames, wavelet analysis (coherence and threshold denoising),
//! matrix-profile features and multi-step neural forecasters.

pub mod error;
pub mod forecasting;
pub mod ingest;
pub mod matrix_profile;
pub mod neural;
pub mod series;
pub mod stats;
pub mod synthetic;
pub mod wavelets;

pub use error::{Error, ErrorKind, Result};
pub use series::{FeatureFrame, MetricReport, WindowedDataset, ZScoreParams};
