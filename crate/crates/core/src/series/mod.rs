//! Uniform multivariate frames, normalization, windowing, walk-forward
//! planning and evaluation metrics.

mod frame;
mod metrics;
mod normalize;
mod walk;
mod windows;

pub use frame::{downsample_frame, downsample_rows, FeatureFrame, TimedRow};
pub use metrics::{metrics, MetricReport, MAPE_EPSILON};
pub use normalize::{truncate_outliers, zscore_apply, zscore_fit, zscore_invert, ZScore, ZScoreParams};
pub use walk::{walk_forward, WalkForwardPlan, WalkWindow};
pub use windows::{make_windows, split_70_30, WindowedDataset};

/// Default resolution of modeled frames: five minutes.
pub const DEFAULT_STEP_SECS: i64 = 300;
