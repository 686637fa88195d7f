//! Multi-step strategies, evaluation and heuristic oracle baselines.

mod baseline;
mod data;
mod pipeline;
mod report;
mod spec;
mod strategy;

pub use baseline::{baseline_geth, baseline_gse, GETH_BLOCKS, GETH_PERCENTILE, GSE_BLOCKS};
pub use data::{extend_with_predictions, prepare, reverse_column, window_seq, PreparedData};
pub use pipeline::{run_span, run_walk_forward, SpanResult, WalkSettings};
pub use report::{mean_report, table_header, table_row, LookaheadReport, TABLE_HEADER};
pub use spec::{Architecture, StrategyKind, StrategySpec, MP_COLUMN};
pub use strategy::{
    fit, fit_direct, fit_hybrid, fit_multioutput, fit_recursive, layout, report_from_rows, ForecastRow,
    HorizonForecast, Member, NormalizedForecast, TrainedStrategy, DIVERGENCE_LIMIT,
};
