use serde::{Deserialize, Serialize};

use super::data::{prepare, PreparedData};
use super::report::LookaheadReport;
use super::spec::StrategySpec;
use super::strategy::{fit, ForecastRow, TrainedStrategy};
use crate::error::Result;
use crate::series::{walk_forward, FeatureFrame};

/// Outcome of fitting and evaluating one data span.
#[derive(Debug, Clone)]
pub struct SpanResult {
    pub span: usize,
    pub rows: std::ops::Range<usize>,
    pub trained: TrainedStrategy,
    pub report: LookaheadReport,
    pub forecasts: Vec<ForecastRow>,
    pub data: PreparedData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSettings {
    /// Rows per span; the whole frame when absent.
    pub span: Option<usize>,
    pub stride: usize,
}

pub fn run_span(frame: &FeatureFrame, spec: &StrategySpec, seed: u64) -> Result<(TrainedStrategy, LookaheadReport, Vec<ForecastRow>, PreparedData)> {
    let data = prepare(frame, spec)?;
    let trained = fit(spec, &data, seed)?;
    let (report, rows) = trained.evaluate(&data)?;
    Ok((trained, report, rows, data))
}

/// Fit and evaluate every walk-forward span; also returns the span-averaged
/// report.
pub fn run_walk_forward(
    frame: &FeatureFrame,
    spec: &StrategySpec,
    seed: u64,
    walk: &WalkSettings,
) -> Result<(Vec<SpanResult>, LookaheadReport)> {
    let span = walk.span.unwrap_or(frame.len());
    let plan = walk_forward(frame.len(), span, walk.stride)?;
    let mut results = Vec::with_capacity(plan.windows.len());
    for (k, w) in plan.windows.iter().enumerate() {
        log::info!("span {k}: rows {}..{}", w.rows.start, w.rows.end);
        let sub = frame.slice(w.rows.start, w.rows.end)?;
        let (trained, report, forecasts, data) = run_span(&sub, spec, seed)?;
        results.push(SpanResult {
            span: k,
            rows: w.rows.clone(),
            trained,
            report,
            forecasts,
            data,
        });
    }
    let reports: Vec<LookaheadReport> = results.iter().map(|r| r.report.clone()).collect();
    let avg = LookaheadReport::average(&reports)?;
    Ok((results, avg))
}
