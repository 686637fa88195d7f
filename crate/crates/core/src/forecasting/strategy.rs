use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{extend_with_predictions, reverse_column, window_seq, PreparedData};
use super::report::LookaheadReport;
use super::spec::{StrategyKind, StrategySpec};
use crate::error::{Error, Result};
use crate::neural::{train, Examples, Network, Seq, TrainReport};
use crate::series::{metrics, FeatureFrame, WindowedDataset, ZScoreParams};

/// Recursive forecasts abort once a normalized prediction exceeds this.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// One fitted model: it sees the input window extended by `extra_rows`
/// earlier predictions and emits lookaheads `outputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub extra_rows: usize,
    pub outputs: Range<usize>,
}

/// Model layout of a strategy. Recursive uses one 1-step model applied
/// repeatedly, so its layout has a single member.
pub fn layout(spec: &StrategySpec) -> Vec<Member> {
    let h = spec.horizon;
    match spec.strategy {
        StrategyKind::Recursive => vec![Member {
            extra_rows: 0,
            outputs: 0..1,
        }],
        StrategyKind::Direct => (0..h)
            .map(|k| Member {
                extra_rows: 0,
                outputs: k..k + 1,
            })
            .collect(),
        StrategyKind::Hybrid => (0..h)
            .map(|k| Member {
                extra_rows: k,
                outputs: k..k + 1,
            })
            .collect(),
        StrategyKind::MultiOutput => vec![Member {
            extra_rows: 0,
            outputs: 0..h,
        }],
        StrategyKind::MultiOutputBlockRecursive => {
            let b = spec.block_size();
            (0..h)
                .step_by(b)
                .map(|j| Member {
                    extra_rows: j,
                    outputs: j..(j + b).min(h),
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedStrategy {
    pub spec: StrategySpec,
    pub variables: Vec<String>,
    pub norm: ZScoreParams,
    pub members: Vec<Member>,
    pub models: Vec<Network>,
    pub reports: Vec<TrainReport>,
    pub reversed_column: Option<usize>,
    pub seed: u64,
    /// Timestamps of the first and last row of the fitted span.
    pub data_span: (i64, i64),
}

/// Forecast in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedForecast {
    pub values: Vec<f64>,
    /// Lookahead index where a recursive forecast blew past the limit;
    /// later values repeat the last sane prediction.
    pub diverged_at: Option<usize>,
}

/// Per-lookahead predictions in original units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonForecast {
    pub values: Vec<f64>,
    /// Lookahead labels in minutes.
    pub minutes: Vec<i64>,
    pub diverged_at: Option<usize>,
}

/// One validation forecast against its actual value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRow {
    pub time: i64,
    pub lookahead: usize,
    pub actual: f64,
    pub predicted: f64,
}

fn examples(
    ds: &WindowedDataset,
    reversed: Option<usize>,
    prior: &[Vec<f64>],
    extra: usize,
    outputs: &Range<usize>,
) -> Examples {
    let mut ex = Examples::default();
    for k in 0..ds.len() {
        let base = window_seq(ds, k, reversed);
        let input = if extra == 0 {
            base
        } else {
            extend_with_predictions(&base, &prior[k][..extra])
        };
        ex.push(input, ds.target(k)[outputs.clone()].to_vec());
    }
    ex
}

fn fit_member(
    spec: &StrategySpec,
    data: &PreparedData,
    member: &Member,
    index: usize,
    seed: u64,
    prior_train: &[Vec<f64>],
    prior_val: &[Vec<f64>],
) -> Result<(Network, TrainReport)> {
    let wrap = |e: Error| Error::Member {
        index,
        source: Box::new(e),
    };
    let vars = data.frame.n_vars();
    let net_spec = spec.network(vars, spec.input_len + member.extra_rows, member.outputs.len());
    let mut net = Network::new(net_spec, seed + index as u64).map_err(wrap)?;
    let tr = examples(&data.train, data.reversed_column, prior_train, member.extra_rows, &member.outputs);
    let va = examples(&data.validation, data.reversed_column, prior_val, member.extra_rows, &member.outputs);
    let report = train(&mut net, &tr, &va, &spec.train_config()).map_err(wrap)?;
    log::info!(
        "{} model {index}: best epoch {} validation loss {:.6}",
        spec.strategy,
        report.best_epoch,
        report.best_validation_loss
    );
    Ok((net, report))
}

/// Fit every member of the strategy. Members that only see observed data
/// train in parallel; members consuming earlier predictions train in order.
pub fn fit(spec: &StrategySpec, data: &PreparedData, seed: u64) -> Result<TrainedStrategy> {
    spec.validate()?;
    let members = layout(spec);
    let independent = members.iter().all(|m| m.extra_rows == 0);
    let (models, reports): (Vec<Network>, Vec<TrainReport>) = if independent {
        let fitted: Vec<(Network, TrainReport)> = members
            .par_iter()
            .enumerate()
            .map(|(i, m)| fit_member(spec, data, m, i, seed, &[], &[]))
            .collect::<Result<_>>()?;
        fitted.into_iter().unzip()
    } else {
        let mut prior_train: Vec<Vec<f64>> = vec![Vec::new(); data.train.len()];
        let mut prior_val: Vec<Vec<f64>> = vec![Vec::new(); data.validation.len()];
        let mut models = Vec::new();
        let mut reports = Vec::new();
        for (i, m) in members.iter().enumerate() {
            let (net, rep) = fit_member(spec, data, m, i, seed, &prior_train, &prior_val)?;
            for (ds, prior) in [(&data.train, &mut prior_train), (&data.validation, &mut prior_val)] {
                let ex = examples(ds, data.reversed_column, prior, m.extra_rows, &m.outputs);
                let preds = net.predict_batch(&ex.inputs)?;
                for (p, new) in prior.iter_mut().zip(preds) {
                    p.extend(new);
                }
            }
            models.push(net);
            reports.push(rep);
        }
        (models, reports)
    };
    Ok(TrainedStrategy {
        spec: spec.clone(),
        variables: data.frame.variables().to_vec(),
        norm: data.norm.clone(),
        members,
        models,
        reports,
        reversed_column: data.reversed_column,
        seed,
        data_span: (data.frame.time(0), data.frame.time(data.frame.len() - 1)),
    })
}

pub fn fit_recursive(spec: &StrategySpec, data: &PreparedData, seed: u64) -> Result<TrainedStrategy> {
    expect_kind(spec, &[StrategyKind::Recursive])?;
    fit(spec, data, seed)
}

pub fn fit_direct(spec: &StrategySpec, data: &PreparedData, seed: u64) -> Result<TrainedStrategy> {
    expect_kind(spec, &[StrategyKind::Direct])?;
    fit(spec, data, seed)
}

pub fn fit_hybrid(spec: &StrategySpec, data: &PreparedData, seed: u64) -> Result<TrainedStrategy> {
    expect_kind(spec, &[StrategyKind::Hybrid])?;
    fit(spec, data, seed)
}

pub fn fit_multioutput(spec: &StrategySpec, data: &PreparedData, seed: u64) -> Result<TrainedStrategy> {
    expect_kind(spec, &[StrategyKind::MultiOutput, StrategyKind::MultiOutputBlockRecursive])?;
    fit(spec, data, seed)
}

fn expect_kind(spec: &StrategySpec, kinds: &[StrategyKind]) -> Result<()> {
    if kinds.contains(&spec.strategy) {
        Ok(())
    } else {
        Err(Error::Config(format!("strategy is {}, expected {}", spec.strategy, kinds[0])))
    }
}

impl TrainedStrategy {
    pub fn horizon(&self) -> usize {
        self.spec.horizon
    }

    /// Forecast from a normalized `input_len x V` window (reversal already
    /// applied).
    pub fn forecast_normalized(&self, input: &Seq) -> Result<NormalizedForecast> {
        let h = self.horizon();
        if self.spec.strategy == StrategyKind::Recursive {
            let model = &self.models[0];
            let mut window = input.clone();
            let mut values = Vec::with_capacity(h);
            let mut diverged_at = None;
            for k in 0..h {
                let p = model.predict(&window)?[0];
                if diverged_at.is_none() && !(p.abs() <= DIVERGENCE_LIMIT) {
                    log::warn!("recursive forecast diverged at lookahead {}", k + 1);
                    diverged_at = Some(k);
                }
                if diverged_at.is_some() {
                    let last = values.last().copied().unwrap_or(0.0);
                    values.resize(h, last);
                    break;
                }
                values.push(p);
                let next = extend_with_predictions(&window, &[p]);
                window = Seq::from_vec(window.steps, window.features, next.data[window.features..].to_vec());
            }
            return Ok(NormalizedForecast { values, diverged_at });
        }
        let mut values = Vec::with_capacity(h);
        for (m, net) in self.members.iter().zip(&self.models) {
            let x = if m.extra_rows == 0 {
                input.clone()
            } else {
                extend_with_predictions(input, &values[..m.extra_rows])
            };
            values.extend(net.predict(&x)?);
        }
        Ok(NormalizedForecast {
            values,
            diverged_at: None,
        })
    }

    /// Forecast from the last `input_len` rows of `history`, which must hold
    /// the fitted variables in original units.
    pub fn forecast(&self, history: &FeatureFrame) -> Result<HorizonForecast> {
        let n = self.spec.input_len;
        if history.variables() != self.variables.as_slice() {
            return Err(Error::invalid(format!(
                "history variables {:?} differ from the fitted {:?}",
                history.variables(),
                self.variables
            )));
        }
        if history.len() < n {
            return Err(Error::invalid(format!("history has {} rows, need {n}", history.len())));
        }
        let tail = history.slice(history.len() - n, history.len())?;
        if tail.has_gaps() {
            return Err(Error::invalid("history window contains gaps"));
        }
        let normalized = self.norm.apply(&tail)?;
        let mut x = Seq::from_vec(n, normalized.n_vars(), normalized.rows(0, n).to_vec());
        if let Some(c) = self.reversed_column {
            reverse_column(&mut x, c);
        }
        let f = self.forecast_normalized(&x)?;
        let z = self.norm.params[0];
        let step_min = history.step() / 60;
        Ok(HorizonForecast {
            values: f.values.iter().map(|&v| z.invert(v)).collect(),
            minutes: (1..=self.horizon() as i64).map(|k| k * step_min).collect(),
            diverged_at: f.diverged_at,
        })
    }

    /// Denormalized forecasts for every validation window.
    pub fn validation_forecasts(&self, data: &PreparedData) -> Result<Vec<ForecastRow>> {
        let ds = &data.validation;
        if ds.is_empty() {
            return Err(Error::invalid("validation set is empty"));
        }
        let z = self.norm.params[0];
        let n = self.spec.input_len;
        let per_window: Vec<Vec<ForecastRow>> = (0..ds.len())
            .into_par_iter()
            .map(|k| {
                let f = self.forecast_normalized(&window_seq(ds, k, data.reversed_column))?;
                let s = ds.starts()[k] + n;
                Ok(f.values
                    .iter()
                    .enumerate()
                    .map(|(h, &v)| ForecastRow {
                        time: ds.frame().time(s + h),
                        lookahead: h + 1,
                        actual: data.raw_target[s + h].unwrap_or(f64::NAN),
                        predicted: z.invert(v),
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        Ok(per_window.into_iter().flatten().collect())
    }

    pub fn evaluate(&self, data: &PreparedData) -> Result<(LookaheadReport, Vec<ForecastRow>)> {
        let rows = self.validation_forecasts(data)?;
        let report = report_from_rows(&rows, self.horizon())?;
        Ok((report, rows))
    }
}

/// Metrics per lookahead over forecast rows.
pub fn report_from_rows(rows: &[ForecastRow], horizon: usize) -> Result<LookaheadReport> {
    let per = (1..=horizon)
        .map(|h| {
            let (truth, pred): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.lookahead == h && r.actual.is_finite())
                .map(|r| (r.actual, r.predicted))
                .unzip();
            metrics(&truth, &pred)
        })
        .collect::<Result<Vec<_>>>()?;
    LookaheadReport::from_lookaheads(per)
}
