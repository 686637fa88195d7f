use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gasfc_core::forecasting::{
    report_from_rows, run_walk_forward, ForecastRow, LookaheadReport, Member, SpanResult, WalkSettings,
};
use gasfc_core::neural::{save_checkpoint, TrainReport};
use gasfc_core::series::downsample_frame;
use gasfc_core::wavelets::ThresholdParams;
use gasfc_core::{Error, FeatureFrame, Result, ZScoreParams};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const MANIFEST: &str = "manifest.txt";
pub const REPORT_TABLE: &str = "lookahead_report.csv";
pub const FORECASTS: &str = "forecasts.csv";

const SECS_PER_DAY: i64 = 86_400;

#[derive(Serialize)]
struct SpanState<'a> {
    span: usize,
    rows: (usize, usize),
    seed: u64,
    data_span: (i64, i64),
    variables: &'a [String],
    norm: &'a ZScoreParams,
    members: &'a [Member],
    reversed_column: Option<usize>,
    cap: Option<f64>,
    denoise: Option<&'a ThresholdParams>,
}

#[derive(Serialize)]
struct SpanTraining<'a> {
    span: usize,
    members: &'a [TrainReport],
}

#[derive(Serialize)]
struct Reports<'a> {
    average: &'a LookaheadReport,
    spans: Vec<&'a LookaheadReport>,
}

/// Load the config, run every walk-forward span and write the run directory.
/// `out` overrides the config's `output_dir`. On failure a manifest naming
/// the failing stage is still written when the directory exists.
pub fn cmd_run(config_path: &Path, out: Option<&Path>) -> Result<PathBuf> {
    let cfg = ExperimentConfig::load(config_path)?;
    let dir = match (out, &cfg.output_dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) => o.clone(),
        (None, None) => return Err(Error::Config("no output directory given (use --out or output_dir)".into())),
    };
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut stage = "config";
    let result = execute(&cfg, &dir, &mut stage);
    let status = match &result {
        Ok(()) => None,
        Err(e) => Some((stage, e.to_string())),
    };
    write_manifest(&dir, cfg.seed, status.as_ref().map(|(s, m)| (*s, m.as_str())))?;
    result.map(|()| dir)
}

fn execute(cfg: &ExperimentConfig, dir: &Path, stage: &mut &'static str) -> Result<()> {
    write(&dir.join("config.toml"), &cfg.to_toml())?;

    *stage = "load";
    let mut frame = FeatureFrame::load(&cfg.data.frame)?;
    if frame.step() != cfg.data.resolution {
        frame = downsample_frame(&frame, cfg.data.resolution)?;
    }
    let per_day = (SECS_PER_DAY / cfg.data.resolution).max(1) as usize;
    let walk = WalkSettings {
        span: cfg.walk.span_days.map(|d| d * per_day),
        stride: cfg.walk.stride_days.unwrap_or(1) * per_day,
    };

    *stage = "train";
    let (spans, avg) = run_walk_forward(&frame, &cfg.strategy, cfg.seed, &walk)?;

    *stage = "write";
    write_outputs(cfg, dir, &frame, &spans, &avg)
}

fn write_outputs(
    cfg: &ExperimentConfig,
    dir: &Path,
    frame: &FeatureFrame,
    spans: &[SpanResult],
    avg: &LookaheadReport,
) -> Result<()> {
    let step_minutes = frame.step() / 60;
    let label = &cfg.strategy.target;
    write(&dir.join(REPORT_TABLE), &avg.to_table(label, step_minutes))?;

    let mut fc = String::from("span,time,lookahead,actual,predicted\n");
    for s in spans {
        for r in &s.forecasts {
            writeln!(fc, "{},{},{},{},{}", s.span, r.time, r.lookahead, r.actual, r.predicted).unwrap();
        }
    }
    write(&dir.join(FORECASTS), &fc)?;

    let training: Vec<SpanTraining> = spans
        .iter()
        .map(|s| SpanTraining {
            span: s.span,
            members: &s.trained.reports,
        })
        .collect();
    write(&dir.join("train_reports.json"), &to_json(&training)?)?;

    let reports = Reports {
        average: avg,
        spans: spans.iter().map(|s| &s.report).collect(),
    };
    write(&dir.join("report.json"), &to_json(&reports)?)?;

    let states: Vec<SpanState> = spans
        .iter()
        .map(|s| SpanState {
            span: s.span,
            rows: (s.rows.start, s.rows.end),
            seed: s.trained.seed,
            data_span: s.trained.data_span,
            variables: &s.trained.variables,
            norm: &s.trained.norm,
            members: &s.trained.members,
            reversed_column: s.trained.reversed_column,
            cap: s.data.cap,
            denoise: s.data.denoise.as_ref(),
        })
        .collect();
    write(&dir.join("strategy.json"), &to_json(&states)?)?;

    for s in spans {
        let md = dir.join("models").join(format!("span{:03}", s.span));
        fs::create_dir_all(&md).map_err(|e| Error::io(&md, e))?;
        for (k, net) in s.trained.models.iter().enumerate() {
            save_checkpoint(net, &md.join(format!("model{k:03}.ckpt")))?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::invalid(format!("serializing report: {e}")))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else if path.file_name().is_some_and(|n| n != MANIFEST) {
            out.push(path.strip_prefix(root).unwrap().to_path_buf());
        }
    }
    Ok(())
}

/// Seed, status and the sha256 of every file in the run directory, sorted by
/// path.
fn write_manifest(dir: &Path, seed: u64, failure: Option<(&str, &str)>) -> Result<()> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    files.sort();
    let mut text = format!("seed={seed}\n");
    match failure {
        None => text.push_str("status=ok\n"),
        Some((stage, msg)) => {
            writeln!(text, "status=failed\nstage={stage}\nerror={}", msg.replace('\n', " ")).unwrap();
        }
    }
    for f in files {
        let bytes = fs::read(dir.join(&f)).map_err(|e| Error::io(dir.join(&f), e))?;
        let name = f.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        writeln!(text, "{}  {name}", hex::encode(Sha256::digest(&bytes))).unwrap();
    }
    write(&dir.join(MANIFEST), &text)
}

/// Read the forecasts of a run directory, grouped by span.
pub fn read_forecasts(dir: &Path) -> Result<Vec<Vec<ForecastRow>>> {
    let path = dir.join(FORECASTS);
    let mut rdr = csv::Reader::from_path(&path).map_err(|e| csv_error(&path, e))?;
    let mut spans: Vec<Vec<ForecastRow>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(&path, e))?;
        let line = i as u64 + 2;
        let field = |k: usize| -> Result<&str> {
            rec.get(k).ok_or_else(|| Error::Parse {
                path: path.clone(),
                line,
                message: format!("missing field {k}"),
            })
        };
        let perr = |m: String| Error::Parse {
            path: path.clone(),
            line,
            message: m,
        };
        let span: usize = field(0)?.parse().map_err(|e| perr(format!("span: {e}")))?;
        let row = ForecastRow {
            time: field(1)?.parse().map_err(|e| perr(format!("time: {e}")))?,
            lookahead: field(2)?.parse().map_err(|e| perr(format!("lookahead: {e}")))?,
            actual: field(3)?.parse().map_err(|e| perr(format!("actual: {e}")))?,
            predicted: field(4)?.parse().map_err(|e| perr(format!("predicted: {e}")))?,
        };
        while spans.len() <= span {
            spans.push(Vec::new());
        }
        spans[span].push(row);
    }
    Ok(spans)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        },
        _ => Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        },
    }
}

/// Recompute the span-averaged lookahead report of one or more run
/// directories from their forecast files.
pub fn cmd_evaluate(dirs: &[PathBuf]) -> Result<LookaheadReport> {
    let mut reports = Vec::new();
    for d in dirs {
        for rows in read_forecasts(d)? {
            if rows.is_empty() {
                continue;
            }
            let h = rows.iter().map(|r| r.lookahead).max().unwrap_or(0);
            reports.push(report_from_rows(&rows, h)?);
        }
    }
    if reports.is_empty() {
        return Err(Error::invalid("no forecasts found"));
    }
    LookaheadReport::average(&reports)
}
