use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gasfc_core::forecasting::{baseline_geth, baseline_gse, GETH_BLOCKS, GSE_BLOCKS};
use gasfc_core::ingest::{
    aggregate_block_features, parse_blocks, parse_ticks, parse_transactions, percentile_column, read_block_features,
    write_block_features, BlockFeatures, TickRecord,
};
use gasfc_core::matrix_profile::{align_mp, mp_fast, mp_rolling};
use gasfc_core::series::{downsample_rows, TimedRow};
use gasfc_core::wavelets::{
    band_summary, denoise_report, export_coherence, hard_threshold_denoise, max_depth, wavelet_coherence,
    CoherenceParams, WaveletFilterBank, WaveletName,
};
use gasfc_core::{Error, FeatureFrame, Result};

pub const ETH_PRICE: &str = "eth_price";

/// Parse raw dumps and write the per-block feature table. Returns a short
/// summary including reject counts.
pub fn cmd_ingest(transactions: &Path, blocks: &Path, percentiles: &[f64], out: &Path) -> Result<String> {
    let txs = parse_transactions(transactions)?;
    let blks = parse_blocks(blocks)?;
    for r in txs.rejects.iter().chain(&blks.rejects) {
        log::warn!("rejected line {}: {}", r.line, r.reason);
    }
    let table = aggregate_block_features(&txs.records, &blks.records, percentiles)?;
    write_block_features(out, &table)?;
    Ok(format!(
        "blocks={}\ntransactions={}\nrejected_transactions={}\nrejected_blocks={}\n",
        table.rows.len(),
        txs.records.len(),
        txs.rejects.len(),
        blks.rejects.len()
    ))
}

/// Variables and timed rows of a block feature table.
pub fn block_rows(table: &BlockFeatures) -> (Vec<String>, Vec<TimedRow>) {
    let mut vars: Vec<String> = ["min_gas_price", "max_gas_price", "avg_gas_price"].map(String::from).to_vec();
    vars.extend(table.percentiles.iter().map(|&r| percentile_column(r)));
    vars.extend(
        ["tx_count", "contract_count", "base_fee", "gas_used", "size_gas", "size_bytes"].map(String::from),
    );
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let mut v = vec![r.min_gas_price, r.max_gas_price, r.avg_gas_price];
            v.extend(r.pct_gas_price.iter().copied());
            v.push(Some(r.tx_count as f64));
            v.push(Some(r.contract_count as f64));
            v.push(r.base_fee);
            v.extend([r.gas_used, r.size_gas, r.size_bytes].map(|x| x.map(|x| x as f64)));
            TimedRow {
                timestamp: r.timestamp,
                values: v,
            }
        })
        .collect();
    (vars, rows)
}

/// Merge block features and optional price ticks into a regular frame.
pub fn build_frame(table: &BlockFeatures, ticks: &[TickRecord], resolution: i64) -> Result<FeatureFrame> {
    let (mut vars, mut rows) = block_rows(table);
    if !ticks.is_empty() {
        vars.push(ETH_PRICE.to_string());
        for r in &mut rows {
            r.values.push(None);
        }
        let width = vars.len();
        rows.extend(ticks.iter().map(|t| {
            let mut values = vec![None; width];
            values[width - 1] = Some(t.open_price);
            TimedRow {
                timestamp: t.timestamp,
                values,
            }
        }));
    }
    downsample_rows(&vars, &rows, resolution)
}

pub fn cmd_frame(features: &Path, ticks: Option<&Path>, resolution: i64, out: &Path) -> Result<String> {
    let table = read_block_features(features)?;
    let ticks = match ticks {
        Some(p) => parse_ticks(p)?,
        None => Vec::new(),
    };
    let frame = build_frame(&table, &ticks, resolution)?;
    frame.save(out)?;
    let gaps = (0..frame.len()).filter(|&t| !frame.row_complete(t)).count();
    Ok(format!(
        "rows={}\nvariables={}\nrows_with_gaps={gaps}\n",
        frame.len(),
        frame.variables().join(";")
    ))
}

fn frame_series(frame: &FeatureFrame, var: &str, range: Option<(usize, usize)>) -> Result<Vec<f64>> {
    let col = frame.dense_column(var)?;
    match range {
        None => Ok(col),
        Some((from, len)) => col
            .get(from..from + len)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| Error::invalid(format!("rows {from}..{} outside a {}-row frame", from + len, col.len()))),
    }
}

/// Coherence grid between two frame variables, with dt in hours.
pub fn cmd_coherence(frame: &Path, x: &str, y: &str, range: Option<(usize, usize)>, out: &Path) -> Result<String> {
    let frame = FeatureFrame::load(frame)?;
    let xs = frame_series(&frame, x, range)?;
    let ys = frame_series(&frame, y, range)?;
    let params = CoherenceParams {
        dt: frame.step() as f64 / 3600.0,
        ..CoherenceParams::default()
    };
    let map = wavelet_coherence(&xs, &ys, &params)?;
    export_coherence(&map, out)?;
    let mut text = format!("mean_in_cone={}\n", map.mean_in_cone());
    text.push_str("scale_lo_h,scale_hi_h,mean_coherence,cells\n");
    for b in band_summary(&map) {
        writeln!(text, "{},{},{},{}", b.scale_lo, b.scale_hi, b.mean_coherence, b.cells).unwrap();
    }
    Ok(text)
}

pub struct DenoiseArgs<'a> {
    pub frame: &'a Path,
    pub variable: &'a str,
    pub wavelet: WaveletName,
    pub depth: Option<usize>,
    pub levels: &'a [usize],
    pub lambda: f64,
    pub out: &'a Path,
}

/// Denoise one variable; writes a frame with the raw and denoised series and
/// returns the key-value report.
pub fn cmd_denoise(a: &DenoiseArgs) -> Result<String> {
    let frame = FeatureFrame::load(a.frame)?;
    let raw = frame.dense_column(a.variable)?;
    let bank = WaveletFilterBank::new(a.wavelet);
    let depth = a.depth.unwrap_or_else(|| a.levels.iter().copied().max().unwrap_or(1));
    let (den, params) = hard_threshold_denoise(&raw, &bank, depth, a.levels, a.lambda)?;
    let report = denoise_report(&raw, &den)?;
    let out = FeatureFrame::from_dense(
        frame.start_time(),
        frame.step(),
        vec![(a.variable.to_string(), raw), (format!("{}_denoised", a.variable), den)],
    )?;
    out.save(a.out)?;
    let mut text = format!("wavelet={}\ndepth={depth}\nmax_depth={}\nlambda={}\n", a.wavelet, max_depth(frame.len(), &bank), a.lambda);
    text.push_str(&report.to_kv());
    for l in &params.levels {
        writeln!(
            text,
            "level{}: mad={} sigma={} threshold={} zeroed={}/{}",
            l.level, l.mad, l.sigma, l.threshold, l.zeroed, l.count
        )
        .unwrap();
    }
    Ok(text)
}

pub struct MpArgs<'a> {
    pub frame: &'a Path,
    pub variable: &'a str,
    pub window: usize,
    /// Snapshot interval when rolling.
    pub rolling: Option<usize>,
    pub out: &'a Path,
    pub aligned: Option<&'a Path>,
}

/// Matrix profile of one variable. Rolling mode writes one file per
/// snapshot into the `out` directory.
pub fn cmd_mp(a: &MpArgs) -> Result<String> {
    let frame = FeatureFrame::load(a.frame)?;
    let series = frame.dense_column(a.variable)?;
    let mut text = String::new();
    let full = match a.rolling {
        None => {
            let mp = mp_fast(&series, a.window)?;
            mp.save(a.out)?;
            mp
        }
        Some(step) => {
            let r = mp_rolling(&series, a.window, step)?;
            fs::create_dir_all(a.out).map_err(|e| Error::io(a.out, e))?;
            for s in &r.snapshots {
                s.profile.save(&a.out.join(format!("mp_{:08}.txt", s.prefix_len)))?;
            }
            writeln!(text, "snapshots={}\nskipped={}", r.snapshots.len(), r.skipped.len()).unwrap();
            r.snapshots
                .last()
                .map(|s| s.profile.clone())
                .ok_or_else(|| Error::invalid("series too short for any snapshot"))?
        }
    };
    if let Some(i) = full.discord() {
        writeln!(text, "discord_index={i}\ndiscord_distance={}", full.values[i]).unwrap();
    }
    if let Some(i) = full.motif() {
        writeln!(text, "motif_index={i}\nmotif_distance={}", full.values[i]).unwrap();
    }
    writeln!(text, "flat_windows={}", full.flat_windows.len()).unwrap();
    if let Some(p) = a.aligned {
        align_mp(&frame, &full.values, a.window)?.save(p)?;
    }
    Ok(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Geth,
    Gse,
}

/// Rolling oracle output per block with enough history, as CSV.
pub fn cmd_baseline(features: &Path, kind: BaselineKind, candidate: Option<f64>, out: &Path) -> Result<String> {
    let table = read_block_features(features)?;
    let blocks: Vec<(u64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| r.min_gas_price.map(|m| (r.block_number, m)))
        .collect();
    let minima: Vec<f64> = blocks.iter().map(|b| b.1).collect();
    let (need, header) = match kind {
        BaselineKind::Geth => (GETH_BLOCKS, "block_number,recommended_price"),
        BaselineKind::Gse => (GSE_BLOCKS, "block_number,inclusion_probability"),
    };
    let candidate = match (kind, candidate) {
        (BaselineKind::Gse, None) => return Err(Error::Config("gse needs --candidate".into())),
        (_, c) => c.unwrap_or(0.0),
    };
    let mut csv = format!("{header}\n");
    let mut n = 0;
    for i in need..=minima.len() {
        let v = match kind {
            BaselineKind::Geth => baseline_geth(&minima[..i])?,
            BaselineKind::Gse => baseline_gse(&minima[..i], candidate)?,
        };
        writeln!(csv, "{},{v}", blocks[i - 1].0).unwrap();
        n += 1;
    }
    fs::write(out, csv).map_err(|e| Error::io(out, e))?;
    Ok(format!("rows={n}\n"))
}
