//! File-based ingestion of exported chain and exchange data.
//!
//! Three inputs are understood, all headered comma-separated text:
//!
//! * transactions: `block_number,timestamp,gas_price_gwei,is_contract`
//! * blocks: `block_number,timestamp,base_fee_gwei,gas_used,size_gas,size_bytes`
//! * ticks: `open_time_ms,open`
//!
//! Extra columns are ignored. Transactions are aggregated per block into
//! [`BlockFeatureRow`]s, which are written in a fixed column order (see
//! [`write_block_features`]). Absent values are empty fields.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::percentile_sorted;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransactionRecord {
    pub block_number: u64,
    pub timestamp: i64,
    /// Gas price in gwei.
    pub gas_price: f64,
    /// Contract deployment / call rather than a plain transfer.
    pub is_contract: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub block_number: u64,
    pub timestamp: i64,
    pub base_fee: Option<f64>,
    pub gas_used: Option<u64>,
    pub size_gas: Option<u64>,
    pub size_bytes: Option<u64>,
}

/// Per-block aggregate. Gas-price fields are `None` for blocks without
/// transactions; the percentile values line up with
/// [`BlockFeatures::percentiles`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFeatureRow {
    pub block_number: u64,
    pub timestamp: i64,
    pub min_gas_price: Option<f64>,
    pub max_gas_price: Option<f64>,
    pub avg_gas_price: Option<f64>,
    pub pct_gas_price: Vec<Option<f64>>,
    pub tx_count: u64,
    pub contract_count: u64,
    pub base_fee: Option<f64>,
    pub gas_used: Option<u64>,
    pub size_gas: Option<u64>,
    pub size_bytes: Option<u64>,
}

/// A table of block features sharing one percentile rank list.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockFeatures {
    pub percentiles: Vec<f64>,
    pub rows: Vec<BlockFeatureRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    /// Minute-aligned seconds since the epoch.
    pub timestamp: i64,
    /// USDT per ETH.
    pub open_price: f64,
}

/// A rejected input row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowReject {
    pub line: u64,
    pub reason: String,
}

/// Records accepted from a file plus the rows that were rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub rejects: Vec<RowReject>,
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

fn column_index(path: &Path, headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn {
            path: path.to_path_buf(),
            column: name.to_string(),
        })
}

fn columns<const N: usize>(path: &Path, rdr: &mut csv::Reader<File>, names: [&str; N]) -> Result<[usize; N]> {
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let mut out = [0; N];
    for (slot, name) in out.iter_mut().zip(names) {
        *slot = column_index(path, &headers, name)?;
    }
    Ok(out)
}

fn field<'r>(rec: &'r csv::StringRecord, idx: usize, name: &str) -> std::result::Result<&'r str, String> {
    rec.get(idx).ok_or_else(|| format!("missing field `{name}`"))
}

fn parse_num<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, name: &str) -> std::result::Result<T, String> {
    let raw = field(rec, idx, name)?;
    raw.parse::<T>()
        .map_err(|_| format!("unparseable `{name}` value {raw:?}"))
}

fn parse_opt<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, name: &str) -> std::result::Result<Option<T>, String> {
    let raw = field(rec, idx, name)?;
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<T>()
        .map(Some)
        .map_err(|_| format!("unparseable `{name}` value {raw:?}"))
}

fn parse_bool(raw: &str) -> std::result::Result<bool, String> {
    match raw.to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" => Ok(true),
        "0" | "false" | "f" | "no" => Ok(false),
        _ => Err(format!("unparseable `is_contract` value {raw:?}")),
    }
}

fn line_of(rec: &csv::StringRecord, fallback: u64) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(fallback)
}

/// Parse a transactions export. Rows that fail to parse or violate record
/// invariants are rejected with their line number; the rest are returned
/// sorted by block number, keeping file order within a block.
pub fn parse_transactions(path: &Path) -> Result<Parsed<TransactionRecord>> {
    let mut rdr = open_reader(path)?;
    let [c_block, c_ts, c_price, c_contract] = columns(
        path,
        &mut rdr,
        ["block_number", "timestamp", "gas_price_gwei", "is_contract"],
    )?;
    let mut records = Vec::new();
    let mut rejects = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let fallback = i as u64 + 2;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(fallback);
                rejects.push(RowReject { line, reason: e.to_string() });
                continue;
            }
        };
        let line = line_of(&rec, fallback);
        let parsed = (|| {
            let tx = TransactionRecord {
                block_number: parse_num(&rec, c_block, "block_number")?,
                timestamp: parse_num(&rec, c_ts, "timestamp")?,
                gas_price: parse_num(&rec, c_price, "gas_price_gwei")?,
                is_contract: parse_bool(field(&rec, c_contract, "is_contract")?)?,
            };
            if !(tx.gas_price >= 0.0) || !tx.gas_price.is_finite() {
                return Err(format!("gas price {} must be finite and non-negative", tx.gas_price));
            }
            Ok(tx)
        })();
        match parsed {
            Ok(tx) => records.push(tx),
            Err(reason) => rejects.push(RowReject { line, reason }),
        }
    }
    records.sort_by_key(|t| t.block_number);
    if !rejects.is_empty() {
        log::warn!("{}: rejected {} transaction rows", path.display(), rejects.len());
    }
    Ok(Parsed { records, rejects })
}

/// Parse a blocks export. Blocks are returned in block-number order; a
/// timestamp that does not increase with block number is an error.
pub fn parse_blocks(path: &Path) -> Result<Parsed<BlockRecord>> {
    let mut rdr = open_reader(path)?;
    let [c_block, c_ts, c_fee, c_used, c_size, c_bytes] = columns(
        path,
        &mut rdr,
        ["block_number", "timestamp", "base_fee_gwei", "gas_used", "size_gas", "size_bytes"],
    )?;
    let mut records: Vec<(u64, BlockRecord)> = Vec::new();
    let mut rejects = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let fallback = i as u64 + 2;
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(fallback);
                rejects.push(RowReject { line, reason: e.to_string() });
                continue;
            }
        };
        let line = line_of(&rec, fallback);
        let parsed = (|| {
            let b = BlockRecord {
                block_number: parse_num(&rec, c_block, "block_number")?,
                timestamp: parse_num(&rec, c_ts, "timestamp")?,
                base_fee: parse_opt(&rec, c_fee, "base_fee_gwei")?,
                gas_used: parse_opt(&rec, c_used, "gas_used")?,
                size_gas: parse_opt(&rec, c_size, "size_gas")?,
                size_bytes: parse_opt(&rec, c_bytes, "size_bytes")?,
            };
            if let (Some(used), Some(size)) = (b.gas_used, b.size_gas) {
                if used > size {
                    return Err(format!("gas_used {used} exceeds size_gas {size}"));
                }
            }
            if matches!(b.base_fee, Some(f) if !(f >= 0.0)) {
                return Err("base fee must be non-negative".to_string());
            }
            Ok(b)
        })();
        match parsed {
            Ok(b) => records.push((line, b)),
            Err(reason) => rejects.push(RowReject { line, reason }),
        }
    }
    records.sort_by_key(|(_, b)| b.block_number);
    for w in records.windows(2) {
        let (_, a) = &w[0];
        let (line, b) = &w[1];
        if b.block_number == a.block_number {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                message: format!("duplicate block {}", b.block_number),
            });
        }
        if b.timestamp <= a.timestamp {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: *line,
                message: format!(
                    "block {} timestamp {} not after block {} timestamp {}",
                    b.block_number, b.timestamp, a.block_number, a.timestamp
                ),
            });
        }
    }
    Ok(Parsed {
        records: records.into_iter().map(|(_, b)| b).collect(),
        rejects,
    })
}

/// Parse minute ticks (`open_time_ms`, `open`). Timestamps must be
/// minute-aligned and strictly increasing.
pub fn parse_ticks(path: &Path) -> Result<Vec<TickRecord>> {
    let mut rdr = open_reader(path)?;
    let [c_time, c_open] = columns(path, &mut rdr, ["open_time_ms", "open"])?;
    let mut out: Vec<TickRecord> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let fallback = i as u64 + 2;
        let err = |line: u64, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let rec = rec.map_err(|e| err(e.position().map(|p| p.line()).unwrap_or(fallback), e.to_string()))?;
        let line = line_of(&rec, fallback);
        let ms: i64 = parse_num(&rec, c_time, "open_time_ms").map_err(|m| err(line, m))?;
        let open: f64 = parse_num(&rec, c_open, "open").map_err(|m| err(line, m))?;
        if ms % 60_000 != 0 {
            return Err(err(line, format!("open time {ms} is not minute-aligned")));
        }
        if !(open > 0.0) || !open.is_finite() {
            return Err(err(line, format!("open price {open} must be positive")));
        }
        let timestamp = ms / 1000;
        if let Some(prev) = out.last() {
            if timestamp <= prev.timestamp {
                return Err(err(
                    line,
                    format!("timestamp {timestamp} does not follow {}", prev.timestamp),
                ));
            }
        }
        out.push(TickRecord { timestamp, open_price: open });
    }
    Ok(out)
}

/// Group transactions by block and compute per-block gas-price statistics.
///
/// Every block yields a row; blocks without transactions carry absent
/// gas-price fields. Percentiles use linear interpolation between order
/// statistics.
pub fn aggregate_block_features(
    txs: &[TransactionRecord],
    blocks: &[BlockRecord],
    percentiles: &[f64],
) -> Result<BlockFeatures> {
    if let Some(r) = percentiles.iter().find(|&&r| !(r > 0.0 && r < 100.0)) {
        return Err(Error::invalid(format!("percentile rank {r} outside (0, 100)")));
    }
    let index: HashMap<u64, usize> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| (b.block_number, i))
        .collect();
    let mut grouped: Vec<Vec<&TransactionRecord>> = vec![Vec::new(); blocks.len()];
    for tx in txs {
        let slot = index.get(&tx.block_number).ok_or_else(|| {
            Error::invalid(format!("transaction references unknown block {}", tx.block_number))
        })?;
        grouped[*slot].push(tx);
    }

    let rows = blocks
        .iter()
        .zip(&grouped)
        .map(|(block, group)| {
            let mut prices: Vec<f64> = group.iter().map(|t| t.gas_price).collect();
            prices.sort_by(f64::total_cmp);
            let present = !prices.is_empty();
            let stat = |f: &dyn Fn(&[f64]) -> f64| present.then(|| f(&prices));
            BlockFeatureRow {
                block_number: block.block_number,
                timestamp: block.timestamp,
                min_gas_price: stat(&|p| p[0]),
                max_gas_price: stat(&|p| p[p.len() - 1]),
                // summed in sorted order so the result is permutation invariant
                avg_gas_price: stat(&|p| p.iter().sum::<f64>() / p.len() as f64),
                pct_gas_price: percentiles
                    .iter()
                    .map(|&r| stat(&|p| percentile_sorted(p, r)))
                    .collect(),
                tx_count: group.len() as u64,
                contract_count: group.iter().filter(|t| t.is_contract).count() as u64,
                base_fee: block.base_fee,
                gas_used: block.gas_used,
                size_gas: block.size_gas,
                size_bytes: block.size_bytes,
            }
        })
        .collect();
    Ok(BlockFeatures {
        percentiles: percentiles.to_vec(),
        rows,
    })
}

/// Column name for a percentile rank, e.g. `pct5` or `pct2.5`.
pub fn percentile_column(rank: f64) -> String {
    format!("pct{rank}")
}

/// Canonical column order of the block-features file.
pub fn block_feature_columns(percentiles: &[f64]) -> Vec<String> {
    let mut cols: Vec<String> = [
        "block_number",
        "timestamp",
        "min_gas_price",
        "max_gas_price",
        "avg_gas_price",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    cols.extend(percentiles.iter().map(|&r| percentile_column(r)));
    cols.extend(
        [
            "tx_count",
            "contract_count",
            "base_fee",
            "gas_used",
            "size_gas",
            "size_bytes",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    cols
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_block_features(path: &Path, table: &BlockFeatures) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let map_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    w.write_record(block_feature_columns(&table.percentiles)).map_err(map_err)?;
    for r in &table.rows {
        let mut rec = vec![
            r.block_number.to_string(),
            r.timestamp.to_string(),
            opt(r.min_gas_price),
            opt(r.max_gas_price),
            opt(r.avg_gas_price),
        ];
        rec.extend(r.pct_gas_price.iter().map(|p| opt(*p)));
        rec.extend([
            r.tx_count.to_string(),
            r.contract_count.to_string(),
            opt(r.base_fee),
            opt(r.gas_used),
            opt(r.size_gas),
            opt(r.size_bytes),
        ]);
        w.write_record(&rec).map_err(map_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Read a block-features file written by [`write_block_features`].
pub fn read_block_features(path: &Path) -> Result<BlockFeatures> {
    let mut rdr = open_reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let percentiles: Vec<f64> = headers
        .iter()
        .filter_map(|h| h.strip_prefix("pct"))
        .map(|r| {
            r.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("bad percentile column pct{r}"),
            })
        })
        .collect::<Result<_>>()?;
    let expected = block_feature_columns(&percentiles);
    let idx: Vec<usize> = expected
        .iter()
        .map(|c| column_index(path, &headers, c))
        .collect::<Result<_>>()?;
    let np = percentiles.len();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let fallback = i as u64 + 2;
        let rec = rec.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.position().map(|p| p.line()).unwrap_or(fallback),
            message: e.to_string(),
        })?;
        let line = line_of(&rec, fallback);
        let row = (|| {
            let pct = (0..np)
                .map(|k| parse_opt::<f64>(&rec, idx[5 + k], &expected[5 + k]))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            Ok::<_, String>(BlockFeatureRow {
                block_number: parse_num(&rec, idx[0], "block_number")?,
                timestamp: parse_num(&rec, idx[1], "timestamp")?,
                min_gas_price: parse_opt(&rec, idx[2], "min_gas_price")?,
                max_gas_price: parse_opt(&rec, idx[3], "max_gas_price")?,
                avg_gas_price: parse_opt(&rec, idx[4], "avg_gas_price")?,
                pct_gas_price: pct,
                tx_count: parse_num(&rec, idx[5 + np], "tx_count")?,
                contract_count: parse_num(&rec, idx[6 + np], "contract_count")?,
                base_fee: parse_opt(&rec, idx[7 + np], "base_fee")?,
                gas_used: parse_opt(&rec, idx[8 + np], "gas_used")?,
                size_gas: parse_opt(&rec, idx[9 + np], "size_gas")?,
                size_bytes: parse_opt(&rec, idx[10 + np], "size_bytes")?,
            })
        })()
        .map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        })?;
        rows.push(row);
    }
    Ok(BlockFeatures { percentiles, rows })
}

/// Write ticks back out in the exchange export layout.
pub fn write_ticks(path: &Path, ticks: &[TickRecord]) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut s = String::from("open_time_ms,open\n");
    for t in ticks {
        s.push_str(&format!("{},{}\n", t.timestamp * 1000, t.open_price));
    }
    f.write_all(s.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    fn block(n: u64, ts: i64) -> BlockRecord {
        BlockRecord {
            block_number: n,
            timestamp: ts,
            base_fee: Some(1.0),
            gas_used: Some(10),
            size_gas: Some(20),
            size_bytes: Some(100),
        }
    }

    fn tx(n: u64, price: f64, contract: bool) -> TransactionRecord {
        TransactionRecord {
            block_number: n,
            timestamp: 0,
            gas_price: price,
            is_contract: contract,
        }
    }

    #[test]
    fn three_well_formed_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            &dir,
            "tx.csv",
            "block_number,timestamp,gas_price_gwei,is_contract\n2,20,5.5,true\n1,10,3,false\n1,10,4,1\n",
        );
        let parsed = parse_transactions(&p).unwrap();
        assert_eq!(parsed.records.len(), 3);
        assert!(parsed.rejects.is_empty());
        // sorted by block, file order kept within block
        assert_eq!(parsed.records[0].gas_price, 3.0);
        assert_eq!(parsed.records[1].gas_price, 4.0);
        assert_eq!(parsed.records[2].block_number, 2);
    }

    #[test]
    fn negative_price_rejected_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            &dir,
            "tx.csv",
            "block_number,timestamp,gas_price_gwei,is_contract\n1,10,3,false\n1,10,-4,false\n1,10,abc,false\n",
        );
        let parsed = parse_transactions(&p).unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.rejects.len(), 2);
        assert_eq!(parsed.rejects[0].line, 3);
        assert_eq!(parsed.rejects[1].line, 4);
    }

    #[test]
    fn missing_file_and_column() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            parse_transactions(&dir.path().join("nope.csv")),
            Err(Error::Io { .. })
        ));
        let p = write_tmp(&dir, "tx.csv", "block_number,timestamp,is_contract\n1,2,true\n");
        match parse_transactions(&p) {
            Err(Error::MissingColumn { column, .. }) => assert_eq!(column, "gas_price_gwei"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn aggregate_three_point_block() {
        let blocks = vec![block(1, 10)];
        let txs = vec![tx(1, 10.0, false), tx(1, 30.0, true), tx(1, 20.0, false)];
        let f = aggregate_block_features(&txs, &blocks, &[50.0]).unwrap();
        let r = &f.rows[0];
        assert_eq!(r.min_gas_price, Some(10.0));
        assert_eq!(r.max_gas_price, Some(30.0));
        assert_eq!(r.avg_gas_price, Some(20.0));
        assert_eq!(r.pct_gas_price, vec![Some(20.0)]);
        assert_eq!(r.tx_count, 3);
        assert_eq!(r.contract_count, 1);
    }

    #[test]
    fn aggregate_single_tx() {
        let f = aggregate_block_features(&[tx(1, 7.0, false)], &[block(1, 10)], &[5.0, 95.0]).unwrap();
        let r = &f.rows[0];
        for v in [r.min_gas_price, r.max_gas_price, r.avg_gas_price, r.pct_gas_price[0], r.pct_gas_price[1]] {
            assert_eq!(v, Some(7.0));
        }
    }

    #[test]
    fn aggregate_one_to_hundred_pct5() {
        // rank position 0.05 * 99 = 4.95 -> 5 + 0.95 * (6 - 5)
        let txs: Vec<_> = (1..=100).map(|p| tx(1, p as f64, false)).collect();
        let f = aggregate_block_features(&txs, &[block(1, 10)], &[5.0]).unwrap();
        assert!((f.rows[0].pct_gas_price[0].unwrap() - 5.95).abs() < 1e-12);
    }

    #[test]
    fn empty_block_is_a_gap() {
        let f = aggregate_block_features(&[tx(2, 5.0, false)], &[block(1, 10), block(2, 22)], &[5.0]).unwrap();
        assert_eq!(f.rows.len(), 2);
        assert_eq!(f.rows[0].tx_count, 0);
        assert_eq!(f.rows[0].min_gas_price, None);
        assert_eq!(f.rows[0].pct_gas_price, vec![None]);
        assert_eq!(f.rows[0].base_fee, Some(1.0));
    }

    #[test]
    fn aggregate_rejects_unknown_block_and_bad_rank() {
        assert!(aggregate_block_features(&[tx(9, 1.0, false)], &[block(1, 1)], &[5.0]).is_err());
        assert!(aggregate_block_features(&[], &[block(1, 1)], &[100.0]).is_err());
        assert!(aggregate_block_features(&[], &[block(1, 1)], &[0.0]).is_err());
    }

    #[test]
    fn ticks_parse_and_reject_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = String::from("open_time_ms,open\n");
        for i in 0..60 {
            body.push_str(&format!("{},{}\n", 1_640_000_040_000i64 + i * 60_000, 3000.0 + i as f64));
        }
        let p = write_tmp(&dir, "ticks.csv", &body);
        let ticks = parse_ticks(&p).unwrap();
        assert_eq!(ticks.len(), 60);
        assert_eq!(ticks[59].timestamp - ticks[0].timestamp, 59 * 60);

        let p = write_tmp(
            &dir,
            "dup.csv",
            "open_time_ms,open\n1640000040000,1\n1640000100000,2\n1640000100000,3\n",
        );
        match parse_ticks(&p) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn blocks_reject_oversized_gas_and_nonmonotone_time() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_tmp(
            &dir,
            "blocks.csv",
            "block_number,timestamp,base_fee_gwei,gas_used,size_gas,size_bytes\n1,10,1.5,30,20,100\n2,24,,10,20,\n",
        );
        let parsed = parse_blocks(&p).unwrap();
        assert_eq!(parsed.rejects.len(), 1);
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.records[0].base_fee, None);

        let p = write_tmp(
            &dir,
            "blocks2.csv",
            "block_number,timestamp,base_fee_gwei,gas_used,size_gas,size_bytes\n1,30,1,1,2,3\n2,24,1,1,2,3\n",
        );
        assert!(matches!(parse_blocks(&p), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn features_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let txs = vec![tx(1, 1.25, true), tx(1, 3.5, false), tx(3, 0.1, false)];
        let blocks = vec![block(1, 10), block(2, 20), block(3, 33)];
        let table = aggregate_block_features(&txs, &blocks, &[5.0, 2.5, 95.0]).unwrap();
        let p = dir.path().join("features.csv");
        write_block_features(&p, &table).unwrap();
        let back = read_block_features(&p).unwrap();
        assert_eq!(back, table);
        let header = std::fs::read_to_string(&p).unwrap();
        assert!(header.starts_with(
            "block_number,timestamp,min_gas_price,max_gas_price,avg_gas_price,pct5,pct2.5,pct95,tx_count"
        ));
    }
}
