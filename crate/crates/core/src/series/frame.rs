use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A uniformly sampled multivariate series.
///
/// Values are stored row-major (`T x V`). Gap cells hold NaN and are flagged
/// in the mask; unmasked cells are always finite.
#[derive(Debug, Clone)]
pub struct FeatureFrame {
    start_time: i64,
    step: i64,
    variables: Vec<String>,
    values: Vec<f64>,
    gaps: Vec<bool>,
}

// gap cells compare equal regardless of their NaN payload
impl PartialEq for FeatureFrame {
    fn eq(&self, other: &Self) -> bool {
        self.start_time == other.start_time
            && self.step == other.step
            && self.variables == other.variables
            && self.gaps == other.gaps
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.gaps)
                .all(|((a, b), &g)| g || a == b)
    }
}

/// One timestamped input row for [`downsample_rows`].
#[derive(Debug, Clone, PartialEq)]
pub struct TimedRow {
    pub timestamp: i64,
    pub values: Vec<Option<f64>>,
}

impl FeatureFrame {
    /// Build a frame from named columns of optional values (`None` = gap).
    pub fn from_columns(start_time: i64, step: i64, columns: Vec<(String, Vec<Option<f64>>)>) -> Result<Self> {
        if step <= 0 {
            return Err(Error::invalid(format!("frame step must be positive, got {step}")));
        }
        let len = columns.first().map(|(_, c)| c.len()).unwrap_or(0);
        let mut seen = HashSet::new();
        for (name, col) in &columns {
            if !seen.insert(name.as_str()) {
                return Err(Error::invalid(format!("duplicate variable `{name}`")));
            }
            if col.len() != len {
                return Err(Error::invalid(format!(
                    "column `{name}` has {} rows, expected {len}",
                    col.len()
                )));
            }
        }
        let nv = columns.len();
        let mut values = vec![f64::NAN; len * nv];
        let mut gaps = vec![true; len * nv];
        for (v, (name, col)) in columns.iter().enumerate() {
            for (t, cell) in col.iter().enumerate() {
                match cell {
                    Some(x) if x.is_finite() => {
                        values[t * nv + v] = *x;
                        gaps[t * nv + v] = false;
                    }
                    Some(x) => {
                        return Err(Error::invalid(format!("non-finite value {x} in `{name}` row {t}")))
                    }
                    None => {}
                }
            }
        }
        Ok(FeatureFrame {
            start_time,
            step,
            variables: columns.into_iter().map(|(n, _)| n).collect(),
            values,
            gaps,
        })
    }

    /// Build a gap-free frame from dense columns.
    pub fn from_dense(start_time: i64, step: i64, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        Self::from_columns(
            start_time,
            step,
            columns
                .into_iter()
                .map(|(n, c)| (n, c.into_iter().map(Some).collect()))
                .collect(),
        )
    }

    pub fn start_time(&self) -> i64 {
        self.start_time
    }

    pub fn step(&self) -> i64 {
        self.step
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// Number of time steps.
    pub fn len(&self) -> usize {
        if self.variables.is_empty() {
            0
        } else {
            self.values.len() / self.variables.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn time(&self, t: usize) -> i64 {
        self.start_time + t as i64 * self.step
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::invalid(format!("unknown variable `{name}`")))
    }

    pub fn get(&self, t: usize, v: usize) -> Option<f64> {
        let i = t * self.n_vars() + v;
        (!self.gaps[i]).then_some(self.values[i])
    }

    pub fn is_gap(&self, t: usize, v: usize) -> bool {
        self.gaps[t * self.n_vars() + v]
    }

    /// Row `t` as a slice of `V` values (NaN where gapped).
    pub fn row(&self, t: usize) -> &[f64] {
        let nv = self.n_vars();
        &self.values[t * nv..(t + 1) * nv]
    }

    /// Rows `[from, to)` as one contiguous row-major slice.
    pub fn rows(&self, from: usize, to: usize) -> &[f64] {
        let nv = self.n_vars();
        &self.values[from * nv..to * nv]
    }

    pub fn row_complete(&self, t: usize) -> bool {
        let nv = self.n_vars();
        !self.gaps[t * nv..(t + 1) * nv].iter().any(|&g| g)
    }

    pub fn has_gaps(&self) -> bool {
        self.gaps.iter().any(|&g| g)
    }

    pub fn column(&self, v: usize) -> Vec<Option<f64>> {
        (0..self.len()).map(|t| self.get(t, v)).collect()
    }

    /// Column values, failing if the column contains a gap.
    pub fn dense_column(&self, name: &str) -> Result<Vec<f64>> {
        let v = self.var_index(name)?;
        self.column(v)
            .into_iter()
            .enumerate()
            .map(|(t, x)| x.ok_or_else(|| Error::invalid(format!("gap in `{name}` at row {t}"))))
            .collect()
    }

    fn columns_owned(&self) -> Vec<(String, Vec<Option<f64>>)> {
        self.variables
            .iter()
            .enumerate()
            .map(|(v, n)| (n.clone(), self.column(v)))
            .collect()
    }

    /// Frame restricted to the named variables, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let cols = names
            .iter()
            .map(|n| Ok((n.clone(), self.column(self.var_index(n)?))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_columns(self.start_time, self.step, cols)
    }

    /// Rows `[from, to)` as a new frame.
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        if from > to || to > self.len() {
            return Err(Error::invalid(format!(
                "row range {from}..{to} outside frame of {} rows",
                self.len()
            )));
        }
        let nv = self.n_vars();
        Ok(FeatureFrame {
            start_time: self.time(from),
            step: self.step,
            variables: self.variables.clone(),
            values: self.values[from * nv..to * nv].to_vec(),
            gaps: self.gaps[from * nv..to * nv].to_vec(),
        })
    }

    /// Replace (or append, if absent) a column.
    pub fn with_column(&self, name: &str, col: Vec<Option<f64>>) -> Result<Self> {
        let mut cols = self.columns_owned();
        match cols.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = col,
            None => cols.push((name.to_string(), col)),
        }
        Self::from_columns(self.start_time, self.step, cols)
    }

    fn meta_path(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".meta");
        PathBuf::from(s)
    }

    /// Save as headered CSV (`time` column first, gaps as empty fields) plus a
    /// `<path>.meta` key-value sidecar holding `start_time`, `step`,
    /// `variables` and `rows`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut body = String::from("time");
        for v in &self.variables {
            body.push(',');
            body.push_str(v);
        }
        body.push('\n');
        for t in 0..self.len() {
            write!(body, "{}", self.time(t)).unwrap();
            for v in 0..self.n_vars() {
                body.push(',');
                if let Some(x) = self.get(t, v) {
                    write!(body, "{x}").unwrap();
                }
            }
            body.push('\n');
        }
        fs::write(path, body).map_err(|e| Error::io(path, e))?;
        let meta = format!(
            "start_time={}\nstep={}\nvariables={}\nrows={}\n",
            self.start_time,
            self.step,
            self.variables.join(","),
            self.len()
        );
        let mp = Self::meta_path(path);
        fs::write(&mp, meta).map_err(|e| Error::io(&mp, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mp = Self::meta_path(path);
        let meta = fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
        let bad = |line: u64, message: String| Error::Parse {
            path: mp.clone(),
            line,
            message,
        };
        let (mut start, mut step, mut vars, mut rows) = (None, None, None, None);
        for (i, line) in meta.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(i as u64 + 1, format!("expected key=value, got {line:?}")))?;
            let num = |v: &str| v.trim().parse::<i64>().map_err(|_| bad(i as u64 + 1, format!("bad number {v:?}")));
            match k.trim() {
                "start_time" => start = Some(num(v)?),
                "step" => step = Some(num(v)?),
                "rows" => rows = Some(num(v)? as usize),
                "variables" => vars = Some(v.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>()),
                _ => {}
            }
        }
        let missing = |k: &str| bad(0, format!("missing key `{k}`"));
        let start = start.ok_or_else(|| missing("start_time"))?;
        let step = step.ok_or_else(|| missing("step"))?;
        let vars = vars.ok_or_else(|| missing("variables"))?;

        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        let expected: Vec<&str> = std::iter::once("time").chain(vars.iter().map(String::as_str)).collect();
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "header does not match sidecar variable list".into(),
            });
        }
        let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); vars.len()];
        for (t, rec) in rdr.records().enumerate() {
            let line = t as u64 + 2;
            let rec = rec.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.to_string(),
            })?;
            let perr = |m: String| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: m,
            };
            let time: i64 = rec[0].parse().map_err(|_| perr(format!("bad time {:?}", &rec[0])))?;
            if time != start + t as i64 * step {
                return Err(perr(format!("time {time} off the {step}s grid")));
            }
            for (v, col) in cols.iter_mut().enumerate() {
                let raw = &rec[v + 1];
                col.push(if raw.is_empty() {
                    None
                } else {
                    Some(raw.parse().map_err(|_| perr(format!("bad value {raw:?}")))?)
                });
            }
        }
        if let Some(r) = rows {
            if cols.first().map(|c| c.len()).unwrap_or(0) != r {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: format!("sidecar declares {r} rows"),
                });
            }
        }
        Self::from_columns(start, step, vars.into_iter().zip(cols).collect())
    }
}

/// Mean-downsample timestamped rows into buckets `[t, t + window)` aligned to
/// multiples of `window`. Buckets without any value for a variable are gaps.
pub fn downsample_rows(variables: &[String], rows: &[TimedRow], window: i64) -> Result<FeatureFrame> {
    if window <= 0 {
        return Err(Error::invalid("window must be positive"));
    }
    let (first, last) = match (rows.iter().map(|r| r.timestamp).min(), rows.iter().map(|r| r.timestamp).max()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::invalid("cannot downsample an empty input")),
    };
    let start = first.div_euclid(window) * window;
    let buckets = ((last - start) / window + 1) as usize;
    let nv = variables.len();
    let mut sums = vec![0.0; buckets * nv];
    let mut counts = vec![0usize; buckets * nv];
    for r in rows {
        if r.values.len() != nv {
            return Err(Error::invalid(format!(
                "row at {} has {} values, expected {nv}",
                r.timestamp,
                r.values.len()
            )));
        }
        let b = ((r.timestamp - start) / window) as usize;
        for (v, x) in r.values.iter().enumerate() {
            if let Some(x) = x {
                sums[b * nv + v] += x;
                counts[b * nv + v] += 1;
            }
        }
    }
    let cols = (0..nv)
        .map(|v| {
            let col = (0..buckets)
                .map(|b| {
                    let c = counts[b * nv + v];
                    (c > 0).then(|| sums[b * nv + v] / c as f64)
                })
                .collect();
            (variables[v].clone(), col)
        })
        .collect();
    FeatureFrame::from_columns(start, window, cols)
}

/// Mean-downsample a frame to a coarser step. `window` must be a positive
/// multiple of the frame's step.
pub fn downsample_frame(frame: &FeatureFrame, window: i64) -> Result<FeatureFrame> {
    if frame.is_empty() {
        return Err(Error::invalid("cannot downsample an empty frame"));
    }
    if window <= 0 || window % frame.step() != 0 {
        return Err(Error::invalid(format!(
            "window {window} is not a positive multiple of step {}",
            frame.step()
        )));
    }
    let rows: Vec<TimedRow> = (0..frame.len())
        .map(|t| TimedRow {
            timestamp: frame.time(t),
            values: (0..frame.n_vars()).map(|v| frame.get(t, v)).collect(),
        })
        .collect();
    downsample_rows(frame.variables(), &rows, window)
}
