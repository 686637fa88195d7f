use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::MetricReport;

/// Column order of every metrics table.
pub const TABLE_HEADER: [&str; 5] = ["Variable", "RMSE", "MAE", "MAPE", "R2"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookaheadReport {
    pub per_lookahead: Vec<MetricReport>,
    /// Mean over lookaheads 1..=5; absent for shorter horizons.
    pub avg_first5: Option<MetricReport>,
    pub avg_all: MetricReport,
}

/// Arithmetic mean of each metric. R^2 is absent if any input lacks it.
pub fn mean_report(rows: &[MetricReport]) -> MetricReport {
    let n = rows.len() as f64;
    let r2: Option<Vec<f64>> = rows.iter().map(|r| r.r2).collect();
    MetricReport {
        rmse: rows.iter().map(|r| r.rmse).sum::<f64>() / n,
        mae: rows.iter().map(|r| r.mae).sum::<f64>() / n,
        mape: rows.iter().map(|r| r.mape).sum::<f64>() / n,
        r2: r2.map(|v| v.iter().sum::<f64>() / n),
    }
}

impl LookaheadReport {
    pub fn from_lookaheads(per_lookahead: Vec<MetricReport>) -> Result<Self> {
        if per_lookahead.is_empty() {
            return Err(Error::invalid("report needs at least one lookahead"));
        }
        Ok(LookaheadReport {
            avg_first5: (per_lookahead.len() >= 5).then(|| mean_report(&per_lookahead[..5])),
            avg_all: mean_report(&per_lookahead),
            per_lookahead,
        })
    }

    pub fn horizon(&self) -> usize {
        self.per_lookahead.len()
    }

    /// Average reports of several spans lookahead by lookahead.
    pub fn average(reports: &[LookaheadReport]) -> Result<Self> {
        let h = reports.first().ok_or_else(|| Error::invalid("no reports to average"))?.horizon();
        if reports.iter().any(|r| r.horizon() != h) {
            return Err(Error::invalid("reports have different horizons"));
        }
        let per = (0..h)
            .map(|k| mean_report(&reports.iter().map(|r| r.per_lookahead[k]).collect::<Vec<_>>()))
            .collect();
        Self::from_lookaheads(per)
    }

    /// Table with one row per lookahead (`<label> +<minutes>min`) and the
    /// averages.
    pub fn to_table(&self, label: &str, step_minutes: i64) -> String {
        let mut out = table_header();
        for (k, m) in self.per_lookahead.iter().enumerate() {
            out.push_str(&table_row(&format!("{label} +{}min", (k as i64 + 1) * step_minutes), m));
        }
        if let Some(m) = &self.avg_first5 {
            out.push_str(&table_row(&format!("{label} avg5"), m));
        }
        out.push_str(&table_row(&format!("{label} avg{}", self.horizon()), &self.avg_all));
        out
    }
}

pub fn table_header() -> String {
    format!("{}\n", TABLE_HEADER.join(","))
}

pub fn table_row(label: &str, m: &MetricReport) -> String {
    let mut s = String::new();
    let r2 = m.r2.map(|v| v.to_string()).unwrap_or_default();
    writeln!(s, "{label},{},{},{},{r2}", m.rmse, m.mae, m.mape).unwrap();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(x: f64) -> MetricReport {
        MetricReport {
            rmse: x,
            mae: x / 2.0,
            mape: x / 100.0,
            r2: Some(1.0 - x / 10.0),
        }
    }

    #[test]
    fn averages_are_means() {
        let r = LookaheadReport::from_lookaheads((1..=10).map(|k| m(k as f64)).collect()).unwrap();
        assert!((r.avg_first5.unwrap().rmse - 3.0).abs() < 1e-12);
        assert!((r.avg_all.rmse - 5.5).abs() < 1e-12);
        assert!((r.avg_all.r2.unwrap() - 0.45).abs() < 1e-12);
        let short = LookaheadReport::from_lookaheads(vec![m(1.0)]).unwrap();
        assert!(short.avg_first5.is_none());
        assert_eq!(short.avg_all, m(1.0));
    }

    #[test]
    fn missing_r2_propagates() {
        let mut a = m(1.0);
        a.r2 = None;
        assert_eq!(mean_report(&[a, m(2.0)]).r2, None);
    }

    #[test]
    fn span_average() {
        let a = LookaheadReport::from_lookaheads(vec![m(1.0), m(3.0)]).unwrap();
        let b = LookaheadReport::from_lookaheads(vec![m(3.0), m(5.0)]).unwrap();
        let avg = LookaheadReport::average(&[a, b]).unwrap();
        assert_eq!(avg.per_lookahead, vec![m(2.0), m(4.0)]);
        assert_eq!(avg.avg_all, m(3.0));
    }

    #[test]
    fn table_column_order() {
        let r = LookaheadReport::from_lookaheads(vec![m(1.0)]).unwrap();
        let t = r.to_table("Hybrid", 5);
        let mut lines = t.lines();
        assert_eq!(lines.next(), Some("Variable,RMSE,MAE,MAPE,R2"));
        assert_eq!(lines.next(), Some("Hybrid +5min,1,0.5,0.01,0.9"));
        assert_eq!(lines.next(), Some("Hybrid avg1,1,0.5,0.01,0.9"));
    }
}
