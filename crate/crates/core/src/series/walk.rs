use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One walk-forward window over frame rows. `train` and `validation` split
/// the window 70:30 chronologically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkWindow {
    pub rows: Range<usize>,
    pub train: Range<usize>,
    pub validation: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkForwardPlan {
    pub span: usize,
    pub stride: usize,
    pub windows: Vec<WalkWindow>,
}

/// Windows of `span` rows advancing by `stride` until the frame end.
pub fn walk_forward(total_rows: usize, span: usize, stride: usize) -> Result<WalkForwardPlan> {
    if span == 0 || stride == 0 {
        return Err(Error::invalid("span and stride must be positive"));
    }
    if span > total_rows {
        return Err(Error::invalid(format!(
            "training span {span} exceeds frame length {total_rows}"
        )));
    }
    let count = (total_rows - span) / stride + 1;
    let cut = span * 7 / 10;
    let windows = (0..count)
        .map(|k| {
            let start = k * stride;
            WalkWindow {
                rows: start..start + span,
                train: start..start + cut,
                validation: start + cut..start + span,
            }
        })
        .collect();
    Ok(WalkForwardPlan { span, stride, windows })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DAY: usize = 288;

    #[test]
    fn forty_days_thirty_day_span() {
        let plan = walk_forward(40 * DAY, 30 * DAY, DAY).unwrap();
        assert_eq!(plan.windows.len(), 11);
        for w in plan.windows.windows(2) {
            assert_eq!(w[1].rows.start - w[0].rows.start, DAY);
        }
        for w in &plan.windows {
            assert!(w.train.end <= w.validation.start);
            assert_eq!(w.validation.end, w.rows.end);
        }
        assert_eq!(plan.windows.last().unwrap().rows.end, 40 * DAY);
    }

    #[test]
    fn degenerate_plans() {
        assert_eq!(walk_forward(100, 30, 100).unwrap().windows.len(), 1);
        assert_eq!(walk_forward(100, 100, 1).unwrap().windows.len(), 1);
        assert!(walk_forward(100, 101, 1).is_err());
    }
}
