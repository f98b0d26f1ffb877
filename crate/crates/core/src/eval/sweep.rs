//! Tag-window padding sweep.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, CvConfig, Dataset, TargetData};
use super::metrics::MetricsReport;
use super::EvalError;
use crate::html2seq::{count_schema, encode_window, window_to_counts, TagVocab};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub pad: usize,
    pub weighted_f1: f64,
    pub macro_f1: f64,
}

/// Bag-of-tags dataset for one window length.
pub fn tag_dataset<S: AsRef<str>>(
    streams: &[Vec<S>],
    vocab: &TagVocab,
    pad: usize,
    target: &TargetData,
) -> Result<Dataset, EvalError> {
    let x = streams
        .iter()
        .map(|s| window_to_counts(&encode_window(s, vocab, pad), vocab))
        .collect();
    Dataset::new(count_schema(vocab), x, target.clone())
}

/// Cross-validates the tag-count classifier at each window length. The
/// vocabulary is built once over all streams and shared by every pad.
/// Rows come back sorted by pad.
pub fn padding_sweep<S: AsRef<str> + Sync>(
    streams: &[Vec<S>],
    target: &TargetData,
    cfg: &CvConfig,
    grid: &[usize],
) -> Result<Vec<SweepRow>, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::EmptyGrid);
    }
    if !matches!(target, TargetData::Classes { .. }) {
        return Err(EvalError::InvalidParameter("padding sweep needs class targets".into()));
    }
    let vocab = TagVocab::build(streams).map_err(|e| EvalError::InvalidParameter(e.to_string()))?;
    let mut pads = grid.to_vec();
    pads.sort_unstable();
    pads.par_iter()
        .map(|&pad| {
            let ds = tag_dataset(streams, &vocab, pad, target)?;
            let report = cross_validate(&ds, cfg)?;
            let MetricsReport::Classification(c) = report.metrics else {
                unreachable!("class targets give a classification report");
            };
            Ok(SweepRow {
                pad,
                weighted_f1: c.weighted.f1,
                macro_f1: c.macro_avg.f1,
            })
        })
        .collect()
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut s = format!("{:>8} {:>11} {:>9}\n", "pad", "weighted_f1", "macro_f1");
    for r in rows {
        let _ = writeln!(s, "{:>8} {:>11.4} {:>9.4}", r.pad, r.weighted_f1, r.macro_f1);
    }
    s
}

/// Two-column `pad weighted_f1` text for plotting tools.
pub fn sweep_plot_data(rows: &[SweepRow]) -> String {
    let mut s = String::from("# pad weighted_f1\n");
    for r in rows {
        let _ = writeln!(s, "{} {:.6}", r.pad, r.weighted_f1);
    }
    s
}
