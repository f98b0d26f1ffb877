//! Class schemes, metrics, cross-validation and sweeps.

mod cv;
mod metrics;
mod scheme;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cv::{
    cross_validate, evaluate_split, fit_pipeline, out_of_fold_probabilities, selection_scores, shuffled_folds,
    stacked_cross_validate, stratified_folds, CvConfig, CvReport, Dataset, FittedPipeline, StackConfig, StackReport,
    TargetData,
};
pub use metrics::{
    classification_report, regression_report, Averages, ClassMetrics, ClassificationReport, MetricsReport,
    RegressionReport,
};
pub use scheme::{map_likert, ClassScheme};
pub use sweep::{padding_sweep, sweep_plot_data, sweep_table, tag_dataset, SweepRow};

use crate::learn::{LearnError, LearnerSpec};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("rating {0} is outside 1..=5")]
    InvalidRating(i64),
    #[error("unknown class scheme {0:?} (expected two_class, three_class or five_class)")]
    UnknownScheme(String),
    #[error("nothing to evaluate")]
    EmptyEval,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("class {class:?} has {count} members but {folds} folds were requested; use at most {count} folds or merge rare classes")]
    Stratification { class: String, count: usize, folds: usize },
    #[error("empty padding grid")]
    EmptyGrid,
    #[error("{0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Learn(#[from] LearnError),
}

/// One machine-readable line per evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub protocol: String,
    pub seed: u64,
    pub scheme: String,
    pub learner: LearnerSpec,
    pub selection: String,
    pub metrics: MetricsReport,
}

impl RunRecord {
    pub fn to_json_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("run records serialize");
        s.push('\n');
        s
    }
}
