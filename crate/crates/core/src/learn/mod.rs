//! Learners, feature selection, stacking and model artifacts.

pub mod adaboost;
mod artifact;
pub mod codec;
pub mod gbdt;
pub mod linear;
pub mod nb;
pub mod select;
mod stack;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use adaboost::{train_adaboost, AdaBoost, Stump};
pub use artifact::{predict, schema_fingerprint, ModelArtifact, TagStack, TaskKind, ARTIFACT_FORMAT};
pub use gbdt::{train_gradient_boosting, GbParams, GradientBoosting, Loss};
pub use linear::{train_linear_svr, train_ridge, LinearModel, SvrParams};
pub use nb::{train_multinomial_nb, MultinomialNb};
pub use select::{anova_f_scores, apply_mask, mask_from_scores, regression_f_scores, Selection};
pub use stack::{stack_features, TagProbabilities};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("no training rows")]
    Empty,
    #[error("row {row} has {found} features, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("{rows} rows but {targets} targets")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("training labels contain fewer than two classes")]
    DegenerateLabels,
    #[error("multinomial features must be non-negative")]
    NegativeFeature,
    #[error("class id {0} outside the class order")]
    UnknownClass(usize),
    #[error("learner requires binary labels")]
    NotBinary,
    #[error("no feature columns")]
    NoFeatures,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("learner {learner} does not support {task}")]
    UnsupportedTask { learner: &'static str, task: &'static str },
    #[error("schema fingerprint mismatch: model expects {expected}, input has {found}")]
    Schema { expected: String, found: String },
    #[error("tag probabilities were trained on evaluation fold {fold}")]
    Leakage { fold: usize },
    #[error("artifact format: {0}")]
    Format(String),
}

pub(crate) fn check_rows(x: &[Vec<f64>], targets: usize) -> Result<(), LearnError> {
    if x.is_empty() {
        return Err(LearnError::Empty);
    }
    if x.len() != targets {
        return Err(LearnError::LengthMismatch {
            rows: x.len(),
            targets,
        });
    }
    let d = x[0].len();
    if let Some((row, r)) = x.iter().enumerate().find(|(_, r)| r.len() != d) {
        return Err(LearnError::Ragged {
            row,
            found: r.len(),
            expected: d,
        });
    }
    Ok(())
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Row indices sorted by each column's value (stable, so equal values keep
/// row order).
pub(crate) struct SortedColumns {
    pub orders: Vec<Vec<usize>>,
}

impl SortedColumns {
    pub fn new(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let orders = (0..d)
            .map(|j| {
                let mut idx: Vec<usize> = (0..x.len()).collect();
                idx.sort_by(|&a, &b| x[a][j].total_cmp(&x[b][j]));
                idx
            })
            .collect();
        SortedColumns { orders }
    }
}

/// Learner family plus hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum LearnerSpec {
    NaiveBayes { alpha: f64 },
    AdaBoost { rounds: usize },
    GradientBoosting(GbParams),
    Ridge { lambda: f64 },
    LinearSvr(SvrParams),
}

impl LearnerSpec {
    /// Default hyperparameters for a learner name
    /// (`nb`, `adaboost`, `gb`, `ridge`, `svr`).
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "nb" | "naive_bayes" => LearnerSpec::NaiveBayes { alpha: 1.0 },
            "adaboost" => LearnerSpec::AdaBoost { rounds: 50 },
            "gb" | "gradient_boosting" => LearnerSpec::GradientBoosting(GbParams::default()),
            "ridge" => LearnerSpec::Ridge { lambda: 1.0 },
            "svr" | "linear_svr" => LearnerSpec::LinearSvr(SvrParams::default()),
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::NaiveBayes { .. } => "naive_bayes",
            LearnerSpec::AdaBoost { .. } => "adaboost",
            LearnerSpec::GradientBoosting(_) => "gradient_boosting",
            LearnerSpec::Ridge { .. } => "ridge",
            LearnerSpec::LinearSvr(_) => "linear_svr",
        }
    }
}

/// Training targets.
#[derive(Debug, Clone, Copy)]
pub enum Targets<'a> {
    Classes { labels: &'a [usize], n_classes: usize },
    Real(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    NaiveBayes(MultinomialNb),
    /// One binary model for two classes, otherwise one-vs-rest.
    AdaBoost { n_classes: usize, models: Vec<AdaBoost> },
    GradientBoosting { n_classes: usize, models: Vec<GradientBoosting> },
    GbRegressor(GradientBoosting),
    Ridge(LinearModel),
    LinearSvr(LinearModel),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Probabilities(Vec<f64>),
    Value(f64),
}

impl Prediction {
    /// Most probable class, ties to the lowest index.
    pub fn class(&self) -> Option<usize> {
        match self {
            Prediction::Probabilities(p) => {
                let mut best = 0;
                for (i, v) in p.iter().enumerate() {
                    if *v > p[best] {
                        best = i;
                    }
                }
                Some(best)
            }
            Prediction::Value(_) => None,
        }
    }
}

fn one_vs_rest<M>(
    labels: &[usize],
    n_classes: usize,
    mut train: impl FnMut(&[usize]) -> Result<M, LearnError>,
) -> Result<Vec<M>, LearnError> {
    if n_classes == 2 {
        return Ok(vec![train(labels)?]);
    }
    (0..n_classes)
        .map(|c| {
            let bin: Vec<usize> = labels.iter().map(|&l| usize::from(l == c)).collect();
            train(&bin)
        })
        .collect()
}

fn ovr_proba(n_classes: usize, scores: impl Iterator<Item = f64>) -> Vec<f64> {
    let scores: Vec<f64> = scores.collect();
    if n_classes == 2 {
        return vec![1.0 - scores[0], scores[0]];
    }
    let z: f64 = scores.iter().sum();
    if z <= 0.0 {
        return vec![1.0 / n_classes as f64; n_classes];
    }
    scores.iter().map(|s| s / z).collect()
}

/// Trains the learner described by `spec`.
pub fn fit(spec: &LearnerSpec, x: &[Vec<f64>], targets: Targets<'_>) -> Result<Model, LearnError> {
    match (spec, targets) {
        (LearnerSpec::NaiveBayes { alpha }, Targets::Classes { labels, n_classes }) => {
            Ok(Model::NaiveBayes(train_multinomial_nb(x, labels, n_classes, *alpha)?))
        }
        (LearnerSpec::AdaBoost { rounds }, Targets::Classes { labels, n_classes }) => {
            check_classes(labels, n_classes)?;
            let models = one_vs_rest(labels, n_classes, |y| train_adaboost(x, y, *rounds))?;
            Ok(Model::AdaBoost { n_classes, models })
        }
        (LearnerSpec::GradientBoosting(p), Targets::Classes { labels, n_classes }) => {
            check_classes(labels, n_classes)?;
            let models = one_vs_rest(labels, n_classes, |y| {
                let yf: Vec<f64> = y.iter().map(|&c| c as f64).collect();
                train_gradient_boosting(x, &yf, Loss::Logistic, *p)
            })?;
            Ok(Model::GradientBoosting { n_classes, models })
        }
        (LearnerSpec::GradientBoosting(p), Targets::Real(y)) => {
            Ok(Model::GbRegressor(train_gradient_boosting(x, y, Loss::Squared, *p)?))
        }
        (LearnerSpec::Ridge { lambda }, Targets::Real(y)) => Ok(Model::Ridge(train_ridge(x, y, *lambda)?)),
        (LearnerSpec::LinearSvr(p), Targets::Real(y)) => Ok(Model::LinearSvr(train_linear_svr(x, y, *p)?)),
        (s, Targets::Classes { .. }) => Err(LearnError::UnsupportedTask {
            learner: s.name(),
            task: "classification",
        }),
        (s, Targets::Real(_)) => Err(LearnError::UnsupportedTask {
            learner: s.name(),
            task: "regression",
        }),
    }
}

fn check_classes(labels: &[usize], n_classes: usize) -> Result<(), LearnError> {
    if let Some(&bad) = labels.iter().find(|&&c| c >= n_classes) {
        return Err(LearnError::UnknownClass(bad));
    }
    let mut seen = vec![false; n_classes];
    labels.iter().for_each(|&c| seen[c] = true);
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(LearnError::DegenerateLabels);
    }
    Ok(())
}

impl Model {
    pub fn is_regression(&self) -> bool {
        matches!(self, Model::GbRegressor(_) | Model::Ridge(_) | Model::LinearSvr(_))
    }

    pub fn predict_row(&self, x: &[f64]) -> Prediction {
        match self {
            Model::NaiveBayes(m) => Prediction::Probabilities(m.predict_proba(x)),
            Model::AdaBoost { n_classes, models } => {
                Prediction::Probabilities(ovr_proba(*n_classes, models.iter().map(|m| m.predict_proba(x)[1])))
            }
            Model::GradientBoosting { n_classes, models } => {
                Prediction::Probabilities(ovr_proba(*n_classes, models.iter().map(|m| m.predict(x))))
            }
            Model::GbRegressor(m) => Prediction::Value(m.predict(x)),
            Model::Ridge(m) | Model::LinearSvr(m) => Prediction::Value(m.predict(x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learner_names() {
        for n in ["nb", "adaboost", "gb", "ridge", "svr"] {
            assert!(LearnerSpec::from_name(n).is_some());
        }
        assert!(LearnerSpec::from_name("svm").is_none());
    }

    #[test]
    fn task_mismatch() {
        let x = vec![vec![1.0], vec![2.0]];
        let spec = LearnerSpec::from_name("ridge").unwrap();
        let err = fit(&spec, &x, Targets::Classes { labels: &[0, 1], n_classes: 2 }).unwrap_err();
        assert!(matches!(err, LearnError::UnsupportedTask { .. }));
        let spec = LearnerSpec::from_name("nb").unwrap();
        assert!(fit(&spec, &x, Targets::Real(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn three_class_one_vs_rest() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i % 3) as f64, (i % 5) as f64]).collect();
        let y: Vec<usize> = (0..30).map(|i| i % 3).collect();
        for name in ["adaboost", "gb", "nb"] {
            let spec = LearnerSpec::from_name(name).unwrap();
            let m = fit(&spec, &x, Targets::Classes { labels: &y, n_classes: 3 }).unwrap();
            for (row, &c) in x.iter().zip(&y) {
                let p = m.predict_row(row);
                let Prediction::Probabilities(ref probs) = p else { panic!() };
                assert_eq!(probs.len(), 3);
                assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                if name != "nb" {
                    assert_eq!(p.class(), Some(c), "{name}");
                }
            }
        }
    }

    #[test]
    fn helpers() {
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!(matches!(check_rows(&[vec![1.0], vec![]], 2), Err(LearnError::Ragged { row: 1, .. })));
    }
}
