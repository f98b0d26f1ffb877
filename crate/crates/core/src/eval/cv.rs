//! Cross-validation with per-fold feature selection, and stacked
//! evaluation of tag-window probabilities on top of lexical features.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{classification_report, regression_report, MetricsReport};
use super::scheme::ClassScheme;
use super::EvalError;
use crate::features::FeatureVector;
use crate::learn::{
    anova_f_scores, apply_mask, fit, mask_from_scores, regression_f_scores, stack_features, LearnerSpec, Model,
    Prediction, Selection, TagProbabilities, Targets,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetData {
    Classes { y: Vec<usize>, names: Vec<String> },
    Real(Vec<f64>),
}

impl TargetData {
    pub fn len(&self) -> usize {
        match self {
            TargetData::Classes { y, .. } => y.len(),
            TargetData::Real(y) => y.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn subset(&self, idx: &[usize]) -> TargetData {
        match self {
            TargetData::Classes { y, names } => TargetData::Classes {
                y: idx.iter().map(|&i| y[i]).collect(),
                names: names.clone(),
            },
            TargetData::Real(y) => TargetData::Real(idx.iter().map(|&i| y[i]).collect()),
        }
    }

    /// Borrowed training targets.
    pub fn as_targets(&self) -> Targets<'_> {
        match self {
            TargetData::Classes { y, names } => Targets::Classes {
                labels: y,
                n_classes: names.len(),
            },
            TargetData::Real(y) => Targets::Real(y),
        }
    }
}

/// A feature matrix with its column names and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub target: TargetData,
}

impl Dataset {
    pub fn new(schema: Vec<String>, x: Vec<Vec<f64>>, target: TargetData) -> Result<Self, EvalError> {
        if x.len() != target.len() {
            return Err(EvalError::LengthMismatch(x.len(), target.len()));
        }
        if let Some(r) = x.iter().find(|r| r.len() != schema.len()) {
            return Err(EvalError::LengthMismatch(schema.len(), r.len()));
        }
        Ok(Dataset { schema, x, target })
    }

    /// Targets from 1–5 ratings: class labels, or the rating itself for
    /// the five-point scheme.
    pub fn from_ratings(
        schema: Vec<String>,
        x: Vec<Vec<f64>>,
        ratings: &[i64],
        scheme: ClassScheme,
    ) -> Result<Self, EvalError> {
        let target = if scheme.is_regression() {
            for &r in ratings {
                scheme.class_of(r)?;
            }
            TargetData::Real(ratings.iter().map(|&r| r as f64).collect())
        } else {
            TargetData::Classes {
                y: ratings.iter().map(|&r| scheme.class_of(r)).collect::<Result<_, _>>()?,
                names: scheme.labels().iter().map(|s| s.to_string()).collect(),
            }
        };
        Self::new(schema, x, target)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn rows(&self, idx: &[usize]) -> Vec<Vec<f64>> {
        idx.iter().map(|&i| self.x[i].clone()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub learner: LearnerSpec,
    pub selection: Selection,
    pub folds: usize,
    pub seed: u64,
}

impl CvConfig {
    pub fn protocol(&self, stratified: bool) -> String {
        format!(
            "{}{}-fold cv, seed {}, selection {} fitted on training folds, learner {}",
            if stratified { "stratified " } else { "" },
            self.folds,
            self.seed,
            self.selection.describe(),
            self.learner.name()
        )
    }
}

/// A selection mask and the model trained on the selected columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub mask: Vec<bool>,
    pub model: Model,
}

impl FittedPipeline {
    pub fn predict(&self, row: &[f64]) -> Prediction {
        self.model.predict_row(&apply_mask(row, &self.mask))
    }
}

/// Univariate scores of each column against the targets.
pub fn selection_scores(x: &[Vec<f64>], target: &TargetData) -> Vec<f64> {
    match target {
        TargetData::Classes { y, .. } => anova_f_scores(x, y),
        TargetData::Real(y) => regression_f_scores(x, y),
    }
}

/// Fits selection then the learner on `(x, target)`.
pub fn fit_pipeline(
    x: &[Vec<f64>],
    target: &TargetData,
    learner: &LearnerSpec,
    selection: Selection,
) -> Result<FittedPipeline, EvalError> {
    if x.is_empty() {
        return Err(EvalError::EmptyEval);
    }
    let mask = mask_from_scores(&selection_scores(x, target), selection);
    if !mask.iter().any(|&m| m) {
        return Err(EvalError::InvalidParameter(format!("{} keeps no features", selection.describe())));
    }
    let xs: Vec<Vec<f64>> = x.iter().map(|r| apply_mask(r, &mask)).collect();
    let model = fit(learner, &xs, target.as_targets())?;
    Ok(FittedPipeline { mask, model })
}

/// Trains on `train` rows (selection included) and predicts `test` rows.
pub fn evaluate_split(
    ds: &Dataset,
    train: &[usize],
    test: &[usize],
    learner: &LearnerSpec,
    selection: Selection,
) -> Result<Vec<Prediction>, EvalError> {
    let pipe = fit_pipeline(&ds.rows(train), &ds.target.subset(train), learner, selection)?;
    Ok(test.iter().map(|&i| pipe.predict(&ds.x[i])).collect())
}

/// Fold index per row. Each class is shuffled and dealt round-robin, so
/// every fold holds a near-equal share of each class.
pub fn stratified_folds(y: &[usize], names: &[String], k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if k < 2 {
        return Err(EvalError::InvalidParameter(format!("folds must be at least 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; y.len()];
    let mut offset = 0;
    for c in 0..names.len() {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            return Err(EvalError::Stratification {
                class: names[c].clone(),
                count: members.len(),
                folds: k,
            });
        }
        members.shuffle(&mut rng);
        for (j, &i) in members.iter().enumerate() {
            fold_of[i] = (offset + j) % k;
        }
        offset += members.len();
    }
    Ok(fold_of)
}

/// Fold index per row for unstratified k-fold.
pub fn shuffled_folds(n: usize, k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    if k < 2 || k > n {
        return Err(EvalError::InvalidParameter(format!("{k} folds for {n} rows")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = vec![0; n];
    for (j, &i) in order.iter().enumerate() {
        fold_of[i] = j % k;
    }
    Ok(fold_of)
}

fn assign_folds(target: &TargetData, k: usize, seed: u64) -> Result<Vec<usize>, EvalError> {
    match target {
        TargetData::Classes { y, names } => stratified_folds(y, names, k, seed),
        TargetData::Real(y) => shuffled_folds(y.len(), k, seed),
    }
}

fn split(fold_of: &[usize], f: usize) -> (Vec<usize>, Vec<usize>) {
    (0..fold_of.len()).partition(|&i| fold_of[i] != f)
}

/// Pooled out-of-fold predictions and their report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub protocol: String,
    pub fold_of: Vec<usize>,
    /// Predicted class index (classification) or value (regression) per row.
    pub predictions: Vec<f64>,
    pub metrics: MetricsReport,
}

fn pooled(target: &TargetData, preds: &[Prediction]) -> Result<(Vec<f64>, MetricsReport), EvalError> {
    match target {
        TargetData::Classes { y, names } => {
            let p: Vec<usize> = preds.iter().map(|p| p.class().unwrap_or(0)).collect();
            let report = classification_report(y, &p, names)?;
            Ok((p.iter().map(|&c| c as f64).collect(), MetricsReport::Classification(report)))
        }
        TargetData::Real(y) => {
            let p: Vec<f64> = preds
                .iter()
                .map(|p| match p {
                    Prediction::Value(v) => *v,
                    Prediction::Probabilities(_) => f64::NAN,
                })
                .collect();
            let report = regression_report(y, &p)?;
            Ok((p, MetricsReport::Regression(report)))
        }
    }
}

/// Out-of-fold predictions for every row under a fixed fold assignment.
fn oof_predictions(ds: &Dataset, fold_of: &[usize], k: usize, cfg: &CvConfig) -> Result<Vec<Prediction>, EvalError> {
    let per_fold: Vec<(Vec<usize>, Vec<Prediction>)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (train, test) = split(fold_of, f);
            let preds = evaluate_split(ds, &train, &test, &cfg.learner, cfg.selection)?;
            Ok((test, preds))
        })
        .collect::<Result<_, EvalError>>()?;
    let mut out: Vec<Option<Prediction>> = vec![None; ds.len()];
    for (test, preds) in per_fold {
        for (i, p) in test.into_iter().zip(preds) {
            out[i] = Some(p);
        }
    }
    Ok(out.into_iter().map(|p| p.expect("folds partition rows")).collect())
}

/// k-fold cross-validation; folds are stratified for class targets and
/// selection is refitted on each training split.
pub fn cross_validate(ds: &Dataset, cfg: &CvConfig) -> Result<CvReport, EvalError> {
    if ds.is_empty() {
        return Err(EvalError::EmptyEval);
    }
    let fold_of = assign_folds(&ds.target, cfg.folds, cfg.seed)?;
    let preds = oof_predictions(ds, &fold_of, cfg.folds, cfg)?;
    let (predictions, metrics) = pooled(&ds.target, &preds)?;
    Ok(CvReport {
        protocol: cfg.protocol(matches!(ds.target, TargetData::Classes { .. })),
        fold_of,
        predictions,
        metrics,
    })
}

fn probabilities(p: Prediction, k: usize) -> Vec<f64> {
    match p {
        Prediction::Probabilities(v) => v,
        Prediction::Value(_) => vec![1.0 / k as f64; k],
    }
}

/// Leak-free class probabilities for every row of a classification
/// dataset: each row is scored by a model that never saw it.
pub fn out_of_fold_probabilities(ds: &Dataset, cfg: &CvConfig) -> Result<Vec<Vec<f64>>, EvalError> {
    let TargetData::Classes { names, .. } = &ds.target else {
        return Err(EvalError::InvalidParameter("probabilities need class targets".into()));
    };
    let fold_of = assign_folds(&ds.target, cfg.folds, cfg.seed)?;
    let preds = oof_predictions(ds, &fold_of, cfg.folds, cfg)?;
    Ok(preds.into_iter().map(|p| probabilities(p, names.len())).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    /// Outer folds, seed, selection and learner for the lexical model.
    pub outer: CvConfig,
    pub tag_learner: LearnerSpec,
    pub tag_selection: Selection,
    /// Folds used inside each outer training split to produce the
    /// training rows' tag probabilities.
    pub inner_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackReport {
    pub protocol: String,
    pub lexical_only: MetricsReport,
    pub stacked: MetricsReport,
    /// Stacked minus lexical-only headline metric.
    pub gain: f64,
}

/// Compares lexical-only and stacked models on identical outer folds.
///
/// Tag probabilities for outer-training rows come from inner out-of-fold
/// models; those for outer-test rows from a tag model trained on the whole
/// outer-training split, so no probability is produced by a model that saw
/// the row it describes.
pub fn stacked_cross_validate(lexical: &Dataset, tags: &Dataset, cfg: &StackConfig) -> Result<StackReport, EvalError> {
    let TargetData::Classes { y, names } = &lexical.target else {
        return Err(EvalError::InvalidParameter("stacking needs class targets".into()));
    };
    if tags.target != lexical.target {
        return Err(EvalError::InvalidParameter("lexical and tag datasets disagree on targets".into()));
    }
    let k = cfg.outer.folds;
    let fold_of = stratified_folds(y, names, k, cfg.outer.seed)?;
    let lexical_preds = oof_predictions(lexical, &fold_of, k, &cfg.outer)?;
    let (_, lexical_only) = pooled(&lexical.target, &lexical_preds)?;

    let per_fold: Vec<(Vec<usize>, Vec<Prediction>)> = (0..k)
        .into_par_iter()
        .map(|f| stacked_fold(lexical, tags, &fold_of, f, cfg))
        .collect::<Result<_, EvalError>>()?;
    let mut preds: Vec<Option<Prediction>> = vec![None; lexical.len()];
    for (test, p) in per_fold {
        for (i, q) in test.into_iter().zip(p) {
            preds[i] = Some(q);
        }
    }
    let preds: Vec<Prediction> = preds.into_iter().map(|p| p.expect("folds partition rows")).collect();
    let (_, stacked) = pooled(&lexical.target, &preds)?;
    Ok(StackReport {
        protocol: format!(
            "{}; tag model {} with {}-fold inner out-of-fold probabilities",
            cfg.outer.protocol(true),
            cfg.tag_learner.name(),
            cfg.inner_folds
        ),
        gain: stacked.headline() - lexical_only.headline(),
        lexical_only,
        stacked,
    })
}

fn stacked_fold(
    lexical: &Dataset,
    tags: &Dataset,
    fold_of: &[usize],
    f: usize,
    cfg: &StackConfig,
) -> Result<(Vec<usize>, Vec<Prediction>), EvalError> {
    let TargetData::Classes { y, names } = &lexical.target else {
        unreachable!("checked by caller");
    };
    let (train, test) = split(fold_of, f);
    let outer_training: BTreeSet<usize> = (0..cfg.outer.folds).filter(|&g| g != f).collect();
    let tag_probs = |p: Prediction, folds: BTreeSet<usize>| TagProbabilities {
        probs: probabilities(p, names.len()),
        class_names: names.clone(),
        training_folds: folds,
    };
    let lex_row = |i: usize| FeatureVector::new(lexical.schema.clone(), lexical.x[i].clone());

    let train_y: Vec<usize> = train.iter().map(|&i| y[i]).collect();
    let inner = stratified_folds(&train_y, names, cfg.inner_folds, cfg.outer.seed.wrapping_add(1 + f as u64))?;
    let mut stacked_train: Vec<Vec<f64>> = vec![Vec::new(); train.len()];
    let mut schema = Vec::new();
    for g in 0..cfg.inner_folds {
        let (fit_pos, score_pos) = split(&inner, g);
        let fit_rows: Vec<usize> = fit_pos.iter().map(|&p| train[p]).collect();
        let pipe = fit_pipeline(&tags.rows(&fit_rows), &tags.target.subset(&fit_rows), &cfg.tag_learner, cfg.tag_selection)?;
        for p in score_pos {
            let i = train[p];
            let v = stack_features(&lex_row(i), &tag_probs(pipe.predict(&tags.x[i]), outer_training.clone()), None)?;
            schema = v.schema;
            stacked_train[p] = v.values;
        }
    }
    let tag_pipe = fit_pipeline(&tags.rows(&train), &tags.target.subset(&train), &cfg.tag_learner, cfg.tag_selection)?;
    let stacked_test: Vec<Vec<f64>> = test
        .iter()
        .map(|&i| {
            stack_features(&lex_row(i), &tag_probs(tag_pipe.predict(&tags.x[i]), outer_training.clone()), Some(f))
                .map(|v| v.values)
        })
        .collect::<Result<_, _>>()?;
    let stacked = Dataset::new(schema, stacked_train, lexical.target.subset(&train))?;
    let pipe = fit_pipeline(&stacked.x, &stacked.target, &cfg.outer.learner, cfg.outer.selection)?;
    let preds = stacked_test.iter().map(|r| pipe.predict(r)).collect();
    Ok((test, preds))
}
