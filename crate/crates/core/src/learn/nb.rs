//! Multinomial Naive Bayes with additive (Laplace/Lidstone) smoothing.

use serde::{Deserialize, Serialize};

use super::{codec, log_sum_exp, LearnError};

/// Smoothing values below this floor are raised to it, so unseen tokens
/// never produce `-inf` likelihoods.
pub const MIN_ALPHA: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultinomialNb {
    pub alpha: f64,
    #[serde(with = "codec::f64s")]
    class_log_prior: Vec<f64>,
    /// `feature_log_prob[c][j] = ln P(token j | class c)`.
    #[serde(with = "codec::f64_rows")]
    feature_log_prob: Vec<Vec<f64>>,
}

/// Fits per-class log-priors and smoothed log-likelihoods from count rows.
pub fn train_multinomial_nb(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    alpha: f64,
) -> Result<MultinomialNb, LearnError> {
    super::check_rows(x, y.len())?;
    let d = x.first().map_or(0, Vec::len);
    if x.iter().flatten().any(|&v| v < 0.0) {
        return Err(LearnError::NegativeFeature);
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(LearnError::UnknownClass(bad));
    }
    let mut class_count = vec![0usize; n_classes];
    let mut token_count = vec![vec![0.0; d]; n_classes];
    for (row, &c) in x.iter().zip(y) {
        class_count[c] += 1;
        for (acc, v) in token_count[c].iter_mut().zip(row) {
            *acc += v;
        }
    }
    if class_count.iter().filter(|&&n| n > 0).count() < 2 {
        return Err(LearnError::DegenerateLabels);
    }
    let alpha = alpha.max(MIN_ALPHA);
    let n = y.len() as f64;
    let class_log_prior = class_count.iter().map(|&c| (c as f64 / n).ln()).collect();
    let feature_log_prob = token_count
        .iter()
        .map(|counts| {
            let total: f64 = counts.iter().sum::<f64>() + alpha * d as f64;
            counts.iter().map(|&c| ((c + alpha) / total).ln()).collect()
        })
        .collect();
    Ok(MultinomialNb {
        alpha,
        class_log_prior,
        feature_log_prob,
    })
}

impl MultinomialNb {
    pub fn n_classes(&self) -> usize {
        self.class_log_prior.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_log_prob.first().map_or(0, Vec::len)
    }

    /// Unnormalized joint log-likelihood per class.
    pub fn joint_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        self.class_log_prior
            .iter()
            .zip(&self.feature_log_prob)
            .map(|(prior, lp)| prior + x.iter().zip(lp).map(|(v, l)| if *v == 0.0 { 0.0 } else { v * l }).sum::<f64>())
            .collect()
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let jll = self.joint_log_likelihood(x);
        let norm = log_sum_exp(&jll);
        jll.iter().map(|l| (l - norm).exp()).collect()
    }
}
