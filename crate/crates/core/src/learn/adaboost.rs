//! Discrete AdaBoost (SAMME, two classes) over depth-1 decision stumps.

use serde::{Deserialize, Serialize};

use super::{check_rows, sigmoid, LearnError, SortedColumns};

/// Cap on a round's vote weight, reached when a stump has zero error.
pub const MAX_ALPHA: f64 = 20.723265836946411; // ln(1e9)

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    /// Output for `x[feature] > threshold`; the other side gets `-polarity`.
    pub polarity: f64,
}

impl Stump {
    pub fn predict(&self, x: &[f64]) -> f64 {
        if x[self.feature] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub stumps: Vec<Stump>,
    pub alphas: Vec<f64>,
}

/// Finds the stump with the lowest weighted error. Ties go to the lowest
/// feature index, then the smallest threshold, then positive polarity.
fn best_stump(cols: &SortedColumns, x: &[Vec<f64>], signs: &[f64], w: &[f64]) -> (Stump, f64) {
    let total: f64 = w.iter().sum();
    let mut best: Option<(Stump, f64)> = None;
    let mut consider = |s: Stump, err: f64| {
        if best.as_ref().is_none_or(|(_, e)| err < e - 1e-12) {
            best = Some((s, err));
        }
    };
    for (f, order) in cols.orders.iter().enumerate() {
        // err for polarity +1 with everything on the "> threshold" side
        let mut err_pos: f64 = order.iter().filter(|&&i| signs[i] < 0.0).map(|&i| w[i]).sum();
        let first = x[order[0]][f];
        let mut k = 0;
        let mut threshold = first - 1.0;
        loop {
            consider(Stump { feature: f, threshold, polarity: 1.0 }, err_pos);
            consider(Stump { feature: f, threshold, polarity: -1.0 }, total - err_pos);
            if k >= order.len() {
                break;
            }
            // move the next group of equal values to the "<= threshold" side
            let v = x[order[k]][f];
            while k < order.len() && x[order[k]][f] == v {
                let i = order[k];
                err_pos += if signs[i] > 0.0 { w[i] } else { -w[i] };
                k += 1;
            }
            if k >= order.len() {
                break;
            }
            threshold = 0.5 * (v + x[order[k]][f]);
        }
    }
    best.expect("at least one feature and one row")
}

/// Trains `rounds` boosting rounds on binary labels `y ∈ {0, 1}`.
pub fn train_adaboost(x: &[Vec<f64>], y: &[usize], rounds: usize) -> Result<AdaBoost, LearnError> {
    check_rows(x, y.len())?;
    if y.iter().any(|&c| c > 1) {
        return Err(LearnError::NotBinary);
    }
    if x[0].is_empty() {
        return Err(LearnError::NoFeatures);
    }
    let n = y.len();
    let signs: Vec<f64> = y.iter().map(|&c| if c == 1 { 1.0 } else { -1.0 }).collect();
    let cols = SortedColumns::new(x);
    let mut w = vec![1.0 / n as f64; n];
    let mut model = AdaBoost {
        stumps: Vec::new(),
        alphas: Vec::new(),
    };
    for _ in 0..rounds {
        let (stump, err) = best_stump(&cols, x, &signs, &w);
        if err >= 0.5 - 1e-12 {
            break;
        }
        let perfect = err <= 1e-12;
        let alpha = if perfect { MAX_ALPHA } else { ((1.0 - err) / err).ln().min(MAX_ALPHA) };
        model.stumps.push(stump);
        model.alphas.push(alpha);
        if perfect {
            break;
        }
        let mut z = 0.0;
        for i in 0..n {
            if stump.predict(&x[i]) != signs[i] {
                w[i] *= alpha.exp();
            }
            z += w[i];
        }
        w.iter_mut().for_each(|v| *v /= z);
    }
    Ok(model)
}

impl AdaBoost {
    /// Weighted vote `Σ α_t h_t(x)`.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.stumps.iter().zip(&self.alphas).map(|(s, a)| a * s.predict(x)).sum()
    }

    /// `[P(0), P(1)]` with `P(1) = σ(margin)`.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let p = sigmoid(self.margin(x));
        vec![1.0 - p, p]
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        usize::from(self.margin(x) > 0.0)
    }

    /// The first `t` rounds as a model of their own.
    pub fn truncated(&self, t: usize) -> AdaBoost {
        AdaBoost {
            stumps: self.stumps.iter().take(t).copied().collect(),
            alphas: self.alphas.iter().take(t).copied().collect(),
        }
    }
}
