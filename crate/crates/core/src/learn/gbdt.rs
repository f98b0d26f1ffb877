//! Gradient-boosted regression trees with squared loss (regression) or
//! logistic loss (binary classification).

use serde::{Deserialize, Serialize};

use super::{check_rows, codec, sigmoid, LearnError, SortedColumns};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
}

impl Default for GbParams {
    fn default() -> Self {
        GbParams {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Squared,
    Logistic,
}

/// A binary regression tree stored as parallel arrays. Leaves have
/// `feature == -1`; internal nodes send `x[feature] <= threshold` left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub feature: Vec<i64>,
    #[serde(with = "codec::f64s")]
    pub threshold: Vec<f64>,
    #[serde(with = "codec::f64s")]
    pub value: Vec<f64>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut n = 0usize;
        while self.feature[n] >= 0 {
            let f = self.feature[n] as usize;
            n = if x[f] <= self.threshold[n] {
                self.left[n]
            } else {
                self.right[n]
            } as usize;
        }
        self.value[n]
    }

    pub fn n_leaves(&self) -> usize {
        self.feature.iter().filter(|&&f| f < 0).count()
    }

    fn push_leaf(&mut self, value: f64) -> usize {
        self.feature.push(-1);
        self.threshold.push(0.0);
        self.value.push(value);
        self.left.push(0);
        self.right.push(0);
        self.feature.len() - 1
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    cols: &'a SortedColumns,
    residual: &'a [f64],
    /// Per-row Newton denominator; `None` for squared loss (leaf = mean).
    hessian: Option<&'a [f64]>,
    max_depth: usize,
    min_leaf: usize,
}

struct Split {
    feature: usize,
    threshold: f64,
}

impl TreeBuilder<'_> {
    fn leaf_value(&self, rows: &[usize]) -> f64 {
        let g: f64 = rows.iter().map(|&i| self.residual[i]).sum();
        match self.hessian {
            None => g / rows.len() as f64,
            Some(h) => {
                let hs: f64 = rows.iter().map(|&i| h[i]).sum();
                if hs.abs() < 1e-12 {
                    0.0
                } else {
                    g / hs
                }
            }
        }
    }

    /// Best squared-error split of `rows`. Ties go to the lowest feature
    /// index, then the lowest threshold.
    fn best_split(&self, in_node: &[bool], rows: &[usize]) -> Option<Split> {
        let n = rows.len();
        let total: f64 = rows.iter().map(|&i| self.residual[i]).sum();
        let parent = total * total / n as f64;
        let mut best: Option<(Split, f64)> = None;
        let mut sorted = Vec::with_capacity(n);
        for (f, order) in self.cols.orders.iter().enumerate() {
            sorted.clear();
            sorted.extend(order.iter().copied().filter(|&i| in_node[i]));
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                let i = sorted[k];
                left_sum += self.residual[i];
                let (v, next) = (self.x[i][f], self.x[sorted[k + 1]][f]);
                if v == next {
                    continue;
                }
                let nl = k + 1;
                let nr = n - nl;
                if nl < self.min_leaf || nr < self.min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / nl as f64 + right_sum * right_sum / nr as f64 - parent;
                if gain > 1e-12 && best.as_ref().is_none_or(|(_, g)| gain > g + 1e-12) {
                    best = Some((
                        Split {
                            feature: f,
                            threshold: 0.5 * (v + next),
                        },
                        gain,
                    ));
                }
            }
        }
        best.map(|(s, _)| s)
    }

    fn grow(&self, tree: &mut RegressionTree, rows: Vec<usize>, depth: usize, in_node: &mut [bool]) -> usize {
        let split = if depth < self.max_depth && rows.len() >= 2 * self.min_leaf.max(1) {
            rows.iter().for_each(|&i| in_node[i] = true);
            let s = self.best_split(in_node, &rows);
            rows.iter().for_each(|&i| in_node[i] = false);
            s
        } else {
            None
        };
        let Some(split) = split else {
            return tree.push_leaf(self.leaf_value(&rows));
        };
        let node = tree.push_leaf(0.0);
        tree.feature[node] = split.feature as i64;
        tree.threshold[node] = split.threshold;
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .into_iter()
            .partition(|&i| self.x[i][split.feature] <= split.threshold);
        let left = self.grow(tree, l, depth + 1, in_node);
        let right = self.grow(tree, r, depth + 1, in_node);
        tree.left[node] = left as u32;
        tree.right[node] = right as u32;
        node
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub params: GbParams,
    pub loss: Loss,
    /// Initial raw score: target mean or prior log-odds.
    pub init: f64,
    pub trees: Vec<RegressionTree>,
}

const PROB_CLAMP: f64 = 1e-6;

/// Fits a boosted ensemble. For [`Loss::Logistic`] targets must be 0 or 1.
pub fn train_gradient_boosting(
    x: &[Vec<f64>],
    y: &[f64],
    loss: Loss,
    params: GbParams,
) -> Result<GradientBoosting, LearnError> {
    check_rows(x, y.len())?;
    if loss == Loss::Logistic && y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(LearnError::NotBinary);
    }
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let init = match loss {
        Loss::Squared => mean,
        Loss::Logistic => {
            let p = mean.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            (p / (1.0 - p)).ln()
        }
    };
    let mut model = GradientBoosting {
        params,
        loss,
        init,
        trees: Vec::new(),
    };
    let constant = y.iter().all(|&v| v == y[0]);
    if constant || x[0].is_empty() {
        return Ok(model);
    }
    let cols = SortedColumns::new(x);
    let mut raw = vec![init; y.len()];
    let mut residual = vec![0.0; y.len()];
    let mut hessian = vec![0.0; y.len()];
    let mut in_node = vec![false; y.len()];
    for _ in 0..params.n_trees {
        for i in 0..y.len() {
            match loss {
                Loss::Squared => residual[i] = y[i] - raw[i],
                Loss::Logistic => {
                    let p = sigmoid(raw[i]);
                    residual[i] = y[i] - p;
                    hessian[i] = p * (1.0 - p);
                }
            }
        }
        if residual.iter().all(|r| r.abs() < 1e-12) {
            break;
        }
        let builder = TreeBuilder {
            x,
            cols: &cols,
            residual: &residual,
            hessian: (loss == Loss::Logistic).then_some(&hessian[..]),
            max_depth: params.max_depth.max(1),
            min_leaf: params.min_samples_leaf.max(1),
        };
        let mut tree = RegressionTree {
            feature: Vec::new(),
            threshold: Vec::new(),
            value: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
        };
        builder.grow(&mut tree, (0..y.len()).collect(), 0, &mut in_node);
        tree.value.iter_mut().for_each(|v| *v *= params.learning_rate);
        for (r, row) in raw.iter_mut().zip(x) {
            *r += tree.predict(row);
        }
        model.trees.push(tree);
    }
    Ok(model)
}

impl GradientBoosting {
    pub fn raw_score(&self, x: &[f64]) -> f64 {
        self.init + self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    /// Regression output, or `P(1)` for logistic loss.
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.loss {
            Loss::Squared => self.raw_score(x),
            Loss::Logistic => sigmoid(self.raw_score(x)),
        }
    }

    /// The first `t` trees as a model of their own.
    pub fn truncated(&self, t: usize) -> GradientBoosting {
        GradientBoosting {
            trees: self.trees.iter().take(t).cloned().collect(),
            ..self.clone()
        }
    }

    /// Mean training loss: squared error or logistic deviance.
    pub fn loss_on(&self, x: &[Vec<f64>], y: &[f64]) -> f64 {
        let total: f64 = x
            .iter()
            .zip(y)
            .map(|(r, &t)| match self.loss {
                Loss::Squared => (t - self.raw_score(r)).powi(2),
                Loss::Logistic => {
                    let f = self.raw_score(r);
                    // log(1 + e^f) - t f, computed stably
                    f.max(0.0) + (-f.abs()).exp().ln_1p() - t * f
                }
            })
            .sum();
        total / y.len() as f64
    }
}
