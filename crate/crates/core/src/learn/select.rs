//! Univariate feature scoring and top-percentile selection.

use serde::{Deserialize, Serialize};

/// How many of the highest-scoring features to keep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Keep `ceil(p% × d)` features.
    Percentile(f64),
    /// Keep the top `k` features.
    TopK(usize),
}

/// Percentiles swept in the experiments.
pub const PERCENTILE_GRID: [f64; 7] = [3.0, 5.0, 10.0, 25.0, 50.0, 75.0, 100.0];

impl Selection {
    pub fn keep_count(&self, d: usize) -> usize {
        match *self {
            Selection::Percentile(p) => {
                let k = (p.clamp(0.0, 100.0) / 100.0 * d as f64 - 1e-9).ceil();
                (k.max(0.0) as usize).min(d)
            }
            Selection::TopK(k) => k.min(d),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Selection::Percentile(p) => format!("percentile={p}"),
            Selection::TopK(k) => format!("top_k={k}"),
        }
    }
}

/// Variance-scale floor below which a quantity counts as zero.
const EPS: f64 = 1e-12;

/// One-way ANOVA F statistic of each column against class labels.
/// Columns with no between-class variance score 0; perfectly separated
/// columns (no within-class variance) score `f64::MAX`.
pub fn anova_f_scores(x: &[Vec<f64>], y: &[usize]) -> Vec<f64> {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    let k = y.iter().max().map_or(0, |m| m + 1);
    let mut count = vec![0usize; k];
    for &c in y {
        count[c] += 1;
    }
    let groups = count.iter().filter(|&&c| c > 0).count();
    (0..d)
        .map(|j| {
            if groups < 2 || n <= groups {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            let mut grand = 0.0;
            for (row, &c) in x.iter().zip(y) {
                sums[c] += row[j];
                grand += row[j];
            }
            let grand_mean = grand / n as f64;
            let between: f64 = (0..k)
                .filter(|&c| count[c] > 0)
                .map(|c| count[c] as f64 * (sums[c] / count[c] as f64 - grand_mean).powi(2))
                .sum();
            let within: f64 = x
                .iter()
                .zip(y)
                .map(|(row, &c)| (row[j] - sums[c] / count[c] as f64).powi(2))
                .sum();
            let scale = 1.0 + grand_mean.abs();
            if between <= EPS * scale * scale {
                0.0
            } else if within <= EPS * scale * scale {
                f64::MAX
            } else {
                (between / (groups - 1) as f64) / (within / (n - groups) as f64)
            }
        })
        .collect()
}

/// Univariate linear-regression F statistic `r²/(1−r²)·(n−2)` per column.
pub fn regression_f_scores(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d = x.first().map_or(0, Vec::len);
    let ym = y.iter().sum::<f64>() / n.max(1) as f64;
    let syy: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    (0..d)
        .map(|j| {
            if n < 3 || syy <= EPS {
                return 0.0;
            }
            let xm = x.iter().map(|r| r[j]).sum::<f64>() / n as f64;
            let sxx: f64 = x.iter().map(|r| (r[j] - xm).powi(2)).sum();
            if sxx <= EPS * (1.0 + xm * xm) {
                return 0.0;
            }
            let sxy: f64 = x.iter().zip(y).map(|(r, v)| (r[j] - xm) * (v - ym)).sum();
            let r2 = (sxy * sxy / (sxx * syy)).min(1.0);
            if 1.0 - r2 <= EPS {
                f64::MAX
            } else {
                r2 / (1.0 - r2) * (n - 2) as f64
            }
        })
        .collect()
}

/// Keeps the highest-scoring features; ties go to the lower column index.
pub fn mask_from_scores(scores: &[f64], selection: Selection) -> Vec<bool> {
    let keep = selection.keep_count(scores.len());
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut mask = vec![false; scores.len()];
    for &i in idx.iter().take(keep) {
        mask[i] = true;
    }
    mask
}

/// Applies a mask to one row.
pub fn apply_mask(row: &[f64], mask: &[bool]) -> Vec<f64> {
    row.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| *v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn keep_counts() {
        assert_eq!(Selection::Percentile(25.0).keep_count(255), 64);
        assert_eq!(Selection::Percentile(3.0).keep_count(10), 1);
        assert_eq!(Selection::Percentile(50.0).keep_count(2), 1);
        assert_eq!(Selection::Percentile(100.0).keep_count(7), 7);
        assert_eq!(Selection::TopK(25).keep_count(10), 10);
    }

    #[test]
    fn label_copy_beats_noise() {
        let y = [0, 0, 0, 1, 1, 1];
        let x: Vec<Vec<f64>> = y
            .iter()
            .zip([0.3, 0.9, 0.1, 0.5, 0.2, 0.8])
            .map(|(&c, noise)| vec![noise, c as f64])
            .collect();
        let scores = anova_f_scores(&x, &y);
        assert_eq!(scores[1], f64::MAX);
        // noise: group means 13/30 and 1/2, F = (1/150) / (0.5267/4)
        let expected = (3.0 * (13.0f64 / 30.0 - 7.0 / 15.0).powi(2) + 3.0 * (0.5f64 - 7.0 / 15.0).powi(2))
            / ((0.3f64 - 13.0 / 30.0).powi(2)
                + (0.9f64 - 13.0 / 30.0).powi(2)
                + (0.1f64 - 13.0 / 30.0).powi(2)
                + (0.5f64 - 0.5).powi(2)
                + (0.2f64 - 0.5).powi(2)
                + (0.8f64 - 0.5).powi(2))
            * 4.0;
        assert!((scores[0] - expected).abs() < 1e-12);
        assert_eq!(mask_from_scores(&scores, Selection::Percentile(50.0)), [false, true]);
    }

    #[test]
    fn full_percentile_is_identity() {
        let scores = [0.0, 3.0, 1.0];
        assert_eq!(mask_from_scores(&scores, Selection::Percentile(100.0)), [true, true, true]);
    }

    #[test]
    fn constant_feature_scores_zero() {
        let x = vec![vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 1.5], vec![5.0, 4.0]];
        let scores = anova_f_scores(&x, &[0, 0, 1, 1]);
        assert_eq!(scores[0], 0.0);
        assert!(scores[1] > 0.0);
        assert_eq!(mask_from_scores(&scores, Selection::TopK(1)), [false, true]);
        assert_eq!(regression_f_scores(&x, &[1.0, 2.0, 3.0, 4.0])[0], 0.0);
    }

    #[test]
    fn regression_scores() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, ((i * 5) % 3) as f64]).collect();
        let y: Vec<f64> = (0..6).map(|i| 2.0 * i as f64 + 1.0).collect();
        let s = regression_f_scores(&x, &y);
        assert_eq!(s[0], f64::MAX);
        assert!(s[1] < s[0]);
    }

    proptest! {
        #[test]
        fn mask_permutes_with_columns(scores in prop::collection::vec(0.0f64..100.0, 1..12), pct in 1.0f64..100.0, seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut perm: Vec<usize> = (0..scores.len()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let permuted: Vec<f64> = perm.iter().map(|&i| scores[i]).collect();
            let mask = mask_from_scores(&scores, Selection::Percentile(pct));
            let pmask = mask_from_scores(&permuted, Selection::Percentile(pct));
            let distinct = {
                let mut s = scores.clone();
                s.sort_by(f64::total_cmp);
                s.windows(2).all(|w| w[0] != w[1])
            };
            prop_assume!(distinct);
            for (k, &i) in perm.iter().enumerate() {
                prop_assert_eq!(pmask[k], mask[i]);
            }
        }
    }
}
