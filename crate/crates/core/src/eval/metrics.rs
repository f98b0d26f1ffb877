//! Classification and regression metrics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// No item was predicted as this class; precision reported as 0.
    pub precision_undefined: bool,
    /// No item of this class in the truth; recall reported as 0.
    pub recall_undefined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub per_class: Vec<ClassMetrics>,
    pub micro: Averages,
    #[serde(rename = "macro")]
    pub macro_avg: Averages,
    pub weighted: Averages,
    pub accuracy: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub r2: f64,
    pub rmse: f64,
    pub mae: f64,
    pub explained_variance: f64,
    pub n: usize,
    /// Constant truth: R² and explained variance reported as 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum MetricsReport {
    Classification(ClassificationReport),
    Regression(RegressionReport),
}

impl MetricsReport {
    /// Weighted F1 for classification, R² for regression.
    pub fn headline(&self) -> f64 {
        match self {
            MetricsReport::Classification(c) => c.weighted.f1,
            MetricsReport::Regression(r) => r.r2,
        }
    }

    pub fn to_table(&self) -> String {
        match self {
            MetricsReport::Classification(c) => c.to_table(),
            MetricsReport::Regression(r) => r.to_table(),
        }
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Per-class and averaged precision/recall/F1 over class indices into
/// `class_order`.
pub fn classification_report(
    y_true: &[usize],
    y_pred: &[usize],
    class_order: &[String],
) -> Result<ClassificationReport, EvalError> {
    if y_true.is_empty() {
        return Err(EvalError::EmptyEval);
    }
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let k = class_order.len();
    if let Some(&bad) = y_true.iter().chain(y_pred).find(|&&c| c >= k) {
        return Err(EvalError::InvalidParameter(format!("class index {bad} outside {k} classes")));
    }
    let mut tp = vec![0usize; k];
    let mut pred_count = vec![0usize; k];
    let mut support = vec![0usize; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        support[t] += 1;
        pred_count[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let precision = if pred_count[c] == 0 { 0.0 } else { tp[c] as f64 / pred_count[c] as f64 };
            let recall = if support[c] == 0 { 0.0 } else { tp[c] as f64 / support[c] as f64 };
            ClassMetrics {
                class: class_order[c].clone(),
                precision,
                recall,
                f1: f1(precision, recall),
                support: support[c],
                precision_undefined: pred_count[c] == 0,
                recall_undefined: support[c] == 0,
            }
        })
        .collect();
    let n = y_true.len();
    let total_tp: usize = tp.iter().sum();
    let micro_p = total_tp as f64 / pred_count.iter().sum::<usize>() as f64;
    let micro_r = total_tp as f64 / support.iter().sum::<usize>() as f64;
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    let wmean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / n as f64;
    Ok(ClassificationReport {
        micro: Averages {
            precision: micro_p,
            recall: micro_r,
            f1: f1(micro_p, micro_r),
        },
        macro_avg: Averages {
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f1: mean(|m| m.f1),
        },
        weighted: Averages {
            precision: wmean(|m| m.precision),
            recall: wmean(|m| m.recall),
            f1: wmean(|m| m.f1),
        },
        accuracy: total_tp as f64 / n as f64,
        per_class,
        n,
    })
}

/// R², RMSE, MAE and explained variance.
pub fn regression_report(y_true: &[f64], y_pred: &[f64]) -> Result<RegressionReport, EvalError> {
    if y_true.is_empty() {
        return Err(EvalError::EmptyEval);
    }
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let n = y_true.len() as f64;
    let mean_y = y_true.iter().sum::<f64>() / n;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean_y).powi(2)).sum();
    let resid: Vec<f64> = y_true.iter().zip(y_pred).map(|(y, p)| y - p).collect();
    let ss_res: f64 = resid.iter().map(|r| r * r).sum();
    let mean_r = resid.iter().sum::<f64>() / n;
    let var_r = resid.iter().map(|r| (r - mean_r).powi(2)).sum::<f64>() / n;
    let degenerate = ss_tot == 0.0;
    Ok(RegressionReport {
        r2: if degenerate { 0.0 } else { 1.0 - ss_res / ss_tot },
        rmse: (ss_res / n).sqrt(),
        mae: resid.iter().map(|r| r.abs()).sum::<f64>() / n,
        explained_variance: if degenerate { 0.0 } else { 1.0 - var_r / (ss_tot / n) },
        n: y_true.len(),
        degenerate,
    })
}

impl ClassificationReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<12} {:>9} {:>9} {:>9} {:>8}", "class", "precision", "recall", "f1", "support");
        for m in &self.per_class {
            let flag = if m.precision_undefined || m.recall_undefined { " *" } else { "" };
            let _ = writeln!(
                s,
                "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>8}{flag}",
                m.class, m.precision, m.recall, m.f1, m.support
            );
        }
        for (name, a) in [("micro", self.micro), ("macro", self.macro_avg), ("weighted", self.weighted)] {
            let _ = writeln!(s, "{:<12} {:>9.4} {:>9.4} {:>9.4} {:>8}", name, a.precision, a.recall, a.f1, self.n);
        }
        if self.per_class.iter().any(|m| m.precision_undefined || m.recall_undefined) {
            s.push_str("* undefined precision or recall reported as 0\n");
        }
        s
    }
}

impl RegressionReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>9} {:>9} {:>9} {:>9} {:>8}", "r2", "rmse", "mae", "evar", "n");
        let _ = writeln!(
            s,
            "{:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>8}",
            self.r2, self.rmse, self.mae, self.explained_variance, self.n
        );
        if self.degenerate {
            s.push_str("constant target: r2 and evar reported as 0\n");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn hand_confusion_matrix() {
        let r = classification_report(&[0, 0, 1, 1], &[0, 1, 1, 1], &["L".into(), "H".into()]).unwrap();
        let (l, h) = (&r.per_class[0], &r.per_class[1]);
        assert!((h.precision - 2.0 / 3.0).abs() < 1e-15 && h.recall == 1.0 && (h.f1 - 0.8).abs() < 1e-15);
        assert!(l.precision == 1.0 && l.recall == 0.5 && (l.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.macro_avg.f1 - 11.0 / 15.0).abs() < 1e-15);
        assert!((r.micro.f1 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_degenerate() {
        let r = classification_report(&[0, 1, 2], &[0, 1, 2], &names(3)).unwrap();
        assert_eq!((r.micro.f1, r.macro_avg.f1, r.weighted.f1), (1.0, 1.0, 1.0));
        let r = classification_report(&[1, 1], &[1, 1], &names(2)).unwrap();
        assert_eq!(r.micro.f1, 1.0);
        assert!(r.per_class[0].precision_undefined && r.per_class[0].recall_undefined);
        assert!(matches!(classification_report(&[], &[], &names(2)), Err(EvalError::EmptyEval)));
    }

    #[test]
    fn regression_hand_values() {
        let r = regression_report(&[1.0, 2.0, 3.0], &[2.0, 2.0, 2.0]).unwrap();
        assert_eq!(r.r2, 0.0);
        assert!((r.rmse - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((r.mae - 2.0 / 3.0).abs() < 1e-15);
        assert!(r.explained_variance.abs() < 1e-15);
        let r = regression_report(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!((r.r2, r.rmse, r.mae, r.explained_variance), (1.0, 0.0, 0.0, 1.0));
        let r = regression_report(&[3.0, 3.0], &[2.0, 4.0]).unwrap();
        assert!(r.degenerate && r.r2 == 0.0);
        assert!(regression_report(&[], &[]).is_err());
    }

    proptest! {
        #[test]
        fn micro_f1_is_accuracy(pairs in prop::collection::vec((0usize..3, 0usize..3), 1..50)) {
            let (t, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let r = classification_report(&t, &p, &names(3)).unwrap();
            prop_assert!((r.micro.f1 - r.accuracy).abs() < 1e-12);
            for m in &r.per_class {
                prop_assert!((0.0..=1.0).contains(&m.precision) && (0.0..=1.0).contains(&m.recall));
            }
        }
    }
}
