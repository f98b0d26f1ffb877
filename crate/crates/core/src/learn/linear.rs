//! Linear regressors on standardized features: closed-form ridge and a
//! linear epsilon-insensitive SVR trained by stochastic subgradient descent.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_rows, codec, LearnError};

/// Column means and standard deviations. Zero-variance columns keep scale 1
/// so they standardize to all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    #[serde(with = "codec::f64s")]
    pub mean: Vec<f64>,
    #[serde(with = "codec::f64s")]
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let n = x.len() as f64;
        let d = x.first().map_or(0, Vec::len);
        let mut mean = vec![0.0; d];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut scale = vec![0.0; d];
        for row in x {
            for ((s, v), m) in scale.iter_mut().zip(row).zip(&mean) {
                *s += (v - m).powi(2) / n;
            }
        }
        for s in scale.iter_mut() {
            *s = if *s > 1e-24 { s.sqrt() } else { 1.0 };
        }
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub standardizer: Standardizer,
    /// Coefficients on standardized features.
    #[serde(with = "codec::f64s")]
    pub coef: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let z = self.standardizer.transform(x);
        self.intercept + z.iter().zip(&self.coef).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Solves `(ZᵀZ + λI)β = Zᵀ(y − ȳ)` on standardized `Z`; the intercept is
/// the (unpenalized) target mean. `λ = 0` uses the pseudo-inverse.
pub fn train_ridge(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<LinearModel, LearnError> {
    check_rows(x, y.len())?;
    if !(lambda >= 0.0) {
        return Err(LearnError::InvalidParameter(format!("ridge lambda {lambda}")));
    }
    let standardizer = Standardizer::fit(x);
    let n = x.len();
    let d = x[0].len();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let z = DMatrix::from_fn(n, d, |i, j| (x[i][j] - standardizer.mean[j]) / standardizer.scale[j]);
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    let coef = if d == 0 {
        DVector::zeros(0)
    } else if lambda == 0.0 {
        let pinv = z
            .clone()
            .pseudo_inverse(1e-12)
            .map_err(|e| LearnError::Numerical(e.to_string()))?;
        pinv * yc
    } else {
        let mut a = z.transpose() * &z;
        for i in 0..d {
            a[(i, i)] += lambda;
        }
        let b = z.transpose() * yc;
        a.cholesky()
            .ok_or_else(|| LearnError::Numerical("ridge system not positive definite".into()))?
            .solve(&b)
    };
    Ok(LinearModel {
        standardizer,
        coef: coef.iter().copied().collect(),
        intercept: y_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrParams {
    pub epsilon: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            epsilon: 0.1,
            lambda: 1e-3,
            epochs: 200,
            learning_rate: 0.05,
            seed: 0,
        }
    }
}

/// Minimizes `λ/2 ‖w‖² + mean(max(0, |y − w·z − b| − ε))` by shuffled
/// stochastic subgradient steps with a decaying rate; returns the average of
/// the final epoch's iterates.
pub fn train_linear_svr(x: &[Vec<f64>], y: &[f64], params: SvrParams) -> Result<LinearModel, LearnError> {
    check_rows(x, y.len())?;
    if params.epsilon < 0.0 || params.lambda < 0.0 || params.learning_rate <= 0.0 {
        return Err(LearnError::InvalidParameter("svr parameters".into()));
    }
    let standardizer = Standardizer::fit(x);
    let z: Vec<Vec<f64>> = x.iter().map(|r| standardizer.transform(r)).collect();
    let d = z[0].len();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..y.len()).collect();
    let mut step = 0usize;
    let mut avg_w = vec![0.0; d];
    let mut avg_b = 0.0;
    for epoch in 0..params.epochs.max(1) {
        order.shuffle(&mut rng);
        let last = epoch + 1 == params.epochs.max(1);
        for &i in &order {
            step += 1;
            let eta = params.learning_rate / (1.0 + params.learning_rate * params.lambda * step as f64).sqrt();
            let pred = b + z[i].iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
            let r = y[i] - pred;
            let g = if r > params.epsilon {
                -1.0
            } else if r < -params.epsilon {
                1.0
            } else {
                0.0
            };
            for (wj, zj) in w.iter_mut().zip(&z[i]) {
                *wj -= eta * (params.lambda * *wj + g * zj);
            }
            b -= eta * g;
            if last {
                for (a, v) in avg_w.iter_mut().zip(&w) {
                    *a += v;
                }
                avg_b += b;
            }
        }
    }
    let n = y.len() as f64;
    Ok(LinearModel {
        standardizer,
        coef: avg_w.into_iter().map(|v| v / n).collect(),
        intercept: avg_b / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_data() -> (Vec<Vec<f64>>, Vec<f64>) {
        let x: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64 * 0.5, ((i * 7) % 5) as f64])
            .collect();
        let y = x.iter().map(|r| 2.0 * r[0] - r[1]).collect();
        (x, y)
    }

    #[test]
    fn ridge_zero_lambda_recovers_linear_map() {
        let (x, y) = linear_data();
        let m = train_ridge(&x, &y, 0.0).unwrap();
        for (r, t) in x.iter().zip(&y) {
            assert!((m.predict(r) - t).abs() < 1e-9);
        }
        // raw-scale coefficients 2 and -1
        let raw: Vec<f64> = m.coef.iter().zip(&m.standardizer.scale).map(|(c, s)| c / s).collect();
        assert!((raw[0] - 2.0).abs() < 1e-9 && (raw[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn ridge_huge_lambda_predicts_mean() {
        let (x, y) = linear_data();
        let m = train_ridge(&x, &y, 1e12).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!(m.coef.iter().all(|c| c.abs() < 1e-3));
        assert!((m.predict(&x[3]) - mean).abs() < 1e-3);
    }

    #[test]
    fn ridge_duplicate_columns_share_weight() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 3.0 * i as f64 + 1.0).collect();
        let m = train_ridge(&x, &y, 1.0).unwrap();
        assert!((m.coef[0] - m.coef[1]).abs() < 1e-9);
    }

    #[test]
    fn ridge_rejects_negative_lambda() {
        assert!(train_ridge(&[vec![1.0]], &[1.0], -1.0).is_err());
    }

    #[test]
    fn svr_inside_tube_stays_at_zero() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 0.05 } else { -0.05 }).collect();
        let m = train_linear_svr(&x, &y, SvrParams { epsilon: 0.1, ..SvrParams::default() }).unwrap();
        assert!(m.coef.iter().all(|&c| c == 0.0));
        assert_eq!(m.intercept, 0.0);
    }

    #[test]
    fn svr_fits_linear_data() {
        let (x, y) = linear_data();
        let m = train_linear_svr(&x, &y, SvrParams { epsilon: 0.01, ..SvrParams::default() }).unwrap();
        let mae = x.iter().zip(&y).map(|(r, t)| (m.predict(r) - t).abs()).sum::<f64>() / y.len() as f64;
        assert!(mae < 0.05, "mae {mae}");
    }

    #[test]
    fn svr_is_deterministic_per_seed() {
        let (x, y) = linear_data();
        let a = train_linear_svr(&x, &y, SvrParams::default()).unwrap();
        let b = train_linear_svr(&x, &y, SvrParams::default()).unwrap();
        assert_eq!(a, b);
    }
}
