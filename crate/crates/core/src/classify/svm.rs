//! One-vs-rest linear SVM trained by hinge-loss subgradient descent
//! (Pegasos step schedule). The bias acts as the weight of a constant unit
//! feature and is regularized with the rest.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// L2 regularization strength.
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-4,
            epochs: 100,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    /// `[classes][features]`
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LinearSvm {
    pub fn features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    /// Trains one binary classifier per class; `labels` are class indices
    /// below `classes`.
    pub fn train(xs: &[Vec<f64>], labels: &[usize], classes: usize, config: &SvmConfig) -> Result<Self> {
        if xs.is_empty() || xs.len() != labels.len() {
            return Err(Error::invalid("need equally many (non-zero) samples and labels"));
        }
        let dim = xs[0].len();
        if dim == 0 || xs.iter().any(|x| x.len() != dim) {
            return Err(Error::shape("feature vectors must share a non-zero length"));
        }
        if labels.iter().any(|&l| l >= classes) {
            return Err(Error::invalid("label index out of range"));
        }
        if !(config.lambda > 0.0) {
            return Err(Error::invalid("lambda must be positive"));
        }
        let mut weights = vec![vec![0.0; dim]; classes];
        let mut bias = vec![0.0; classes];
        let mut rng = seeded(config.seed);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let mut t = 0usize;
        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (config.lambda * t as f64);
                let shrink = 1.0 - eta * config.lambda;
                let x = &xs[i];
                for (c, (w, b)) in weights.iter_mut().zip(bias.iter_mut()).enumerate() {
                    let y = if labels[i] == c { 1.0 } else { -1.0 };
                    let margin = y * (dot(w, x) + *b);
                    w.iter_mut().for_each(|v| *v *= shrink);
                    *b *= shrink;
                    if margin < 1.0 {
                        for (v, xv) in w.iter_mut().zip(x) {
                            *v += eta * y * xv;
                        }
                        *b += eta * y;
                    }
                }
            }
        }
        Ok(Self { weights, bias })
    }

    pub fn margins(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.features() {
            return Err(Error::shape(format!(
                "expected {} features, got {}",
                self.features(),
                x.len()
            )));
        }
        Ok(self.weights.iter().zip(&self.bias).map(|(w, b)| dot(w, x) + b).collect())
    }

    /// Class with the largest margin (smallest index on ties).
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let m = self.margins(x)?;
        Ok(crate::nn::recurrent::argmax(&m))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 0..20 {
            let t = k as f64 / 20.0;
            xs.push(vec![0.1 + 0.3 * t, 0.8 - 0.2 * t]);
            ys.push(0);
            xs.push(vec![0.6 + 0.3 * t, 0.2 + 0.2 * t]);
            ys.push(1);
        }
        (xs, ys)
    }

    #[test]
    fn separable_toy_is_fit_exactly() {
        let (xs, ys) = toy();
        let svm = LinearSvm::train(&xs, &ys, 2, &SvmConfig::default()).unwrap();
        for (x, &y) in xs.iter().zip(&ys) {
            assert_eq!(svm.predict(x).unwrap(), y);
        }
    }

    #[test]
    fn deterministic() {
        let (xs, ys) = toy();
        let cfg = SvmConfig {
            epochs: 5,
            ..Default::default()
        };
        assert_eq!(
            LinearSvm::train(&xs, &ys, 2, &cfg).unwrap(),
            LinearSvm::train(&xs, &ys, 2, &cfg).unwrap()
        );
    }

    #[test]
    fn wrong_feature_length_rejected() {
        let (xs, ys) = toy();
        let svm = LinearSvm::train(&xs, &ys, 2, &SvmConfig::default()).unwrap();
        assert!(svm.predict(&[0.0, 0.0, 0.0]).is_err());
    }
}
