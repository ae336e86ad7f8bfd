//! Full-batch gradient-descent logistic regression. Kept as a deliberately
//! plain baseline for demonstrating majority-class bias on imbalanced data.

use serde::{Deserialize, Serialize};

use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::vectorize::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticSpec {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Reserved for stochastic variants; the full-batch descent is
    /// deterministic regardless.
    pub seed: u64,
}

impl Default for LogisticSpec {
    fn default() -> Self {
        LogisticSpec {
            learning_rate: 0.5,
            epochs: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticBaseline {
    weights: Vec<f64>,
    bias: f64,
    spec: LogisticSpec,
}

impl LogisticBaseline {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Raw score `w . x + b`; positive favors the Positive class.
    pub fn decision_value(&self, x: &FeatureVector) -> Result<f64> {
        if x.dim() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                found: x.dim(),
            });
        }
        let mut z = self.bias;
        for &(col, v) in x.entries() {
            z += self.weights[col] * v;
        }
        Ok(z)
    }

    /// Positive iff the score is at least zero; zero epochs leaves all
    /// parameters at zero, so everything lands on the tie class.
    pub fn predict(&self, x: &FeatureVector) -> Result<Sentiment> {
        Ok(if self.decision_value(x)? >= 0.0 {
            Sentiment::Positive
        } else {
            Sentiment::Negative
        })
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Fit by full-batch gradient descent on the mean log-loss.
pub fn train_logistic_baseline(
    vectors: &[FeatureVector],
    labels: &[Sentiment],
    spec: &LogisticSpec,
) -> Result<LogisticBaseline> {
    if vectors.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    if vectors.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    if !(spec.learning_rate > 0.0) {
        return Err(Error::Config(format!(
            "learning rate {} must be positive",
            spec.learning_rate
        )));
    }
    let dim = vectors[0].dim();
    for v in vectors {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
    }
    let positives = labels.iter().filter(|&&l| l == Sentiment::Positive).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }

    let targets: Vec<f64> = labels
        .iter()
        .map(|&l| if l == Sentiment::Positive { 1.0 } else { 0.0 })
        .collect();
    let n = vectors.len() as f64;
    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;

    for _ in 0..spec.epochs {
        let mut grad_w = vec![0.0; dim];
        let mut grad_b = 0.0;
        for (x, &t) in vectors.iter().zip(&targets) {
            let mut z = bias;
            for &(col, v) in x.entries() {
                z += weights[col] * v;
            }
            let residual = sigmoid(z) - t;
            for &(col, v) in x.entries() {
                grad_w[col] += residual * v;
            }
            grad_b += residual;
        }
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= spec.learning_rate * g / n;
        }
        bias -= spec.learning_rate * grad_b / n;
    }

    Ok(LogisticBaseline {
        weights,
        bias,
        spec: *spec,
    })
}
