//! Class-weighted kernel SVM trained by sequential minimal optimization on
//! the dual problem, plus a logistic-regression baseline.
//!
//! The dual being solved is
//!
//! ```text
//! maximize  sum_i mu_i - 1/2 sum_ij mu_i mu_j y_i y_j K(x_i, x_j)
//! s.t.      0 <= mu_i <= C_i,   sum_i mu_i y_i = 0
//! ```
//!
//! and the decision function is `f(x) = sum_i mu_i y_i K(x_i, x) + bias`.
//! Per-class box bounds `C_i = C * w(y_i)` implement cost-sensitive
//! training for imbalanced data.

pub mod logistic;
pub mod smo;

pub use logistic::{train_logistic_baseline, LogisticBaseline, LogisticSpec};
pub use smo::{SmoSolver, SolveSummary, StepOutcome};

use serde::{Deserialize, Serialize};

use crate::corpus::Sentiment;
use crate::error::{Error, Result};
use crate::vectorize::FeatureVector;

/// Kernel function selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Rbf { gamma: f64 },
    Polynomial { gamma: f64, degree: u32, coef0: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Linear => Ok(()),
            KernelSpec::Rbf { gamma } => {
                if gamma > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("rbf gamma {gamma} must be positive")))
                }
            }
            KernelSpec::Polynomial { gamma, degree, .. } => {
                if gamma <= 0.0 {
                    Err(Error::Config(format!("polynomial gamma {gamma} must be positive")))
                } else if degree < 1 {
                    Err(Error::Config("polynomial degree must be at least 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Evaluate the kernel on two equal-dimension vectors.
pub fn kernel_eval(spec: &KernelSpec, x: &FeatureVector, x_prime: &FeatureVector) -> Result<f64> {
    x.check_dim(x_prime)?;
    Ok(kernel_eval_unchecked(spec, x, x_prime))
}

pub(crate) fn kernel_eval_unchecked(
    spec: &KernelSpec,
    x: &FeatureVector,
    x_prime: &FeatureVector,
) -> f64 {
    match *spec {
        KernelSpec::Linear => x.dot_unchecked(x_prime),
        KernelSpec::Rbf { gamma } => (-gamma * x.squared_distance_unchecked(x_prime)).exp(),
        KernelSpec::Polynomial { gamma, degree, coef0 } => {
            (gamma * x.dot_unchecked(x_prime) + coef0).powi(degree as i32)
        }
    }
}

/// Training parameters. When `class_weights` is `None` the per-class
/// multipliers default to inverse class frequency, `w_c = n / (2 n_c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    /// Misclassification cost.
    pub c: f64,
    /// `(w_positive, w_negative)` multipliers applied as `C_i = c * w(y_i)`.
    pub class_weights: Option<(f64, f64)>,
    /// KKT violation bound used as the stopping rule.
    pub tolerance: f64,
    /// Cap on solver pair updates.
    pub max_passes: usize,
    /// Reserved for stochastic solvers; echoed into model metadata.
    pub seed: u64,
}

impl Default for TrainSpec {
    fn default() -> Self {
        TrainSpec {
            c: 1.0,
            class_weights: None,
            tolerance: 1e-3,
            max_passes: 100_000,
            seed: 0,
        }
    }
}

impl TrainSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::Config(format!("cost C = {} must be positive", self.c)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        if let Some((wp, wn)) = self.class_weights {
            if !(wp > 0.0 && wn > 0.0) {
                return Err(Error::Config(format!(
                    "class weights ({wp}, {wn}) must be positive"
                )));
            }
        }
        if self.max_passes == 0 {
            return Err(Error::Config("max_passes must be at least 1".into()));
        }
        Ok(())
    }
}

/// Solver facts recorded on the trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub c: f64,
    pub class_weights: (f64, f64),
    pub tolerance: f64,
}

/// A trained support vector machine. Zero-coefficient points are dropped;
/// `coefficients[i]` stores `mu_i * y_i` for the i-th stored vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    dim: usize,
    kernel: KernelSpec,
    support_vectors: Vec<FeatureVector>,
    coefficients: Vec<f64>,
    bias: f64,
    meta: TrainMeta,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn support_vectors(&self) -> &[FeatureVector] {
        &self.support_vectors
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn meta(&self) -> &TrainMeta {
        &self.meta
    }

    pub fn converged(&self) -> bool {
        self.meta.converged
    }

    /// Decision value `f(x)` over the stored support vectors. An empty
    /// support set degenerates to the bias.
    pub fn decision_value(&self, x: &FeatureVector) -> Result<f64> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        let mut sum = self.bias;
        for (sv, coef) in self.support_vectors.iter().zip(&self.coefficients) {
            sum += coef * kernel_eval_unchecked(&self.kernel, sv, x);
        }
        Ok(sum)
    }

    /// Positive iff `f(x) >= 0`; the tie at exactly zero predicts Positive.
    pub fn predict(&self, x: &FeatureVector) -> Result<Sentiment> {
        Ok(if self.decision_value(x)? >= 0.0 {
            Sentiment::Positive
        } else {
            Sentiment::Negative
        })
    }
}

pub(crate) fn label_sign(label: Sentiment) -> f64 {
    match label {
        Sentiment::Positive => 1.0,
        Sentiment::Negative => -1.0,
    }
}

/// Resolve per-class multipliers: explicit weights, otherwise inverse class
/// frequency.
pub fn resolve_class_weights(
    spec: &TrainSpec,
    n_positive: usize,
    n_negative: usize,
) -> (f64, f64) {
    match spec.class_weights {
        Some(w) => w,
        None => {
            let n = (n_positive + n_negative) as f64;
            (n / (2.0 * n_positive as f64), n / (2.0 * n_negative as f64))
        }
    }
}

/// Train a class-weighted SVM with the SMO solver.
///
/// Returns an error when only one class is present. Hitting `max_passes`
/// before the KKT gap closes is *not* an error: the partial model is
/// returned with its convergence flag cleared.
pub fn train_svm(
    vectors: &[FeatureVector],
    labels: &[Sentiment],
    spec: &TrainSpec,
    kernel: &KernelSpec,
) -> Result<SvmModel> {
    spec.validate()?;
    kernel.validate()?;
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
    let dim = vectors[0].dim();
    for v in vectors {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
    }
    let n_positive = labels.iter().filter(|&&l| l == Sentiment::Positive).count();
    let n_negative = labels.len() - n_positive;
    if n_positive == 0 || n_negative == 0 {
        return Err(Error::SingleClass);
    }

    let (w_pos, w_neg) = resolve_class_weights(spec, n_positive, n_negative);
    let y: Vec<f64> = labels.iter().map(|&l| label_sign(l)).collect();
    let bounds: Vec<f64> = labels
        .iter()
        .map(|&l| match l {
            Sentiment::Positive => spec.c * w_pos,
            Sentiment::Negative => spec.c * w_neg,
        })
        .collect();

    let mut solver = SmoSolver::new(vectors, &y, bounds, kernel.clone(), spec.tolerance)?;
    let summary = solver.solve(spec.max_passes)?;
    let bias = solver.bias();
    let objective = solver.objective();

    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &a) in solver.alpha().iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(vectors[i].clone());
            coefficients.push(a * y[i]);
        }
    }

    Ok(SvmModel {
        dim,
        kernel: kernel.clone(),
        support_vectors,
        coefficients,
        bias,
        meta: TrainMeta {
            objective,
            iterations: summary.iterations,
            converged: summary.converged,
            c: spec.c,
            class_weights: (w_pos, w_neg),
            tolerance: spec.tolerance,
        },
    })
}

/// Dual objective `sum mu - 1/2 sum_ij mu_i mu_j y_i y_j K(x_i, x_j)` for an
/// arbitrary multiplier vector. Quadratic in the input size; intended for
/// small problems and verification.
pub fn dual_objective(
    alpha: &[f64],
    labels: &[f64],
    vectors: &[FeatureVector],
    kernel: &KernelSpec,
) -> Result<f64> {
    if alpha.len() != vectors.len() || labels.len() != vectors.len() {
        return Err(Error::Data("alpha, labels, and vectors must have equal length".into()));
    }
    let mut linear = 0.0;
    for &a in alpha {
        linear += a;
    }
    let mut quad = 0.0;
    for i in 0..vectors.len() {
        for j in 0..vectors.len() {
            quad += alpha[i]
                * alpha[j]
                * labels[i]
                * labels[j]
                * kernel_eval(kernel, &vectors[i], &vectors[j])?;
        }
    }
    Ok(linear - 0.5 * quad)
}
