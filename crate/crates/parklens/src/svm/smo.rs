//! Sequential minimal optimization with maximal-violating-pair selection.
//!
//! State per training point: the multiplier `alpha_i` and the bias-free
//! decision value `u_i = sum_j alpha_j y_j K(x_j, x_i)`. The KKT violation
//! of a point is `v_i = y_i - u_i`; the solver stops when
//! `max_{I_up} v - min_{I_low} v <= tolerance`. Each accepted step solves
//! the two-variable subproblem exactly, so box constraints hold after every
//! update and the equality constraint is preserved by construction.

use std::collections::VecDeque;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::vectorize::FeatureVector;

use super::KernelSpec;

/// Default cap on cached kernel rows, in bytes.
const DEFAULT_CACHE_BYTES: usize = 256 * 1024 * 1024;

/// Snap tolerance for multipliers sitting numerically on a box bound.
const BOUND_SNAP: f64 = 1e-12;

/// Outcome of a single solver step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// The KKT gap is within tolerance; nothing was updated.
    Converged,
    /// One pair of multipliers was updated.
    Updated { i: usize, j: usize },
    /// The selected pair admits no progress (numerically degenerate).
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveSummary {
    pub iterations: usize,
    pub converged: bool,
}

/// On-demand kernel row cache with FIFO eviction.
struct RowCache {
    rows: Vec<Option<Rc<Vec<f64>>>>,
    resident: VecDeque<usize>,
    max_rows: usize,
}

impl RowCache {
    fn new(n: usize, cache_bytes: usize) -> Self {
        let max_rows = (cache_bytes / (8 * n.max(1))).max(2);
        RowCache {
            rows: vec![None; n],
            resident: VecDeque::new(),
            max_rows,
        }
    }

    fn get(&self, i: usize) -> Option<Rc<Vec<f64>>> {
        self.rows[i].clone()
    }

    fn insert(&mut self, i: usize, row: Rc<Vec<f64>>) {
        if self.rows[i].is_some() {
            return;
        }
        while self.resident.len() >= self.max_rows {
            if let Some(evict) = self.resident.pop_front() {
                self.rows[evict] = None;
            }
        }
        self.rows[i] = Some(row);
        self.resident.push_back(i);
    }
}

/// The working state of one SMO run.
pub struct SmoSolver<'a> {
    vectors: &'a [FeatureVector],
    labels: Vec<f64>,
    bounds: Vec<f64>,
    kernel: KernelSpec,
    tolerance: f64,
    alpha: Vec<f64>,
    /// Bias-free decision values on the training points.
    u: Vec<f64>,
    /// Kernel diagonal.
    diag: Vec<f64>,
    /// Squared norms, reused by the rbf row computation.
    norms2: Vec<f64>,
    cache: RowCache,
    iterations: usize,
}

impl<'a> SmoSolver<'a> {
    /// `labels` must be +1/-1; `bounds` are the per-example upper box
    /// limits `C_i`.
    pub fn new(
        vectors: &'a [FeatureVector],
        labels: &[f64],
        bounds: Vec<f64>,
        kernel: KernelSpec,
        tolerance: f64,
    ) -> Result<Self> {
        let n = vectors.len();
        if n == 0 {
            return Err(Error::Data("solver needs at least one training point".into()));
        }
        if labels.len() != n || bounds.len() != n {
            return Err(Error::Data("labels and bounds must match the vector count".into()));
        }
        if !labels.iter().all(|&y| y == 1.0 || y == -1.0) {
            return Err(Error::Data("labels must be +1 or -1".into()));
        }
        if !bounds.iter().all(|&c| c > 0.0 && c.is_finite()) {
            return Err(Error::Data("box bounds must be positive and finite".into()));
        }
        if !(tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance {tolerance} must be positive")));
        }
        kernel.validate()?;
        let dim = vectors[0].dim();
        for v in vectors {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.dim(),
                });
            }
        }

        let norms2: Vec<f64> = vectors.iter().map(|v| v.dot_unchecked(v)).collect();
        let diag: Vec<f64> = match kernel {
            KernelSpec::Linear => norms2.clone(),
            KernelSpec::Rbf { .. } => vec![1.0; n],
            KernelSpec::Polynomial { gamma, degree, coef0 } => norms2
                .iter()
                .map(|&n2| (gamma * n2 + coef0).powi(degree as i32))
                .collect(),
        };

        Ok(SmoSolver {
            vectors,
            labels: labels.to_vec(),
            bounds,
            kernel,
            tolerance,
            alpha: vec![0.0; n],
            u: vec![0.0; n],
            diag,
            norms2,
            cache: RowCache::new(n, DEFAULT_CACHE_BYTES),
            iterations: 0,
        })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `sum_i alpha_i y_i`, maintained at zero by the pairwise updates.
    pub fn equality_residual(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.labels)
            .map(|(&a, &y)| a * y)
            .sum()
    }

    /// Dual objective from the maintained decision values:
    /// `sum alpha - 1/2 sum_i alpha_i y_i u_i`.
    pub fn objective(&self) -> f64 {
        let linear: f64 = self.alpha.iter().sum();
        let quad: f64 = self
            .alpha
            .iter()
            .zip(&self.labels)
            .zip(&self.u)
            .map(|((&a, &y), &u)| a * y * u)
            .sum();
        linear - 0.5 * quad
    }

    fn in_up_set(&self, k: usize) -> bool {
        (self.labels[k] > 0.0 && self.alpha[k] < self.bounds[k])
            || (self.labels[k] < 0.0 && self.alpha[k] > 0.0)
    }

    fn in_low_set(&self, k: usize) -> bool {
        (self.labels[k] > 0.0 && self.alpha[k] > 0.0)
            || (self.labels[k] < 0.0 && self.alpha[k] < self.bounds[k])
    }

    /// Maximal violating pair: argmax of `v = y - u` over the up set and
    /// argmin over the low set. Ties resolve to the lowest index.
    fn select_pair(&self) -> Option<(usize, usize, f64)> {
        let mut best_up: Option<(f64, usize)> = None;
        let mut best_low: Option<(f64, usize)> = None;
        for k in 0..self.alpha.len() {
            let v = self.labels[k] - self.u[k];
            if self.in_up_set(k) && best_up.is_none_or(|(bv, _)| v > bv) {
                best_up = Some((v, k));
            }
            if self.in_low_set(k) && best_low.is_none_or(|(bv, _)| v < bv) {
                best_low = Some((v, k));
            }
        }
        let ((up_v, i), (low_v, j)) = (best_up?, best_low?);
        Some((i, j, up_v - low_v))
    }

    /// Current KKT gap `max_{I_up} v - min_{I_low} v`. Negative infinity
    /// when either set is empty (vacuously optimal).
    pub fn gap(&self) -> f64 {
        self.select_pair().map_or(f64::NEG_INFINITY, |(_, _, g)| g)
    }

    fn kernel_row(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(row) = self.cache.get(i) {
            return row;
        }
        let xi = &self.vectors[i];
        let row: Vec<f64> = match self.kernel {
            KernelSpec::Linear => self
                .vectors
                .iter()
                .map(|xk| xi.dot_unchecked(xk))
                .collect(),
            KernelSpec::Rbf { gamma } => self
                .vectors
                .iter()
                .enumerate()
                .map(|(k, xk)| {
                    let d2 = self.norms2[i] + self.norms2[k] - 2.0 * xi.dot_unchecked(xk);
                    (-gamma * d2.max(0.0)).exp()
                })
                .collect(),
            KernelSpec::Polynomial { gamma, degree, coef0 } => self
                .vectors
                .iter()
                .map(|xk| (gamma * xi.dot_unchecked(xk) + coef0).powi(degree as i32))
                .collect(),
        };
        let row = Rc::new(row);
        self.cache.insert(i, row.clone());
        row
    }

    /// One pair update. Box feasibility is maintained exactly: new
    /// multipliers are clipped to `[L, H]` and snapped onto a bound when
    /// within `BOUND_SNAP` of it.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let Some((i, j, gap)) = self.select_pair() else {
            return Ok(StepOutcome::Converged);
        };
        if gap <= self.tolerance {
            return Ok(StepOutcome::Converged);
        }

        let (yi, yj) = (self.labels[i], self.labels[j]);
        let (ai_old, aj_old) = (self.alpha[i], self.alpha[j]);
        let (ci, cj) = (self.bounds[i], self.bounds[j]);
        let s = yi * yj;

        let (low, high) = if s > 0.0 {
            let sum = ai_old + aj_old;
            ((sum - ci).max(0.0), sum.min(cj))
        } else {
            let diff = aj_old - ai_old;
            (diff.max(0.0), (ci + diff).min(cj))
        };
        if high - low <= 0.0 {
            return Ok(StepOutcome::Stalled);
        }

        let row_i = self.kernel_row(i);
        let kii = self.diag[i];
        let kjj = self.diag[j];
        let kij = row_i[j];
        let eta = kii + kjj - 2.0 * kij;

        let e_i = self.u[i] - yi;
        let e_j = self.u[j] - yj;

        let mut aj_new = if eta > 1e-15 {
            (aj_old + yj * (e_i - e_j) / eta).clamp(low, high)
        } else {
            // Flat direction: the objective is linear along the constraint
            // line, so the optimum sits at an endpoint.
            let delta_at = |t: f64| {
                let dj = t - aj_old;
                let di = -s * dj;
                (di + dj)
                    - (di * yi * self.u[i] + dj * yj * self.u[j])
                    - 0.5 * (di * di * kii + dj * dj * kjj + 2.0 * di * dj * s * kij)
            };
            if delta_at(high) > delta_at(low) {
                high
            } else {
                low
            }
        };
        if aj_new < BOUND_SNAP * cj.max(1.0) {
            aj_new = 0.0;
        } else if aj_new > cj - BOUND_SNAP * cj.max(1.0) {
            aj_new = cj;
        }
        aj_new = aj_new.clamp(low, high);

        let mut ai_new = ai_old + s * (aj_old - aj_new);
        if ai_new < BOUND_SNAP * ci.max(1.0) {
            ai_new = 0.0;
        } else if ai_new > ci - BOUND_SNAP * ci.max(1.0) {
            ai_new = ci;
        }
        ai_new = ai_new.clamp(0.0, ci);

        let delta_i = ai_new - ai_old;
        let delta_j = aj_new - aj_old;
        let scale = ci.max(cj).max(1.0);
        if delta_i.abs() <= 1e-14 * scale && delta_j.abs() <= 1e-14 * scale {
            return Ok(StepOutcome::Stalled);
        }

        self.alpha[i] = ai_new;
        self.alpha[j] = aj_new;

        let coef_i = delta_i * yi;
        for (uk, &kik) in self.u.iter_mut().zip(row_i.iter()) {
            *uk += coef_i * kik;
        }
        let row_j = self.kernel_row(j);
        let coef_j = delta_j * yj;
        for (uk, &kjk) in self.u.iter_mut().zip(row_j.iter()) {
            *uk += coef_j * kjk;
        }

        self.iterations += 1;
        Ok(StepOutcome::Updated { i, j })
    }

    /// Run until the KKT gap closes or `max_iterations` pair updates have
    /// been spent.
    pub fn solve(&mut self, max_iterations: usize) -> Result<SolveSummary> {
        loop {
            if self.iterations >= max_iterations {
                return Ok(SolveSummary {
                    iterations: self.iterations,
                    converged: self.gap() <= self.tolerance,
                });
            }
            match self.step()? {
                StepOutcome::Converged => {
                    return Ok(SolveSummary {
                        iterations: self.iterations,
                        converged: true,
                    });
                }
                StepOutcome::Stalled => {
                    return Ok(SolveSummary {
                        iterations: self.iterations,
                        converged: self.gap() <= self.tolerance,
                    });
                }
                StepOutcome::Updated { .. } => {}
            }
        }
    }

    /// Bias from the KKT conditions: the mean of `y_i - u_i` over free
    /// support vectors, or the midpoint of the feasible interval when no
    /// multiplier is strictly inside the box.
    pub fn bias(&self) -> f64 {
        let mut free_sum = 0.0;
        let mut free_count = 0usize;
        for k in 0..self.alpha.len() {
            if self.alpha[k] > 0.0 && self.alpha[k] < self.bounds[k] {
                free_sum += self.labels[k] - self.u[k];
                free_count += 1;
            }
        }
        if free_count > 0 {
            return free_sum / free_count as f64;
        }
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for k in 0..self.alpha.len() {
            let v = self.labels[k] - self.u[k];
            if self.in_up_set(k) {
                lo = lo.max(v);
            }
            if self.in_low_set(k) {
                hi = hi.min(v);
            }
        }
        if lo.is_finite() && hi.is_finite() {
            0.5 * (lo + hi)
        } else if lo.is_finite() {
            lo
        } else if hi.is_finite() {
            hi
        } else {
            0.0
        }
    }

    /// Bias-free decision values on the training points (test hook).
    pub fn decision_values_bias_free(&self) -> &[f64] {
        &self.u
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::WeightScheme;

    fn fv(values: &[f64]) -> FeatureVector {
        FeatureVector::from_dense(WeightScheme::Count, values)
    }

    fn solve_case(
        points: &[&[f64]],
        labels: &[f64],
        c: f64,
        kernel: KernelSpec,
    ) -> (Vec<f64>, f64, bool) {
        let vectors: Vec<FeatureVector> = points.iter().map(|p| fv(p)).collect();
        let bounds = vec![c; vectors.len()];
        let mut solver = SmoSolver::new(&vectors, labels, bounds, kernel, 1e-8).unwrap();
        let summary = solver.solve(10_000).unwrap();
        (solver.alpha().to_vec(), solver.bias(), summary.converged)
    }

    #[test]
    fn two_point_case_reaches_the_analytic_optimum() {
        let (alpha, bias, converged) =
            solve_case(&[&[-1.0], &[1.0]], &[-1.0, 1.0], 100.0, KernelSpec::Linear);
        assert!(converged);
        assert!((alpha[0] - 0.5).abs() < 1e-8);
        assert!((alpha[1] - 0.5).abs() < 1e-8);
        assert!(bias.abs() < 1e-8);
    }

    #[test]
    fn constraints_hold_after_every_update() {
        let vectors = vec![
            fv(&[0.1, 1.2]),
            fv(&[1.4, 0.3]),
            fv(&[0.2, 0.9]),
            fv(&[1.1, 0.1]),
            fv(&[0.4, 1.4]),
            fv(&[0.9, 0.6]),
        ];
        let labels = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let bounds = vec![5.0; 6];
        let mut solver =
            SmoSolver::new(&vectors, &labels, bounds.clone(), KernelSpec::Linear, 1e-8).unwrap();
        for _ in 0..500 {
            let outcome = solver.step().unwrap();
            for (k, &a) in solver.alpha().iter().enumerate() {
                assert!(a >= 0.0 && a <= bounds[k], "alpha[{k}] = {a} escaped the box");
            }
            assert!(solver.equality_residual().abs() < 1e-10);
            if outcome == StepOutcome::Converged {
                break;
            }
        }
        assert!(solver.gap() <= 1e-8);
    }

    #[test]
    fn objective_is_monotone_over_accepted_steps() {
        let vectors = vec![
            fv(&[0.0, 0.0]),
            fv(&[1.0, 1.1]),
            fv(&[0.4, -0.2]),
            fv(&[1.2, 0.9]),
            fv(&[-0.3, 0.4]),
            fv(&[1.5, 1.4]),
        ];
        let labels = vec![-1.0, 1.0, -1.0, 1.0, -1.0, 1.0];
        let mut solver = SmoSolver::new(
            &vectors,
            &labels,
            vec![3.0; 6],
            KernelSpec::Rbf { gamma: 0.7 },
            1e-9,
        )
        .unwrap();
        let mut last = solver.objective();
        for _ in 0..1000 {
            match solver.step().unwrap() {
                StepOutcome::Updated { .. } => {
                    let now = solver.objective();
                    assert!(now >= last - 1e-12, "objective decreased: {last} -> {now}");
                    last = now;
                }
                _ => break,
            }
        }
    }

    #[test]
    fn rbf_diagonal_is_one() {
        let vectors = vec![fv(&[0.4, 0.2]), fv(&[3.0, -1.0])];
        let solver = SmoSolver::new(
            &vectors,
            &[1.0, -1.0],
            vec![1.0; 2],
            KernelSpec::Rbf { gamma: 2.0 },
            1e-6,
        )
        .unwrap();
        assert_eq!(solver.diag, vec![1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let vectors = vec![fv(&[0.0]), fv(&[1.0])];
        assert!(SmoSolver::new(&vectors, &[1.0, 2.0], vec![1.0; 2], KernelSpec::Linear, 1e-6)
            .is_err());
        assert!(SmoSolver::new(&vectors, &[1.0, -1.0], vec![0.0; 2], KernelSpec::Linear, 1e-6)
            .is_err());
        assert!(
            SmoSolver::new(&vectors, &[1.0, -1.0], vec![1.0; 2], KernelSpec::Linear, 0.0).is_err()
        );
    }
}
