//! Synthetic minority oversampling: interpolate new minority-class vectors
//! between each sampled point and one of its k nearest minority neighbors.
//!
//! Two interpolation modes are provided. `Standard` is the classic
//! `S + alpha * (S' - S)`, which keeps every synthetic point on the segment
//! between parent and neighbor. `PaperLiteral` is `S + alpha * |S - S'|`
//! per coordinate, which extrapolates away from the neighbor whenever
//! `S > S'`; it is kept selectable so that behavior stays testable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vectorize::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpolationMode {
    Standard,
    PaperLiteral,
}

/// Oversampling parameters. `rate_r` is the output size as a multiple of
/// the minority count: `floor(rate_r * m)` synthetic samples are produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OversampleSpec {
    pub k: usize,
    pub rate_r: f64,
    pub mode: InterpolationMode,
    pub seed: u64,
}

impl OversampleSpec {
    pub fn validate(&self, minority_size: usize) -> Result<()> {
        if minority_size == 0 {
            return Err(Error::Data("minority set is empty".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("neighbor count k must be at least 1".into()));
        }
        if self.k >= minority_size {
            return Err(Error::Data(format!(
                "k = {} must be smaller than the minority size m = {minority_size}",
                self.k
            )));
        }
        if !(self.rate_r > 0.0) {
            return Err(Error::Config(format!(
                "oversampling rate {} must be positive",
                self.rate_r
            )));
        }
        Ok(())
    }
}

/// One synthetic minority observation and its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub vector: FeatureVector,
    pub parent_index: usize,
    pub neighbor_index: usize,
    pub alpha: f64,
}

/// Indices of the `k` nearest neighbors of `point_index` within the
/// minority set (Euclidean distance, the point itself excluded, ties broken
/// by ascending index).
pub fn k_nearest_neighbors(
    point_index: usize,
    minority_set: &[FeatureVector],
    k: usize,
) -> Result<Vec<usize>> {
    if point_index >= minority_set.len() {
        return Err(Error::Data(format!(
            "point index {point_index} outside minority set of size {}",
            minority_set.len()
        )));
    }
    if k >= minority_set.len() {
        return Err(Error::Data(format!(
            "k = {k} must be smaller than the minority size m = {}",
            minority_set.len()
        )));
    }
    let point = &minority_set[point_index];
    let mut distances: Vec<(f64, usize)> = Vec::with_capacity(minority_set.len() - 1);
    for (i, other) in minority_set.iter().enumerate() {
        if i == point_index {
            continue;
        }
        distances.push((point.squared_distance(other)?, i));
    }
    distances.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
    Ok(distances.into_iter().take(k).map(|(_, i)| i).collect())
}

/// Interpolate a synthetic vector between `s` (parent) and `s_prime`
/// (neighbor) at position `alpha`.
pub fn synthesize_sample(
    s: &FeatureVector,
    s_prime: &FeatureVector,
    alpha: f64,
    mode: InterpolationMode,
) -> Result<FeatureVector> {
    s.check_dim(s_prime)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Data(format!("alpha {alpha} outside [0, 1]")));
    }
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(s.nnz() + s_prime.nnz());
    let (a, b) = (s.entries(), s_prime.entries());
    let (mut i, mut j) = (0, 0);
    let mut push = |col: usize, sv: f64, pv: f64| {
        let value = match mode {
            InterpolationMode::Standard => sv + alpha * (pv - sv),
            InterpolationMode::PaperLiteral => sv + alpha * (sv - pv).abs(),
        };
        if value != 0.0 {
            entries.push((col, value));
        }
    };
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(&(ca, sv)), Some(&(cb, pv))) if ca == cb => {
                push(ca, sv, pv);
                i += 1;
                j += 1;
            }
            (Some(&(ca, sv)), Some(&(cb, _))) if ca < cb => {
                push(ca, sv, 0.0);
                i += 1;
            }
            (Some(_), Some(&(cb, pv))) => {
                push(cb, 0.0, pv);
                j += 1;
            }
            (Some(&(ca, sv)), None) => {
                push(ca, sv, 0.0);
                i += 1;
            }
            (None, Some(&(cb, pv))) => {
                push(cb, 0.0, pv);
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    FeatureVector::new(s.dim(), s.scheme(), entries)
}

/// Generate `floor(rate_r * m)` synthetic minority samples.
///
/// Each sample draws a uniform parent, a uniform choice among the parent's
/// k nearest neighbors, and a fresh `alpha` in [0, 1); the sequence is fully
/// determined by `spec.seed`.
pub fn oversample(
    minority_vectors: &[FeatureVector],
    spec: &OversampleSpec,
) -> Result<Vec<SyntheticSample>> {
    let m = minority_vectors.len();
    spec.validate(m)?;

    let neighbors: Vec<Vec<usize>> = (0..m)
        .map(|i| k_nearest_neighbors(i, minority_vectors, spec.k))
        .collect::<Result<_>>()?;

    let count = (spec.rate_r * m as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let parent_index = rng.random_range(0..m);
        let neighbor_index = neighbors[parent_index][rng.random_range(0..spec.k)];
        let alpha: f64 = rng.random();
        let vector = synthesize_sample(
            &minority_vectors[parent_index],
            &minority_vectors[neighbor_index],
            alpha,
            spec.mode,
        )?;
        samples.push(SyntheticSample {
            vector,
            parent_index,
            neighbor_index,
            alpha,
        });
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::WeightScheme;

    fn vec2(x: f64, y: f64) -> FeatureVector {
        FeatureVector::from_dense(WeightScheme::Count, &[x, y])
    }

    #[test]
    fn nearest_neighbor_by_euclidean_distance() {
        let points = vec![vec2(0.0, 0.0), vec2(1.0, 0.0), vec2(5.0, 0.0)];
        assert_eq!(k_nearest_neighbors(0, &points, 1).unwrap(), vec![1]);
        assert_eq!(k_nearest_neighbors(0, &points, 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn duplicate_points_tie_break_by_index() {
        let points = vec![vec2(0.0, 0.0), vec2(3.0, 0.0), vec2(0.0, 0.0), vec2(0.0, 0.0)];
        assert_eq!(k_nearest_neighbors(0, &points, 2).unwrap(), vec![2, 3]);
    }

    #[test]
    fn k_must_be_smaller_than_m() {
        let points = vec![vec2(0.0, 0.0), vec2(1.0, 0.0)];
        assert!(k_nearest_neighbors(0, &points, 2).is_err());
    }

    #[test]
    fn standard_interpolation_midpoint() {
        let s = vec2(0.0, 0.0);
        let s_prime = vec2(2.0, 2.0);
        let out = synthesize_sample(&s, &s_prime, 0.5, InterpolationMode::Standard).unwrap();
        assert_eq!(out.to_dense(), vec![1.0, 1.0]);
    }

    #[test]
    fn alpha_zero_returns_parent_in_both_modes() {
        let s = vec2(2.0, 1.0);
        let s_prime = vec2(0.0, 5.0);
        for mode in [InterpolationMode::Standard, InterpolationMode::PaperLiteral] {
            let out = synthesize_sample(&s, &s_prime, 0.0, mode).unwrap();
            assert_eq!(out.to_dense(), s.to_dense());
        }
    }

    #[test]
    fn modes_diverge_when_parent_exceeds_neighbor() {
        let s = vec2(2.0, 2.0);
        let s_prime = vec2(0.0, 0.0);
        let std = synthesize_sample(&s, &s_prime, 0.5, InterpolationMode::Standard).unwrap();
        assert_eq!(std.to_dense(), vec![1.0, 1.0]);
        let lit = synthesize_sample(&s, &s_prime, 0.5, InterpolationMode::PaperLiteral).unwrap();
        assert_eq!(lit.to_dense(), vec![3.0, 3.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = vec2(1.0, 1.0);
        let other = FeatureVector::from_dense(WeightScheme::Count, &[1.0]);
        assert!(synthesize_sample(&s, &other, 0.5, InterpolationMode::Standard).is_err());
    }

    fn minority_cloud(m: usize, seed: u64) -> Vec<FeatureVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| vec2(rng.random::<f64>() * 4.0, rng.random::<f64>() * 4.0))
            .collect()
    }

    #[test]
    fn output_count_follows_rate() {
        let cloud = minority_cloud(10, 3);
        for (rate, expected) in [(0.6, 6), (2.0, 20), (1.0, 10)] {
            let spec = OversampleSpec {
                k: 3,
                rate_r: rate,
                mode: InterpolationMode::Standard,
                seed: 11,
            };
            assert_eq!(oversample(&cloud, &spec).unwrap().len(), expected);
        }
    }

    #[test]
    fn oversampling_is_deterministic() {
        let cloud = minority_cloud(12, 5);
        let spec = OversampleSpec {
            k: 4,
            rate_r: 1.5,
            mode: InterpolationMode::Standard,
            seed: 77,
        };
        assert_eq!(oversample(&cloud, &spec).unwrap(), oversample(&cloud, &spec).unwrap());
    }

    #[test]
    fn synthetic_points_stay_on_the_segment() {
        let cloud = minority_cloud(20, 9);
        let spec = OversampleSpec {
            k: 5,
            rate_r: 1.0,
            mode: InterpolationMode::Standard,
            seed: 13,
        };
        for sample in oversample(&cloud, &spec).unwrap() {
            assert_ne!(sample.parent_index, sample.neighbor_index);
            let p = cloud[sample.parent_index].to_dense();
            let q = cloud[sample.neighbor_index].to_dense();
            for (j, v) in sample.vector.to_dense().into_iter().enumerate() {
                let (lo, hi) = (p[j].min(q[j]), p[j].max(q[j]));
                assert!(
                    v >= lo - 1e-12 && v <= hi + 1e-12,
                    "coordinate {j} = {v} outside [{lo}, {hi}]"
                );
            }
        }
    }

    #[test]
    fn empty_minority_set_is_an_error() {
        let spec = OversampleSpec {
            k: 1,
            rate_r: 1.0,
            mode: InterpolationMode::Standard,
            seed: 0,
        };
        assert!(oversample(&[], &spec).is_err());
    }
}
