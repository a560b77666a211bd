//! k-Disagreeing-Neighbors instance hardness.
//!
//! The hardness of an instance is the fraction of its k nearest neighbors
//! (Euclidean distance, the instance itself excluded) whose class label
//! disagrees with its own. Values land on the grid {0, 1/k, ..., 1}: an
//! instance deep inside its class scores 0, one surrounded by other classes
//! scores 1. Features are expected to be min-max scaled beforehand so that
//! no single feature dominates the distances.

use thiserror::Error;

use crate::dataset::Dataset;

#[derive(Debug, Error)]
pub enum HardnessError {
    #[error("k = {k} must be smaller than the number of instances ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be >= 1")]
    KZero,
    #[error("query index {query} out of range for {n} instances")]
    QueryOutOfRange { query: usize, n: usize },
    #[error("hardness value {value} at index {index} is outside [0, 1]")]
    InvalidValue { index: usize, value: f64 },
}

/// Per-instance kDN values for one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct HardnessProfile {
    values: Vec<f64>,
    k: usize,
}

impl HardnessProfile {
    /// Wrap precomputed hardness values. Every value must lie in [0, 1];
    /// `k` is recorded so downstream consumers know the grid resolution.
    pub fn new(values: Vec<f64>, k: usize) -> Result<Self, HardnessError> {
        if k == 0 {
            return Err(HardnessError::KZero);
        }
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(HardnessError::InvalidValue { index, value });
            }
        }
        Ok(Self { values, k })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Indices of the k nearest neighbors of `query_index`, nearest first.
///
/// The query instance is never its own neighbor; exact duplicates of it are
/// eligible. Distance ties break by ascending instance index, which makes
/// the result deterministic. Brute force over all pairs.
pub fn knn_indices(d: &Dataset, query_index: usize, k: usize) -> Result<Vec<usize>, HardnessError> {
    let n = d.n_instances();
    if query_index >= n {
        return Err(HardnessError::QueryOutOfRange {
            query: query_index,
            n,
        });
    }
    if k == 0 {
        return Err(HardnessError::KZero);
    }
    if k >= n {
        return Err(HardnessError::KTooLarge { k, n });
    }
    let query = d.row(query_index);
    let mut candidates: Vec<(f64, usize)> = (0..n)
        .filter(|&j| j != query_index)
        .map(|j| (squared_distance(query, d.row(j)), j))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| {
        a.0.partial_cmp(&b.0)
            .expect("distances are finite")
            .then(a.1.cmp(&b.1))
    };
    candidates.select_nth_unstable_by(k - 1, cmp);
    candidates.truncate(k);
    candidates.sort_unstable_by(cmp);
    Ok(candidates.into_iter().map(|(_, j)| j).collect())
}

/// kDN hardness of every instance: disagreeing neighbors divided by k.
pub fn kdn(d: &Dataset, k: usize) -> Result<HardnessProfile, HardnessError> {
    let mut values = Vec::with_capacity(d.n_instances());
    for i in 0..d.n_instances() {
        let neighbors = knn_indices(d, i, k)?;
        let disagreeing = neighbors
            .iter()
            .filter(|&&j| d.labels()[j] != d.labels()[i])
            .count();
        values.push(disagreeing as f64 / k as f64);
    }
    Ok(HardnessProfile { values, k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synth_blobs;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line_dataset(points: &[f64], labels: &[usize], class_count: usize) -> Dataset {
        Dataset::new(points.to_vec(), 1, labels.to_vec(), "line", class_count).unwrap()
    }

    #[test]
    fn nearest_of_three_points() {
        let d = line_dataset(&[0.0, 1.0, 10.0], &[0, 1, 0], 2);
        assert_eq!(knn_indices(&d, 0, 1).unwrap(), vec![1]);
        assert_eq!(knn_indices(&d, 2, 1).unwrap(), vec![1]);
    }

    #[test]
    fn duplicate_of_query_is_included_but_query_is_not() {
        let d = line_dataset(&[5.0, 5.0, 6.0], &[0, 1, 0], 2);
        assert_eq!(knn_indices(&d, 0, 1).unwrap(), vec![1]);
        assert_eq!(knn_indices(&d, 1, 1).unwrap(), vec![0]);
    }

    #[test]
    fn distance_ties_break_by_ascending_index() {
        // points at +/-1 are equidistant from the query at 0
        let d = line_dataset(&[0.0, 1.0, -1.0, 2.0], &[0, 1, 0, 1], 2);
        assert_eq!(knn_indices(&d, 0, 2).unwrap(), vec![1, 2]);
    }

    #[test]
    fn k_must_be_less_than_n() {
        let d = line_dataset(&[0.0, 1.0], &[0, 1], 2);
        assert!(matches!(
            knn_indices(&d, 0, 1),
            Ok(ref v) if v == &vec![1]
        ));
        assert!(matches!(
            knn_indices(&d, 0, 2),
            Err(HardnessError::KTooLarge { .. })
        ));
    }

    /// Brute-force oracle: sort all pairwise distances outright.
    fn knn_oracle(d: &Dataset, query: usize, k: usize) -> Vec<usize> {
        let mut all: Vec<(f64, usize)> = (0..d.n_instances())
            .filter(|&j| j != query)
            .map(|j| {
                let dist: f64 = d
                    .row(query)
                    .iter()
                    .zip(d.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (dist, j)
            })
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|(_, j)| j).collect()
    }

    #[test]
    fn matches_exhaustive_sort_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 50;
        let features: Vec<f64> = (0..n * 3).map(|_| rng.gen::<f64>()).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let d = Dataset::new(features, 3, labels, "rand", 3).unwrap();
        for q in 0..n {
            assert_eq!(knn_indices(&d, q, 5).unwrap(), knn_oracle(&d, q, 5));
        }
    }

    #[test]
    fn kdn_bounds_and_arithmetic() {
        // 6 instances of class 0 clustered together, far from 6 of class 1:
        // every instance agrees with all 5 neighbors.
        let mut points = vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
        points.extend([100.0, 100.1, 100.2, 100.3, 100.4, 100.5]);
        let labels = vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1];
        let d = line_dataset(&points, &labels, 2);
        let h = kdn(&d, 5).unwrap();
        assert!(h.values().iter().all(|&v| v == 0.0));

        // Lone class-1 instance amid class 0: all 5 neighbors disagree.
        let d = line_dataset(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5], &[0, 0, 1, 0, 0, 0], 2);
        let h = kdn(&d, 5).unwrap();
        assert_eq!(h.values()[2], 1.0);

        // 2 of 5 neighbors disagree -> 0.4
        let d = line_dataset(
            &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            &[0, 0, 0, 0, 1, 1],
            2,
        );
        let h = kdn(&d, 5).unwrap();
        assert_eq!(h.values()[0], 2.0 / 5.0);
    }

    #[test]
    fn kdn_single_class_is_all_zero() {
        let d = synth_blobs(2, 20, 2, 0.3, 1)
            .unwrap()
            .with_labels(vec![0; 40])
            .unwrap();
        let h = kdn(&d, 5).unwrap();
        assert!(h.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn kdn_values_lie_on_the_1_over_k_grid() {
        let d = synth_blobs(3, 20, 2, 0.5, 8).unwrap();
        let k = 5;
        let h = kdn(&d, k).unwrap();
        for &v in h.values() {
            let scaled = v * k as f64;
            assert_eq!(scaled, scaled.round());
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn kdn_invariant_under_instance_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 30;
        let features: Vec<f64> = (0..n * 2).map(|_| rng.gen::<f64>()).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let d = Dataset::new(features, 2, labels, "perm", 2).unwrap();
        let h = kdn(&d, 5).unwrap();

        let perm: Vec<usize> = (0..n).rev().collect();
        let shuffled = d.subset(&perm).unwrap();
        let h2 = kdn(&shuffled, 5).unwrap();
        for (new_pos, &old_pos) in perm.iter().enumerate() {
            assert_eq!(h2.values()[new_pos], h.values()[old_pos]);
        }
    }
}
