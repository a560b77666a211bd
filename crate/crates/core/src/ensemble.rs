//! Pool generation and pooled prediction.
//!
//! All three pool builders share one skeleton: derive a sub-seed per member,
//! assemble that member's training material, train a perceptron. Bagging
//! draws uniform bootstraps; Bagging-IH tilts the bootstrap distribution
//! away from hard instances; Random Subspace keeps every training instance
//! but restricts each member to a random half of the features. Prediction
//! is a majority vote over the members.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classifier::{
    predict, train_perceptron_ova, ClassifierError, ClassifierSpec, TrainedClassifier,
};
use crate::dataset::{Dataset, DatasetError};
use crate::hardness::{kdn, HardnessError, HardnessProfile};
use crate::seeding;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid pool parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Hardness(#[from] HardnessError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// How a pool's members were generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolMethod {
    Bagging,
    BaggingIh,
    RandomSubspace,
}

impl PoolMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            PoolMethod::Bagging => "bagging",
            PoolMethod::BaggingIh => "bagging-ih",
            PoolMethod::RandomSubspace => "random-subspace",
        }
    }
}

/// Bootstrap selection probabilities over a training set.
///
/// `cumulative` ends at exactly 1.0 so inverse-CDF sampling can never fall
/// off the end. When every weight is bitwise identical the probabilities
/// are written as exactly 1/n, which keeps a constant-hardness Bagging-IH
/// run bit-for-bit equal to plain Bagging.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDistribution {
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SamplingDistribution {
    /// Normalize positive weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self, EnsembleError> {
        if weights.is_empty() {
            return Err(EnsembleError::InvalidParameter("no weights".into()));
        }
        if let Some(&bad) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(EnsembleError::InvalidParameter(format!(
                "weights must be positive and finite, got {bad}"
            )));
        }
        if weights.iter().all(|w| w.to_bits() == weights[0].to_bits()) {
            return Ok(Self::uniform(weights.len()));
        }
        // Neumaier-compensated total so huge training sets do not drift.
        let mut total = 0.0;
        let mut compensation = 0.0;
        for &w in weights {
            let t = total + w;
            compensation += if total.abs() >= w.abs() {
                (total - t) + w
            } else {
                (w - t) + total
            };
            total = t;
        }
        let total = total + compensation;
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut running = 0.0;
        for &p in &probabilities {
            running += p;
            cumulative.push(running);
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self {
            probabilities,
            cumulative,
        })
    }

    /// The uniform distribution over n indices, with exact 1/n entries.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "uniform distribution needs at least one index");
        let p = 1.0 / n as f64;
        Self {
            probabilities: vec![p; n],
            cumulative: (1..=n).map(|i| i as f64 / n as f64).collect(),
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }
}

/// Per-instance selection weight: 1/n plus one minus the hardness, so even
/// an instance every neighbor disagrees with keeps a strictly positive
/// chance of selection.
pub fn selection_likelihood(kdn_value: f64, n: usize) -> f64 {
    1.0 / n as f64 + (1.0 - kdn_value)
}

/// Turn a hardness profile into bootstrap selection probabilities.
pub fn selection_distribution(h: &HardnessProfile) -> Result<SamplingDistribution, EnsembleError> {
    let n = h.len();
    if n == 0 {
        return Err(EnsembleError::InvalidParameter(
            "empty hardness profile".into(),
        ));
    }
    let weights: Vec<f64> = h
        .values()
        .iter()
        .map(|&v| selection_likelihood(v, n))
        .collect();
    SamplingDistribution::from_weights(&weights)
}

/// Draw one index by inverse CDF.
pub fn sample_index<R: Rng>(dist: &SamplingDistribution, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    dist.cumulative.partition_point(|&c| c <= u)
}

/// Draw `n_b` indices i.i.d. with replacement, deterministically from `seed`.
pub fn bootstrap_sample(
    dist: &SamplingDistribution,
    n_b: usize,
    seed: u64,
) -> Result<Vec<usize>, EnsembleError> {
    if n_b == 0 {
        return Err(EnsembleError::InvalidParameter("n_b must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_b).map(|_| sample_index(dist, &mut rng)).collect())
}

/// A generated pool: its members, how they were built, and (for the
/// bootstrap methods) which training indices each member saw.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPool {
    classifiers: Vec<TrainedClassifier>,
    method: PoolMethod,
    bootstrap_indices: Vec<Vec<usize>>,
    member_seeds: Vec<u64>,
}

impl TrainedPool {
    pub fn classifiers(&self) -> &[TrainedClassifier] {
        &self.classifiers
    }

    pub fn method(&self) -> PoolMethod {
        self.method
    }

    /// One index list per member; empty lists for random-subspace pools,
    /// which train every member on the full set.
    pub fn bootstrap_indices(&self) -> &[Vec<usize>] {
        &self.bootstrap_indices
    }

    pub fn member_seeds(&self) -> &[u64] {
        &self.member_seeds
    }

    pub fn len(&self) -> usize {
        self.classifiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classifiers.is_empty()
    }

    #[cfg(test)]
    pub(crate) fn from_parts(
        classifiers: Vec<TrainedClassifier>,
        method: PoolMethod,
        bootstrap_indices: Vec<Vec<usize>>,
        member_seeds: Vec<u64>,
    ) -> Self {
        Self {
            classifiers,
            method,
            bootstrap_indices,
            member_seeds,
        }
    }
}

fn validate_pool_size(m: usize) -> Result<(), EnsembleError> {
    if m == 0 {
        return Err(EnsembleError::InvalidParameter("m must be >= 1".into()));
    }
    Ok(())
}

fn bootstrap_pool(
    t: &Dataset,
    dist: &SamplingDistribution,
    method: PoolMethod,
    m: usize,
    n_b: usize,
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<TrainedPool, EnsembleError> {
    let mut classifiers = Vec::with_capacity(m);
    let mut bootstrap_indices = Vec::with_capacity(m);
    let mut member_seeds = Vec::with_capacity(m);
    for member in 0..m {
        let member_seed = seeding::derive(seed, member as u64);
        let indices = bootstrap_sample(dist, n_b, seeding::derive(member_seed, 0))?;
        let sample = t.subset(&indices)?;
        let member_spec = spec.with_seed(seeding::derive(member_seed, 1));
        classifiers.push(train_perceptron_ova(
            sample.features(),
            sample.n_features(),
            sample.labels(),
            sample.class_count(),
            &member_spec,
        )?);
        bootstrap_indices.push(indices);
        member_seeds.push(member_seed);
    }
    Ok(TrainedPool {
        classifiers,
        method,
        bootstrap_indices,
        member_seeds,
    })
}

/// Plain Bagging: uniform bootstraps of size `n_b`.
pub fn generate_bagging(
    t: &Dataset,
    m: usize,
    n_b: usize,
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<TrainedPool, EnsembleError> {
    validate_pool_size(m)?;
    let dist = SamplingDistribution::uniform(t.n_instances());
    bootstrap_pool(t, &dist, PoolMethod::Bagging, m, n_b, spec, seed)
}

/// Bagging with hardness-weighted bootstraps: kDN is computed on the
/// training set, converted to selection probabilities, and every member's
/// bootstrap is drawn from that shared distribution.
pub fn generate_bagging_ih(
    t: &Dataset,
    m: usize,
    n_b: usize,
    spec: &ClassifierSpec,
    k: usize,
    seed: u64,
) -> Result<TrainedPool, EnsembleError> {
    validate_pool_size(m)?;
    let h = kdn(t, k)?;
    let dist = selection_distribution(&h)?;
    bootstrap_pool(t, &dist, PoolMethod::BaggingIh, m, n_b, spec, seed)
}

/// Random Subspace: every member trains on the full training set projected
/// onto `max(1, floor(feature_fraction * d))` distinct features.
pub fn generate_random_subspace(
    t: &Dataset,
    m: usize,
    feature_fraction: f64,
    spec: &ClassifierSpec,
    seed: u64,
) -> Result<TrainedPool, EnsembleError> {
    validate_pool_size(m)?;
    if !(feature_fraction > 0.0 && feature_fraction <= 1.0) {
        return Err(EnsembleError::InvalidParameter(format!(
            "feature_fraction must be in (0, 1], got {feature_fraction}"
        )));
    }
    let d = t.n_features();
    let subset_size = ((feature_fraction * d as f64).floor() as usize).max(1);
    let n = t.n_instances();
    let mut classifiers = Vec::with_capacity(m);
    let mut member_seeds = Vec::with_capacity(m);
    for member in 0..m {
        let member_seed = seeding::derive(seed, member as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seeding::derive(member_seed, 0));
        let mut subset = rand::seq::index::sample(&mut rng, d, subset_size).into_vec();
        subset.sort_unstable();
        let mut projected = Vec::with_capacity(n * subset_size);
        for i in 0..n {
            let row = t.row(i);
            projected.extend(subset.iter().map(|&j| row[j]));
        }
        let member_spec = spec.with_seed(seeding::derive(member_seed, 1));
        let c = train_perceptron_ova(
            &projected,
            subset_size,
            t.labels(),
            t.class_count(),
            &member_spec,
        )?
        .with_feature_subset(subset);
        classifiers.push(c);
        member_seeds.push(member_seed);
    }
    Ok(TrainedPool {
        classifiers,
        method: PoolMethod::RandomSubspace,
        bootstrap_indices: vec![Vec::new(); m],
        member_seeds,
    })
}

pub(crate) fn majority_vote(votes: &[usize], class_count: usize) -> usize {
    let mut counts = vec![0usize; class_count];
    for &v in votes {
        counts[v] += 1;
    }
    let mut best = 0;
    for c in 1..class_count {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

/// Majority vote over the pool; vote ties break to the lowest class index.
pub fn pool_predict(p: &TrainedPool, x: &[f64]) -> Result<usize, EnsembleError> {
    if p.classifiers.is_empty() {
        return Err(EnsembleError::InvalidParameter("empty pool".into()));
    }
    let mut votes = Vec::with_capacity(p.classifiers.len());
    for c in &p.classifiers {
        votes.push(predict(c, x)?);
    }
    Ok(majority_vote(&votes, p.classifiers[0].class_count()))
}
