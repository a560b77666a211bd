//! One-vs-all perceptron, the base learner for every pool in this crate.
//!
//! Each class gets a binary perceptron trained with +1/-1 targets and the
//! classic mistake-driven update `w <- w + lr * target * [x; 1]`. Weights
//! start at zero, the instance order is reshuffled every epoch from the
//! spec's seed, and training stops early after an epoch with no updates
//! (at that point the weights can never change again, whatever the order).
//! Prediction is the argmax of the raw per-class activations.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid classifier spec: {0}")]
    InvalidSpec(String),
}

/// The kind of base learner. Only the one-vs-all perceptron exists today.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LearnerKind {
    #[default]
    PerceptronOva,
}

/// Hyperparameters for a single base learner.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub kind: LearnerKind,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        Self {
            kind: LearnerKind::PerceptronOva,
            epochs: 100,
            learning_rate: 1.0,
            seed: 0,
        }
    }
}

impl ClassifierSpec {
    /// Same hyperparameters, different seed. Pools use this to hand every
    /// member its own derived seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    fn validate(&self) -> Result<(), ClassifierError> {
        if self.epochs < 1 {
            return Err(ClassifierError::InvalidSpec("epochs must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(ClassifierError::InvalidSpec(
                "learning_rate must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// A trained one-vs-all perceptron: one weight row per class, bias last.
///
/// When `feature_subset` is present (Random Subspace members), `predict`
/// restricts incoming full-width feature vectors to those columns before
/// computing activations.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    weights: Vec<f64>, // class_count x (input_dim + 1), row-major
    class_count: usize,
    input_dim: usize,
    feature_subset: Option<Vec<usize>>,
}

impl TrainedClassifier {
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Width of the feature vectors the weights were trained on.
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn feature_subset(&self) -> Option<&[usize]> {
        self.feature_subset.as_deref()
    }

    /// Weight row (bias last) for one class.
    pub fn class_weights(&self, class: usize) -> &[f64] {
        let w = self.input_dim + 1;
        &self.weights[class * w..(class + 1) * w]
    }

    /// Attach the feature subset this classifier was trained on.
    pub(crate) fn with_feature_subset(mut self, subset: Vec<usize>) -> Self {
        debug_assert_eq!(subset.len(), self.input_dim);
        self.feature_subset = Some(subset);
        self
    }
}

/// Train one binary perceptron per class on a row-major feature buffer.
///
/// `class_count` comes from the parent dataset, so classes absent from a
/// bootstrap sample still get a (learned-on-negatives-only) weight row.
pub fn train_perceptron_ova(
    features: &[f64],
    n_features: usize,
    labels: &[usize],
    class_count: usize,
    spec: &ClassifierSpec,
) -> Result<TrainedClassifier, ClassifierError> {
    spec.validate()?;
    let n = labels.len();
    if n == 0 {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    if n_features == 0 || features.len() != n * n_features {
        return Err(ClassifierError::DimensionMismatch(format!(
            "feature buffer holds {} values, expected {} x {}",
            features.len(),
            n,
            n_features
        )));
    }
    if class_count == 0 {
        return Err(ClassifierError::InvalidSpec("class_count must be >= 1".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
        return Err(ClassifierError::DimensionMismatch(format!(
            "label {bad} out of range for {class_count} classes"
        )));
    }

    let width = n_features + 1;
    let mut weights = vec![0.0; class_count * width];
    for class in 0..class_count {
        let w = &mut weights[class * width..(class + 1) * width];
        // Every class re-seeds the same RNG, so its shuffle stream does not
        // depend on which classes trained before it.
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut order: Vec<usize> = (0..n).collect();
        for _ in 0..spec.epochs {
            order.shuffle(&mut rng);
            let mut updates = 0usize;
            for &i in &order {
                let x = &features[i * n_features..(i + 1) * n_features];
                let target = if labels[i] == class { 1.0 } else { -1.0 };
                let activation =
                    x.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>() + w[n_features];
                if target * activation <= 0.0 {
                    let step = spec.learning_rate * target;
                    for (wj, xj) in w.iter_mut().zip(x) {
                        *wj += step * xj;
                    }
                    w[n_features] += step;
                    updates += 1;
                }
            }
            if updates == 0 {
                break;
            }
        }
    }
    Ok(TrainedClassifier {
        weights,
        class_count,
        input_dim: n_features,
        feature_subset: None,
    })
}

/// Predict the class of a full-width feature vector: argmax of the raw
/// activations, ties broken by lowest class index.
pub fn predict(c: &TrainedClassifier, x: &[f64]) -> Result<usize, ClassifierError> {
    match &c.feature_subset {
        Some(subset) => {
            if let Some(&bad) = subset.iter().find(|&&j| j >= x.len()) {
                return Err(ClassifierError::DimensionMismatch(format!(
                    "feature subset index {bad} out of range for input of length {}",
                    x.len()
                )));
            }
        }
        None => {
            if x.len() != c.input_dim {
                return Err(ClassifierError::DimensionMismatch(format!(
                    "input has {} features, classifier expects {}",
                    x.len(),
                    c.input_dim
                )));
            }
        }
    }
    let mut best_class = 0usize;
    let mut best_activation = f64::NEG_INFINITY;
    for class in 0..c.class_count {
        let w = c.class_weights(class);
        let dot = match &c.feature_subset {
            Some(subset) => subset.iter().zip(w.iter()).map(|(&j, b)| x[j] * b).sum::<f64>(),
            None => x.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>(),
        };
        let activation = dot + w[c.input_dim];
        if activation > best_activation {
            best_activation = activation;
            best_class = class;
        }
    }
    Ok(best_class)
}
