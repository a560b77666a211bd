//! Label noise injection for training folds.
//!
//! Each instance flips independently with the given probability, and a
//! flipped label is drawn uniformly from the other classes, so the expected
//! corrupted fraction equals the rate. Test folds are never passed through
//! here; evaluation stays against clean labels.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("noise rate {0} is outside [0, 1]")]
    RateOutOfRange(f64),
    #[error("cannot flip labels with fewer than 2 classes")]
    NoOtherClass,
    #[error("label {label} out of range for {class_count} classes")]
    LabelOutOfRange { label: usize, class_count: usize },
}

/// What the injector did: which instances were corrupted and what their
/// labels were beforehand.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRecord {
    rate: f64,
    noisy_mask: Vec<bool>,
    original_labels: Vec<usize>,
}

impl NoiseRecord {
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// true exactly where the current label differs from the original.
    pub fn noisy_mask(&self) -> &[bool] {
        &self.noisy_mask
    }

    pub fn original_labels(&self) -> &[usize] {
        &self.original_labels
    }

    pub fn n_noisy(&self) -> usize {
        self.noisy_mask.iter().filter(|&&m| m).count()
    }
}

/// Corrupt labels with independent per-instance flips at `rate`.
///
/// A flipped label is uniform over the `class_count - 1` other classes, so
/// it never equals the original. One RNG draw is consumed per instance
/// regardless of outcome, keeping the stream layout rate-independent.
pub fn inject_label_noise(
    labels: &[usize],
    class_count: usize,
    rate: f64,
    seed: u64,
) -> Result<(Vec<usize>, NoiseRecord), NoiseError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(NoiseError::RateOutOfRange(rate));
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= class_count) {
        return Err(NoiseError::LabelOutOfRange { label, class_count });
    }
    if class_count < 2 && rate > 0.0 {
        return Err(NoiseError::NoOtherClass);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut new_labels = labels.to_vec();
    let mut noisy_mask = vec![false; labels.len()];
    for i in 0..labels.len() {
        if rng.gen::<f64>() < rate {
            // uniform over the other classes: skip the original by shifting
            // offsets at or above it up by one
            let offset = rng.gen_range(0..class_count - 1);
            new_labels[i] = if offset >= labels[i] { offset + 1 } else { offset };
            noisy_mask[i] = true;
        }
    }
    let record = NoiseRecord {
        rate,
        noisy_mask,
        original_labels: labels.to_vec(),
    };
    Ok((new_labels, record))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_zero_changes_nothing() {
        let labels = vec![0, 1, 2, 1, 0];
        let (new, rec) = inject_label_noise(&labels, 3, 0.0, 5).unwrap();
        assert_eq!(new, labels);
        assert!(rec.noisy_mask().iter().all(|&m| !m));
        assert_eq!(rec.n_noisy(), 0);
    }

    #[test]
    fn rate_one_two_classes_flips_everything() {
        let labels = vec![0, 1, 1, 0, 0, 1];
        let (new, rec) = inject_label_noise(&labels, 2, 1.0, 5).unwrap();
        for (o, n) in labels.iter().zip(&new) {
            assert_eq!(*n, 1 - *o);
        }
        assert_eq!(rec.n_noisy(), labels.len());
    }

    #[test]
    fn flipped_fraction_tracks_rate() {
        let labels = vec![0; 10_000];
        let (_, rec) = inject_label_noise(&labels, 4, 0.2, 9).unwrap();
        let fraction = rec.n_noisy() as f64 / 10_000.0;
        assert!((fraction - 0.2).abs() < 0.012, "fraction {fraction}");
    }

    #[test]
    fn flips_never_reproduce_the_original_label() {
        for seed in 0..5u64 {
            let labels: Vec<usize> = (0..500).map(|i| i % 5).collect();
            let (new, rec) = inject_label_noise(&labels, 5, 0.5, seed).unwrap();
            for i in 0..labels.len() {
                assert!(new[i] < 5);
                assert_eq!(rec.noisy_mask()[i], new[i] != labels[i]);
                if rec.noisy_mask()[i] {
                    assert_ne!(new[i], labels[i]);
                }
            }
            assert_eq!(rec.original_labels(), &labels[..]);
        }
    }

    #[test]
    fn replacement_covers_all_other_classes() {
        let labels = vec![1; 6000];
        let (new, _) = inject_label_noise(&labels, 4, 1.0, 3).unwrap();
        let mut seen = [0usize; 4];
        for &l in &new {
            seen[l] += 1;
        }
        assert_eq!(seen[1], 0);
        // each other class should get roughly a third of 6000
        for c in [0, 2, 3] {
            assert!((seen[c] as f64 - 2000.0).abs() < 300.0, "class {c}: {}", seen[c]);
        }
    }

    #[test]
    fn same_seed_same_mask() {
        let labels: Vec<usize> = (0..200).map(|i| i % 3).collect();
        let a = inject_label_noise(&labels, 3, 0.3, 77).unwrap();
        let b = inject_label_noise(&labels, 3, 0.3, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(inject_label_noise(&[0, 0], 1, 0.1, 0).is_err());
        assert!(inject_label_noise(&[0, 0], 1, 0.0, 0).is_ok());
        assert!(inject_label_noise(&[0, 1], 2, -0.1, 0).is_err());
        assert!(inject_label_noise(&[0, 1], 2, 1.5, 0).is_err());
        assert!(inject_label_noise(&[0, 3], 3, 0.1, 0).is_err());
    }
}
