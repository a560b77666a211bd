//! Classification datasets: CSV ingestion, min-max scaling, stratified
//! cross-validation splits and synthetic Gaussian blob generation.
//!
//! A [`Dataset`] is immutable after construction and safe to share across
//! threads. All randomness (fold shuffling, blob sampling) is driven by
//! explicit seeds.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
}

/// An immutable feature matrix with dense integer class labels.
///
/// Labels are always in `0..class_count`; `class_count >= 2` even if some
/// classes happen to be absent from a particular subset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>, // row-major, n_instances x n_features
    n_features: usize,
    labels: Vec<usize>,
    name: String,
    class_count: usize,
}

impl Dataset {
    /// Build a dataset from a row-major feature buffer, validating all
    /// structural invariants (finite features, labels in range, at least
    /// one instance and two classes).
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<usize>,
        name: impl Into<String>,
        class_count: usize,
    ) -> Result<Self, DatasetError> {
        if n_features == 0 {
            return Err(DatasetError::Validation("n_features must be >= 1".into()));
        }
        if labels.is_empty() {
            return Err(DatasetError::Validation("no instances".into()));
        }
        if features.len() != labels.len() * n_features {
            return Err(DatasetError::Validation(format!(
                "feature buffer holds {} values, expected {} ({} instances x {} features)",
                features.len(),
                labels.len() * n_features,
                labels.len(),
                n_features
            )));
        }
        if class_count < 2 {
            return Err(DatasetError::Validation(
                "class_count must be >= 2".into(),
            ));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= class_count) {
            return Err(DatasetError::Validation(format!(
                "label {l} of instance {i} is out of range for {class_count} classes"
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(DatasetError::Validation(format!(
                "non-finite feature value at instance {}, feature {}",
                i / n_features,
                i % n_features
            )));
        }
        Ok(Self {
            features,
            n_features,
            labels,
            name: name.into(),
            class_count,
        })
    }

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Flat row-major feature buffer.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Feature vector of instance `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    /// New dataset holding the given instances, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset, DatasetError> {
        if indices.is_empty() {
            return Err(DatasetError::Validation("empty index list".into()));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_instances()) {
            return Err(DatasetError::Validation(format!(
                "index {bad} out of range for {} instances",
                self.n_instances()
            )));
        }
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset::new(features, self.n_features, labels, self.name.clone(), self.class_count)
    }

    /// Same features, replacement labels (used after noise injection).
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Dataset, DatasetError> {
        if labels.len() != self.n_instances() {
            return Err(DatasetError::Validation(format!(
                "label vector length {} does not match {} instances",
                labels.len(),
                self.n_instances()
            )));
        }
        Dataset::new(
            self.features.clone(),
            self.n_features,
            labels,
            self.name.clone(),
            self.class_count,
        )
    }

    /// Serialize as plain CSV with a header line; last column is the label.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for j in 0..self.n_features {
            let _ = write!(out, "f{j},");
        }
        out.push_str("label\n");
        for i in 0..self.n_instances() {
            for v in self.row(i) {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{}", self.labels[i]);
        }
        out
    }

    /// Write the dataset to a CSV file readable by [`load_csv`].
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// One fold of a k-fold split: disjoint train/test index lists whose union
/// covers every instance exactly once across the fold's test sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub fold_id: usize,
}

/// Per-feature min/max fitted on a set of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    per_feature_min: Vec<f64>,
    per_feature_max: Vec<f64>,
}

impl Scaler {
    pub fn per_feature_min(&self) -> &[f64] {
        &self.per_feature_min
    }

    pub fn per_feature_max(&self) -> &[f64] {
        &self.per_feature_max
    }
}

/// Load a plain CSV file: comma separated, optional single header line,
/// last column is the class label.
///
/// Feature cells must parse as finite numbers; the label column may be any
/// string (integers included) and is re-encoded densely to `0..C-1` in
/// first-appearance order. Row order is preserved. The first line is treated
/// as a header when any of its feature cells fails to parse as a number.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    parse_csv(&text, name)
}

/// CSV parsing core, split out so it is testable without touching the
/// filesystem.
pub(crate) fn parse_csv(text: &str, name: String) -> Result<Dataset, DatasetError> {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut class_of: HashMap<String, usize> = HashMap::new();
    let mut n_cols: Option<usize> = None;
    let mut saw_data_row = false;

    for (line_no, raw) in text.lines().enumerate() {
        let line_no = line_no + 1; // 1-based for error messages
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() < 2 {
            return Err(DatasetError::Parse {
                line: line_no,
                column: 1,
                message: "need at least one feature column and a label column".into(),
            });
        }
        match n_cols {
            None => {
                // First non-blank line: header iff some feature cell is non-numeric.
                let is_header = cells[..cells.len() - 1]
                    .iter()
                    .any(|c| c.parse::<f64>().is_err());
                n_cols = Some(cells.len());
                if is_header {
                    continue;
                }
            }
            Some(expected) => {
                if cells.len() != expected {
                    return Err(DatasetError::Parse {
                        line: line_no,
                        column: cells.len(),
                        message: format!("expected {expected} columns, found {}", cells.len()),
                    });
                }
            }
        }
        saw_data_row = true;
        for (col_idx, cell) in cells[..cells.len() - 1].iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| DatasetError::Parse {
                line: line_no,
                column: col_idx + 1,
                message: format!("feature cell '{cell}' is not a number"),
            })?;
            if !value.is_finite() {
                return Err(DatasetError::Parse {
                    line: line_no,
                    column: col_idx + 1,
                    message: format!("feature cell '{cell}' is not finite"),
                });
            }
            features.push(value);
        }
        let raw_label = cells[cells.len() - 1];
        let next_id = class_of.len();
        let id = *class_of.entry(raw_label.to_string()).or_insert(next_id);
        labels.push(id);
    }

    if !saw_data_row {
        return Err(DatasetError::Validation("no instances".into()));
    }
    let class_count = class_of.len();
    if class_count < 2 {
        return Err(DatasetError::Validation(format!(
            "fewer than 2 classes (found {class_count})"
        )));
    }
    let n_features = n_cols.expect("at least one row seen") - 1;
    Dataset::new(features, n_features, labels, name, class_count)
}

/// Fit per-feature min/max over the given instances only.
pub fn fit_scaler(d: &Dataset, indices: &[usize]) -> Result<Scaler, DatasetError> {
    if indices.is_empty() {
        return Err(DatasetError::Validation(
            "cannot fit a scaler on an empty index list".into(),
        ));
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= d.n_instances()) {
        return Err(DatasetError::Validation(format!(
            "index {bad} out of range for {} instances",
            d.n_instances()
        )));
    }
    let mut min = vec![f64::INFINITY; d.n_features()];
    let mut max = vec![f64::NEG_INFINITY; d.n_features()];
    for &i in indices {
        for (j, &v) in d.row(i).iter().enumerate() {
            if v < min[j] {
                min[j] = v;
            }
            if v > max[j] {
                max[j] = v;
            }
        }
    }
    Ok(Scaler {
        per_feature_min: min,
        per_feature_max: max,
    })
}

/// Apply `x' = (x - min) / (max - min)` feature-wise.
///
/// Constant features (min == max) map to 0. Values outside the fitted range
/// are not clamped, so instances unseen at fit time may land outside [0, 1].
pub fn apply_scaler(s: &Scaler, d: &Dataset) -> Result<Dataset, DatasetError> {
    if s.per_feature_min.len() != d.n_features() {
        return Err(DatasetError::Validation(format!(
            "scaler fitted on {} features, dataset has {}",
            s.per_feature_min.len(),
            d.n_features()
        )));
    }
    let mut features = Vec::with_capacity(d.features().len());
    for i in 0..d.n_instances() {
        for (j, &v) in d.row(i).iter().enumerate() {
            let (lo, hi) = (s.per_feature_min[j], s.per_feature_max[j]);
            features.push(if hi > lo { (v - lo) / (hi - lo) } else { 0.0 });
        }
    }
    Dataset::new(
        features,
        d.n_features(),
        d.labels().to_vec(),
        d.name().to_string(),
        d.class_count(),
    )
}

/// Stratified k-fold split, deterministic given `seed`.
///
/// Instances of each class are shuffled and dealt round-robin into folds with
/// a cursor that rolls across classes, so each fold receives either
/// `floor(n_c / k)` or `ceil(n_c / k)` members of class `c` and classes with
/// fewer than `k` members land in distinct folds.
pub fn stratified_kfold(d: &Dataset, k: usize, seed: u64) -> Result<Vec<FoldSplit>, DatasetError> {
    if k < 2 {
        return Err(DatasetError::Validation("k must be >= 2".into()));
    }
    if d.n_instances() < k {
        return Err(DatasetError::Validation(format!(
            "{} instances cannot be split into {k} folds",
            d.n_instances()
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); d.class_count()];
    for (i, &l) in d.labels().iter().enumerate() {
        by_class[l].push(i);
    }
    if let Some(c) = by_class.iter().position(Vec::is_empty) {
        return Err(DatasetError::Validation(format!(
            "class {c} has no instances"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_sets: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut cursor = 0usize;
    for group in &mut by_class {
        group.shuffle(&mut rng);
        for &idx in group.iter() {
            test_sets[cursor % k].push(idx);
            cursor += 1;
        }
    }

    let n = d.n_instances();
    let mut folds = Vec::with_capacity(k);
    for (fold_id, mut test_indices) in test_sets.into_iter().enumerate() {
        test_indices.sort_unstable();
        let mut in_test = vec![false; n];
        for &i in &test_indices {
            in_test[i] = true;
        }
        let train_indices: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
        folds.push(FoldSplit {
            train_indices,
            test_indices,
            fold_id,
        });
    }
    Ok(folds)
}

/// Generate Gaussian blobs: one isotropic cluster per class with
/// unit-separated means placed along the coordinate axes.
///
/// Class `c` is centred at `(1 + c / n_features) * e_{c mod n_features}`,
/// so any two class means are at least distance 1 apart. Instances are
/// emitted class-major; deterministic given `seed`.
pub fn synth_blobs(
    class_count: usize,
    per_class: usize,
    n_features: usize,
    spread: f64,
    seed: u64,
) -> Result<Dataset, DatasetError> {
    if class_count < 2 {
        return Err(DatasetError::Validation("class_count must be >= 2".into()));
    }
    if per_class < 1 {
        return Err(DatasetError::Validation("per_class must be >= 1".into()));
    }
    if n_features < 1 {
        return Err(DatasetError::Validation("n_features must be >= 1".into()));
    }
    if !spread.is_finite() || spread < 0.0 {
        return Err(DatasetError::Validation(
            "spread must be finite and non-negative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(class_count * per_class * n_features);
    let mut labels = Vec::with_capacity(class_count * per_class);
    for c in 0..class_count {
        let axis = c % n_features;
        let shift = 1.0 + (c / n_features) as f64;
        for _ in 0..per_class {
            for j in 0..n_features {
                let mean = if j == axis { shift } else { 0.0 };
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                features.push(mean + spread * z);
            }
            labels.push(c);
        }
    }
    let name = format!("blobs_c{class_count}_p{per_class}_f{n_features}_s{spread}_seed{seed}");
    Dataset::new(features, n_features, labels, name, class_count)
}
