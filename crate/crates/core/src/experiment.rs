//! The experiment harness: repeated stratified cross-validation over
//! datasets, methods, and label-noise levels.
//!
//! For every (dataset, noise level, repetition) the harness derives a cell
//! seed from the master seed, splits 5 folds, and per fold scales features
//! on the training portion, corrupts the training labels, and hands the
//! identical noisy fold to every method. Method comparisons are therefore
//! paired: only the pool-internal randomness differs, seeded by a further
//! hash that includes the method name. Everything is replayable from the
//! master seed alone, and records come out in canonical order so repeated
//! runs serialize byte-for-byte identically.
//!
//! A module error in one cell (say, a training fold too small for kDN's k)
//! is recorded as a failure for that (dataset, method, noise, repetition)
//! and costs exactly its five fold records; the rest of the sweep proceeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::classifier::{
    predict, train_perceptron_ova, ClassifierError, ClassifierSpec, LearnerKind,
    TrainedClassifier,
};
use crate::dataset::{
    apply_scaler, fit_scaler, load_csv, stratified_kfold, synth_blobs, Dataset, DatasetError,
};
use crate::ensemble::{
    generate_bagging, generate_bagging_ih, generate_random_subspace, pool_predict, EnsembleError,
    TrainedPool,
};
use crate::noise::{inject_label_noise, NoiseError, NoiseRecord};
use crate::seeding;

/// Folds per cross-validation split.
pub const CV_FOLDS: usize = 5;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("could not read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("records parse error at line {line}: {message}")]
    RecordsParse { line: usize, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

/// The classification methods the harness can run. Order here is the
/// canonical presentation order in records and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    BaggingIh,
    Bagging,
    RandomSubspace,
    PerceptronOva,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::BaggingIh,
        Method::Bagging,
        Method::RandomSubspace,
        Method::PerceptronOva,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::BaggingIh => "bagging-ih",
            Method::Bagging => "bagging",
            Method::RandomSubspace => "random-subspace",
            Method::PerceptronOva => "perceptron-ova",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bagging-ih" => Ok(Method::BaggingIh),
            "bagging" => Ok(Method::Bagging),
            "random-subspace" => Ok(Method::RandomSubspace),
            "perceptron-ova" => Ok(Method::PerceptronOva),
            other => Err(ExperimentError::Config(format!(
                "unknown method '{other}' (expected bagging-ih, bagging, random-subspace or perceptron-ova)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bootstrap size policy: the training fold size, or a fixed count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NbPolicy {
    #[default]
    TrainSize,
    Fixed(usize),
}

/// Where a dataset comes from: a CSV on disk or a generated blob mixture.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Path(PathBuf),
    Blobs {
        classes: usize,
        per_class: usize,
        features: usize,
        spread: f64,
        seed: u64,
    },
}

impl DatasetSource {
    /// Parse a config token: `blobs:<classes>:<per_class>:<features>:<spread>:<seed>`
    /// generates data; anything else is a CSV path.
    pub fn parse(token: &str) -> Result<Self, ExperimentError> {
        if let Some(rest) = token.strip_prefix("blobs:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 5 {
                return Err(ExperimentError::Config(format!(
                    "blobs spec '{token}' must be blobs:<classes>:<per_class>:<features>:<spread>:<seed>"
                )));
            }
            let field = |i: usize, what: &str| -> Result<usize, ExperimentError> {
                parts[i].parse().map_err(|_| {
                    ExperimentError::Config(format!("bad {what} in blobs spec '{token}'"))
                })
            };
            Ok(DatasetSource::Blobs {
                classes: field(0, "class count")?,
                per_class: field(1, "per-class count")?,
                features: field(2, "feature count")?,
                spread: parts[3].parse().map_err(|_| {
                    ExperimentError::Config(format!("bad spread in blobs spec '{token}'"))
                })?,
                seed: parts[4].parse().map_err(|_| {
                    ExperimentError::Config(format!("bad seed in blobs spec '{token}'"))
                })?,
            })
        } else {
            Ok(DatasetSource::Path(PathBuf::from(token)))
        }
    }

    pub fn load(&self) -> Result<Dataset, ExperimentError> {
        match self {
            DatasetSource::Path(p) => Ok(load_csv(p)?),
            DatasetSource::Blobs {
                classes,
                per_class,
                features,
                spread,
                seed,
            } => Ok(synth_blobs(*classes, *per_class, *features, *spread, *seed)?),
        }
    }
}

/// Full sweep description. `Default` carries the standard protocol:
/// all four methods, noise levels 0 through 0.4, 20 repetitions, pools of
/// 50, bootstraps as large as the training fold, k = 5, perceptrons with
/// 100 epochs at learning rate 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSource>,
    pub methods: Vec<Method>,
    pub noise_levels: Vec<f64>,
    pub repetitions: usize,
    pub pool_size: usize,
    pub n_b: NbPolicy,
    pub k: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            methods: Method::ALL.to_vec(),
            noise_levels: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            repetitions: 20,
            pool_size: 50,
            n_b: NbPolicy::TrainSize,
            k: 5,
            epochs: 100,
            learning_rate: 1.0,
            master_seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.datasets.is_empty() {
            return Err(ExperimentError::Config("no datasets configured".into()));
        }
        if self.methods.is_empty() {
            return Err(ExperimentError::Config("no methods configured".into()));
        }
        if self.repetitions < 1 {
            return Err(ExperimentError::Config("repetitions must be >= 1".into()));
        }
        if self.noise_levels.is_empty() {
            return Err(ExperimentError::Config("no noise levels configured".into()));
        }
        if let Some(&bad) = self
            .noise_levels
            .iter()
            .find(|&&r| !(0.0..=1.0).contains(&r))
        {
            return Err(ExperimentError::Config(format!(
                "noise level {bad} is outside [0, 1]"
            )));
        }
        if self.pool_size < 1 {
            return Err(ExperimentError::Config("pool_size must be >= 1".into()));
        }
        if self.k < 1 {
            return Err(ExperimentError::Config("k must be >= 1".into()));
        }
        if self.epochs < 1 {
            return Err(ExperimentError::Config("epochs must be >= 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(ExperimentError::Config(
                "learning_rate must be positive and finite".into(),
            ));
        }
        if let NbPolicy::Fixed(0) = self.n_b {
            return Err(ExperimentError::Config("n_b must be >= 1".into()));
        }
        Ok(())
    }

    fn classifier_spec(&self) -> ClassifierSpec {
        ClassifierSpec {
            kind: LearnerKind::PerceptronOva,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed: 0,
        }
    }
}

/// Parse the flat key-value config format: one `key = value` per line,
/// `#` comments, comma-separated lists. Missing keys keep their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: Vec<String> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ExperimentError::Config(format!("line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if seen.iter().any(|k| k == key) {
            return Err(ExperimentError::Config(format!(
                "line {}: duplicate key '{key}'",
                lineno + 1
            )));
        }
        seen.push(key.to_string());
        let list = || {
            value
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .collect::<Vec<_>>()
        };
        let bad = |what: &str| ExperimentError::Config(format!("line {}: bad {what} '{value}'", lineno + 1));
        match key {
            "datasets" => {
                cfg.datasets = list()
                    .into_iter()
                    .map(DatasetSource::parse)
                    .collect::<Result<_, _>>()?;
            }
            "methods" => {
                cfg.methods = list()
                    .into_iter()
                    .map(str::parse)
                    .collect::<Result<_, _>>()?;
            }
            "noise_levels" => {
                cfg.noise_levels = list()
                    .into_iter()
                    .map(|t| {
                        t.parse::<f64>().map_err(|_| {
                            ExperimentError::Config(format!(
                                "line {}: bad noise level '{t}'",
                                lineno + 1
                            ))
                        })
                    })
                    .collect::<Result<_, _>>()?;
            }
            "repetitions" => cfg.repetitions = value.parse().map_err(|_| bad("repetitions"))?,
            "pool_size" => cfg.pool_size = value.parse().map_err(|_| bad("pool_size"))?,
            "n_b" => {
                cfg.n_b = if value == "train-size" {
                    NbPolicy::TrainSize
                } else {
                    NbPolicy::Fixed(value.parse().map_err(|_| bad("n_b"))?)
                };
            }
            "k" => cfg.k = value.parse().map_err(|_| bad("k"))?,
            "epochs" => cfg.epochs = value.parse().map_err(|_| bad("epochs"))?,
            "learning_rate" => {
                cfg.learning_rate = value.parse().map_err(|_| bad("learning_rate"))?
            }
            "master_seed" => cfg.master_seed = value.parse().map_err(|_| bad("master_seed"))?,
            other => {
                return Err(ExperimentError::Config(format!(
                    "line {}: unknown key '{other}'",
                    lineno + 1
                )))
            }
        }
    }
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ExperimentError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// One fold evaluation of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub dataset: String,
    pub method: Method,
    pub noise: f64,
    pub repetition: usize,
    pub fold: usize,
    pub accuracy: f64,
    /// Mean fraction of noisy instances in the method's bootstrap sets;
    /// absent for methods that train on the full fold.
    pub freq_noisy: Option<f64>,
    /// The pool-internal seed this cell used.
    pub seed: u64,
}

/// A (dataset, method, noise, repetition) cell that could not run.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub dataset: String,
    pub method: Method,
    pub noise: f64,
    pub repetition: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentOutcome {
    pub records: Vec<ExperimentRecord>,
    pub failures: Vec<CellFailure>,
}

/// Mean fraction of noisy instances across a pool's bootstrap sets,
/// counted with multiplicity. `None` when the pool kept no bootstrap lists
/// (its members trained on the full fold).
pub fn freq_noisy(pool: &TrainedPool, record: &NoiseRecord) -> Option<f64> {
    let lists = pool.bootstrap_indices();
    if lists.is_empty() || lists.iter().any(|l| l.is_empty()) {
        return None;
    }
    let mask = record.noisy_mask();
    let mut sum = 0.0;
    for list in lists {
        let noisy = list
            .iter()
            .map(|&i| {
                assert!(i < mask.len(), "bootstrap index beyond the noise mask");
                usize::from(mask[i])
            })
            .sum::<usize>();
        sum += noisy as f64 / list.len() as f64;
    }
    Some(sum / lists.len() as f64)
}

fn pool_accuracy(pool: &TrainedPool, test: &Dataset) -> Result<f64, EnsembleError> {
    let mut correct = 0usize;
    for i in 0..test.n_instances() {
        if pool_predict(pool, test.row(i))? == test.labels()[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.n_instances() as f64)
}

fn classifier_accuracy(c: &TrainedClassifier, test: &Dataset) -> Result<f64, ClassifierError> {
    let mut correct = 0usize;
    for i in 0..test.n_instances() {
        if predict(c, test.row(i))? == test.labels()[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.n_instances() as f64)
}

/// Everything method-independent about one fold of one cell.
struct FoldMaterial {
    noisy_train: Dataset,
    test: Dataset,
    noise_record: NoiseRecord,
}

fn prepare_fold(
    d: &Dataset,
    train_indices: &[usize],
    test_indices: &[usize],
    rate: f64,
    noise_seed: u64,
) -> Result<FoldMaterial, ExperimentError> {
    let scaler = fit_scaler(d, train_indices)?;
    let train = apply_scaler(&scaler, &d.subset(train_indices)?)?;
    let test = apply_scaler(&scaler, &d.subset(test_indices)?)?;
    let (noisy_labels, noise_record) =
        inject_label_noise(train.labels(), train.class_count(), rate, noise_seed)?;
    let noisy_train = train.with_labels(noisy_labels)?;
    Ok(FoldMaterial {
        noisy_train,
        test,
        noise_record,
    })
}

fn run_method_on_fold(
    method: Method,
    material: &FoldMaterial,
    cfg: &ExperimentConfig,
    pool_seed: u64,
) -> Result<(f64, Option<f64>), ExperimentError> {
    let train = &material.noisy_train;
    let spec = cfg.classifier_spec();
    let n_b = match cfg.n_b {
        NbPolicy::TrainSize => train.n_instances(),
        NbPolicy::Fixed(v) => v,
    };
    match method {
        Method::BaggingIh => {
            let pool =
                generate_bagging_ih(train, cfg.pool_size, n_b, &spec, cfg.k, pool_seed)?;
            let acc = pool_accuracy(&pool, &material.test)?;
            Ok((acc, freq_noisy(&pool, &material.noise_record)))
        }
        Method::Bagging => {
            let pool = generate_bagging(train, cfg.pool_size, n_b, &spec, pool_seed)?;
            let acc = pool_accuracy(&pool, &material.test)?;
            Ok((acc, freq_noisy(&pool, &material.noise_record)))
        }
        Method::RandomSubspace => {
            let pool = generate_random_subspace(train, cfg.pool_size, 0.5, &spec, pool_seed)?;
            let acc = pool_accuracy(&pool, &material.test)?;
            Ok((acc, None))
        }
        Method::PerceptronOva => {
            let c = train_perceptron_ova(
                train.features(),
                train.n_features(),
                train.labels(),
                train.class_count(),
                &spec.with_seed(pool_seed),
            )?;
            Ok((classifier_accuracy(&c, &material.test)?, None))
        }
    }
}

/// Run the configured sweep. Deterministic: the same config (including
/// master_seed) always produces the same outcome, record for record.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, ExperimentError> {
    cfg.validate()?;
    let mut datasets = Vec::with_capacity(cfg.datasets.len());
    for source in &cfg.datasets {
        let d = source.load()?;
        if datasets.iter().any(|e: &Dataset| e.name() == d.name()) {
            return Err(ExperimentError::Config(format!(
                "duplicate dataset name '{}'",
                d.name()
            )));
        }
        datasets.push(d);
    }

    let mut outcome = ExperimentOutcome::default();
    for d in &datasets {
        for &noise in &cfg.noise_levels {
            for rep in 0..cfg.repetitions {
                let cell_seed = seeding::absorb_u64(
                    seeding::absorb_f64(
                        seeding::absorb_str(cfg.master_seed, d.name()),
                        noise,
                    ),
                    rep as u64,
                );
                run_cell(cfg, d, noise, rep, cell_seed, &mut outcome);
            }
        }
    }
    outcome.records.sort_by(|a, b| {
        (
            &a.dataset,
            a.method,
            a.noise.to_bits(),
            a.repetition,
            a.fold,
        )
            .cmp(&(&b.dataset, b.method, b.noise.to_bits(), b.repetition, b.fold))
    });
    Ok(outcome)
}

fn run_cell(
    cfg: &ExperimentConfig,
    d: &Dataset,
    noise: f64,
    rep: usize,
    cell_seed: u64,
    outcome: &mut ExperimentOutcome,
) {
    let fail_all = |message: String, outcome: &mut ExperimentOutcome| {
        for &method in &cfg.methods {
            outcome.failures.push(CellFailure {
                dataset: d.name().to_string(),
                method,
                noise,
                repetition: rep,
                message: message.clone(),
            });
        }
    };

    let folds = match stratified_kfold(d, CV_FOLDS, seeding::derive(cell_seed, 0)) {
        Ok(f) => f,
        Err(e) => return fail_all(e.to_string(), outcome),
    };
    let mut materials = Vec::with_capacity(folds.len());
    for (fold_id, f) in folds.iter().enumerate() {
        let noise_seed = seeding::derive(cell_seed, 1 + fold_id as u64);
        match prepare_fold(d, &f.train_indices, &f.test_indices, noise, noise_seed) {
            Ok(m) => materials.push(m),
            Err(e) => return fail_all(e.to_string(), outcome),
        }
    }

    for &method in &cfg.methods {
        let method_seed = seeding::absorb_str(cell_seed, method.as_str());
        let mut cell_records = Vec::with_capacity(materials.len());
        let mut failure = None;
        for (fold_id, material) in materials.iter().enumerate() {
            let pool_seed = seeding::derive(method_seed, fold_id as u64);
            match run_method_on_fold(method, material, cfg, pool_seed) {
                Ok((accuracy, freq)) => cell_records.push(ExperimentRecord {
                    dataset: d.name().to_string(),
                    method,
                    noise,
                    repetition: rep,
                    fold: fold_id,
                    accuracy,
                    freq_noisy: freq,
                    seed: pool_seed,
                }),
                Err(e) => {
                    failure = Some(e.to_string());
                    break;
                }
            }
        }
        match failure {
            None => outcome.records.extend(cell_records),
            Some(message) => outcome.failures.push(CellFailure {
                dataset: d.name().to_string(),
                method,
                noise,
                repetition: rep,
                message,
            }),
        }
    }
}

pub const RECORDS_HEADER: &str = "dataset,method,noise,repetition,fold,accuracy,freq_noisy,seed";

/// Serialize records to CSV. Floats use the shortest round-trip form, so
/// equal runs produce equal bytes.
pub fn records_to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        debug_assert!(
            !r.dataset.contains(',') && !r.dataset.contains('\n'),
            "dataset names must be CSV-safe"
        );
        let freq = r.freq_noisy.map(|f| f.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.dataset, r.method, r.noise, r.repetition, r.fold, r.accuracy, freq, r.seed
        );
    }
    out
}

/// Parse a records CSV produced by `records_to_csv`.
pub fn parse_records_csv(text: &str) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == RECORDS_HEADER => {}
        Some((_, header)) => {
            return Err(ExperimentError::RecordsParse {
                line: 1,
                message: format!("unexpected header '{header}'"),
            })
        }
        None => {
            return Err(ExperimentError::RecordsParse {
                line: 1,
                message: "empty file".into(),
            })
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 8 {
            return Err(ExperimentError::RecordsParse {
                line: lineno,
                message: format!("expected 8 columns, found {}", cells.len()),
            });
        }
        let err = |message: String| ExperimentError::RecordsParse {
            line: lineno,
            message,
        };
        let method: Method = cells[1]
            .parse()
            .map_err(|_| err(format!("unknown method '{}'", cells[1])))?;
        let parse_f64 = |cell: &str, what: &str| -> Result<f64, ExperimentError> {
            cell.parse()
                .map_err(|_| err(format!("bad {what} '{cell}'")))
        };
        let parse_usize = |cell: &str, what: &str| -> Result<usize, ExperimentError> {
            cell.parse()
                .map_err(|_| err(format!("bad {what} '{cell}'")))
        };
        records.push(ExperimentRecord {
            dataset: cells[0].to_string(),
            method,
            noise: parse_f64(cells[2], "noise")?,
            repetition: parse_usize(cells[3], "repetition")?,
            fold: parse_usize(cells[4], "fold")?,
            accuracy: parse_f64(cells[5], "accuracy")?,
            freq_noisy: if cells[6].is_empty() {
                None
            } else {
                Some(parse_f64(cells[6], "freq_noisy")?)
            },
            seed: cells[7]
                .parse()
                .map_err(|_| err(format!("bad seed '{}'", cells[7])))?,
        });
    }
    Ok(records)
}

pub fn save_records_csv(
    path: impl AsRef<Path>,
    records: &[ExperimentRecord],
) -> Result<(), ExperimentError> {
    let path = path.as_ref();
    std::fs::write(path, records_to_csv(records)).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_records_csv(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_records_csv(&text)
}

/// Per-(dataset, method, noise) aggregate, built the same way the result
/// tables are: average each repetition's folds first, then take mean and
/// sample standard deviation over the repetition means.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCell {
    pub dataset: String,
    pub method: Method,
    pub noise: f64,
    pub mean_accuracy: f64,
    /// None with a single repetition, where a sample std is undefined.
    pub std_accuracy: Option<f64>,
    pub repetitions: usize,
    /// Mean freq_noisy over all the cell's records, when every record has one.
    pub mean_freq_noisy: Option<f64>,
}

pub fn aggregate(records: &[ExperimentRecord]) -> Vec<AggregateCell> {
    let mut cells: BTreeMap<(String, Method, u64), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.dataset.clone(), r.method, r.noise.to_bits()))
            .or_default()
            .push(r);
    }
    let mut out = Vec::with_capacity(cells.len());
    for ((dataset, method, noise_bits), cell) in cells {
        let mut by_rep: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for r in &cell {
            by_rep.entry(r.repetition).or_default().push(r.accuracy);
        }
        let rep_means: Vec<f64> = by_rep
            .values()
            .map(|folds| folds.iter().sum::<f64>() / folds.len() as f64)
            .collect();
        let (mean_accuracy, std_accuracy) = if rep_means.len() >= 2 {
            let (m, s) = crate::stats::summarize(&rep_means).expect("len checked");
            (m, Some(s))
        } else {
            (rep_means[0], None)
        };
        let freqs: Vec<f64> = cell.iter().filter_map(|r| r.freq_noisy).collect();
        let mean_freq_noisy = if freqs.len() == cell.len() {
            Some(freqs.iter().sum::<f64>() / freqs.len() as f64)
        } else {
            None
        };
        out.push(AggregateCell {
            dataset,
            method,
            noise: f64::from_bits(noise_bits),
            mean_accuracy,
            std_accuracy,
            repetitions: rep_means.len(),
            mean_freq_noisy,
        });
    }
    out
}
