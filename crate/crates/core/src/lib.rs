//! Hardness-weighted bagging ensembles with a label-noise experiment
//! harness.
//!
//! The centerpiece is Bagging-IH, a bagging variant whose bootstrap
//! distribution is tilted away from hard instances: each training
//! instance's k-Disagreeing-Neighbors score (the fraction of its k nearest
//! neighbors with a different label) is mapped to a selection likelihood of
//! `1/n + (1 - kDN)`, normalized, and sampled with replacement. Mislabeled
//! points tend to sit among disagreeing neighbors, so they are picked
//! rarely, without ever being filtered outright. Plain Bagging, Random
//! Subspace and a single one-vs-all perceptron serve as baselines; the
//! experiment harness runs all of them through repeated stratified 5-fold
//! cross-validation under injected label noise, and the stats module
//! supplies the exact two-tailed Wilcoxon signed-rank test used to compare
//! them.
//!
//! Everything is deterministic given the configured master seed: reruns of
//! the same sweep serialize to byte-identical record files.
//!
//! Module map:
//! - [`dataset`]: CSV loading, min-max scaling, stratified k-fold splits,
//!   synthetic blob generators.
//! - [`hardness`]: brute-force k-nearest-neighbor search and kDN scores.
//! - [`classifier`]: the one-vs-all perceptron base learner.
//! - [`ensemble`]: sampling distributions, bootstrap pools, majority vote.
//! - [`noise`]: label corruption for training folds.
//! - [`stats`]: summaries and the Wilcoxon signed-rank test.
//! - [`experiment`]: the cross-validated sweep and its records format.
//! - [`report`]: markdown tables and plot-ready CSVs from records.
//! - [`seeding`]: the deterministic seed-derivation helpers the rest of
//!   the crate shares.

pub mod classifier;
pub mod dataset;
pub mod ensemble;
pub mod experiment;
pub mod hardness;
pub mod noise;
pub mod report;
pub mod seeding;
pub mod stats;
