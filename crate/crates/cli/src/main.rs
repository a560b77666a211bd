//! Command-line front end for the experiment harness.
//!
//! `run` executes a configured sweep and writes the records CSV, `report`
//! turns records into tables and plot data, `hardness` dumps per-instance
//! kDN values, `wilcoxon` compares two per-dataset accuracy files, `means`
//! extracts such files from records, and `synth` materializes a blob
//! dataset for experimentation.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use bagging_ih::dataset::{apply_scaler, fit_scaler, load_csv, synth_blobs};
use bagging_ih::experiment::{
    aggregate, load_config, load_records_csv, run_experiment, save_records_csv, Method,
};
use bagging_ih::hardness::kdn;
use bagging_ih::report::{build_report, format_p, write_report};
use bagging_ih::stats::wilcoxon_signed_rank;

#[derive(Parser)]
#[command(
    name = "bagging-ih",
    version,
    about = "Hardness-weighted bagging experiments under label noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment sweep described by a config file.
    Run {
        /// Flat key-value config file (see the repository README for keys).
        #[arg(long)]
        config: PathBuf,
        /// Output directory; receives records.csv and, on partial
        /// failures, failures.txt.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build markdown tables and plot CSVs from a records file.
    Report {
        /// records.csv produced by `run`.
        #[arg(long)]
        records: PathBuf,
        /// Output directory (default: `report` next to the records file).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump per-instance kDN hardness of a dataset as CSV.
    Hardness {
        /// Dataset CSV (last column = class label).
        #[arg(long)]
        data: PathBuf,
        /// Neighborhood size.
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Skip the min-max scaling usually applied before distances.
        #[arg(long)]
        raw: bool,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-tailed Wilcoxon signed-rank test between two accuracy files
    /// (CSV with header `dataset,accuracy`), paired by dataset.
    Wilcoxon {
        a: PathBuf,
        b: PathBuf,
        /// Significance level for the printed decision.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Extract per-dataset mean accuracies for one method and noise level,
    /// in the format `wilcoxon` consumes.
    Means {
        #[arg(long)]
        records: PathBuf,
        /// bagging-ih, bagging, random-subspace or perceptron-ova.
        #[arg(long)]
        method: String,
        #[arg(long)]
        noise: f64,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a Gaussian-blob dataset CSV.
    Synth {
        #[arg(long)]
        classes: usize,
        #[arg(long)]
        per_class: usize,
        #[arg(long, default_value_t = 2)]
        features: usize,
        #[arg(long)]
        spread: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out } => run(&config, &out),
        Command::Report { records, out } => report(&records, out),
        Command::Hardness { data, k, raw, out } => hardness(&data, k, raw, out),
        Command::Wilcoxon { a, b, alpha } => wilcoxon(&a, &b, alpha),
        Command::Means {
            records,
            method,
            noise,
            out,
        } => means(&records, &method, noise, out),
        Command::Synth {
            classes,
            per_class,
            features,
            spread,
            seed,
            out,
        } => synth(classes, per_class, features, spread, seed, &out),
    }
}

fn run(config: &Path, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let outcome = run_experiment(&cfg)?;
    std::fs::create_dir_all(out)
        .with_context(|| format!("could not create {}", out.display()))?;
    let records_path = out.join("records.csv");
    save_records_csv(&records_path, &outcome.records)?;
    println!(
        "{} records -> {}",
        outcome.records.len(),
        records_path.display()
    );
    if !outcome.failures.is_empty() {
        let failures_path = out.join("failures.txt");
        let mut text = String::new();
        for f in &outcome.failures {
            let _ = writeln!(
                text,
                "{} {} noise={} repetition={}: {}",
                f.dataset, f.method, f.noise, f.repetition, f.message
            );
        }
        std::fs::write(&failures_path, text)
            .with_context(|| format!("could not write {}", failures_path.display()))?;
        eprintln!(
            "warning: {} cells failed, see {}",
            outcome.failures.len(),
            failures_path.display()
        );
    }
    Ok(())
}

fn report(records_path: &Path, out: Option<PathBuf>) -> Result<()> {
    let records = load_records_csv(records_path)?;
    let report = build_report(&records)?;
    let out = out.unwrap_or_else(|| {
        records_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join("report")
    });
    for path in write_report(&report, &out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn hardness(data: &Path, k: usize, raw: bool, out: Option<PathBuf>) -> Result<()> {
    let d = load_csv(data)?;
    let d = if raw {
        d
    } else {
        let all: Vec<usize> = (0..d.n_instances()).collect();
        apply_scaler(&fit_scaler(&d, &all)?, &d)?
    };
    let profile = kdn(&d, k)?;
    let mut csv = String::from("instance_index,label,kdn_value\n");
    for (i, &v) in profile.values().iter().enumerate() {
        let _ = writeln!(csv, "{},{},{}", i, d.labels()[i], v);
    }
    match out {
        Some(path) => {
            std::fs::write(&path, csv)
                .with_context(|| format!("could not write {}", path.display()))?;
            println!("{}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

/// Parse an accuracy file: header `dataset,accuracy`, one dataset per row.
fn load_accuracies(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("could not read {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "dataset,accuracy")) => {}
        _ => bail!(
            "{}: expected header 'dataset,accuracy'",
            path.display()
        ),
    }
    let mut map = BTreeMap::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let (dataset, value) = line
            .split_once(',')
            .with_context(|| format!("{} line {}: expected two columns", path.display(), idx + 1))?;
        let accuracy: f64 = value
            .parse()
            .with_context(|| format!("{} line {}: bad accuracy '{value}'", path.display(), idx + 1))?;
        if map.insert(dataset.to_string(), accuracy).is_some() {
            bail!("{}: duplicate dataset '{dataset}'", path.display());
        }
    }
    if map.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    Ok(map)
}

fn wilcoxon(a_path: &Path, b_path: &Path, alpha: f64) -> Result<()> {
    let a = load_accuracies(a_path)?;
    let b = load_accuracies(b_path)?;
    let a_names: Vec<&String> = a.keys().collect();
    let b_names: Vec<&String> = b.keys().collect();
    if a_names != b_names {
        bail!(
            "dataset sets differ between {} and {}",
            a_path.display(),
            b_path.display()
        );
    }
    let diffs: Vec<f64> = a.iter().map(|(name, &va)| va - b[name]).collect();
    let r = wilcoxon_signed_rank(&diffs)?;
    println!("pairs: {} ({} effective after dropping zeros)", diffs.len(), r.n_effective);
    println!("W = {}", r.statistic);
    println!("p = {} ({})", format_p(r.p_value), r.method.as_str());
    if r.p_value < alpha {
        println!("reject the null hypothesis at alpha = {alpha}: accuracies differ");
    } else {
        println!("no evidence of a difference at alpha = {alpha}");
    }
    Ok(())
}

fn means(records_path: &Path, method: &str, noise: f64, out: Option<PathBuf>) -> Result<()> {
    let method: Method = method.parse()?;
    let records = load_records_csv(records_path)?;
    let mut csv = String::from("dataset,accuracy\n");
    let mut rows = 0;
    for cell in aggregate(&records) {
        if cell.method == method && cell.noise.to_bits() == noise.to_bits() {
            let _ = writeln!(csv, "{},{}", cell.dataset, cell.mean_accuracy);
            rows += 1;
        }
    }
    if rows == 0 {
        bail!("no records for method '{method}' at noise level {noise}");
    }
    match out {
        Some(path) => {
            std::fs::write(&path, csv)
                .with_context(|| format!("could not write {}", path.display()))?;
            println!("{}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn synth(
    classes: usize,
    per_class: usize,
    features: usize,
    spread: f64,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let d = synth_blobs(classes, per_class, features, spread, seed)?;
    d.save_csv(out)?;
    println!("{} ({} instances) -> {}", d.name(), d.n_instances(), out.display());
    Ok(())
}
