//! Report generation from experiment records.
//!
//! Three artifact families, one per kind of figure in a typical write-up:
//! a markdown accuracy table per noise level (datasets as rows, methods as
//! columns, best mean bolded, pairwise signed-rank p-values against the
//! first method in the last row), a boxplot-data CSV per noise level over
//! the hardness-weighted method's freq_noisy values (with the noise rate
//! as reference line), and a noise-vs-mean-accuracy CSV with one column
//! per method. Accuracy is reported in percent in the tables and kept as
//! a fraction in the CSVs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::experiment::{aggregate, AggregateCell, ExperimentRecord, Method};
use crate::stats::{wilcoxon_signed_rank, StatsError};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no records to report")]
    Empty,
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("could not write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// All artifacts derived from one records set, keyed by noise level where
/// applicable. Strings are complete file bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub tables: Vec<(f64, String)>,
    pub boxplots: Vec<(f64, String)>,
    pub noise_curve: String,
}

/// Linear-interpolation percentile of a sorted slice (the convention most
/// plotting stacks default to).
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = (n - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// min, q1, median, q3, max of an unsorted, non-empty sample.
pub fn five_number_summary(values: &[f64]) -> (f64, f64, f64, f64, f64) {
    assert!(!values.is_empty(), "summary of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (
        sorted[0],
        percentile(&sorted, 0.25),
        percentile(&sorted, 0.5),
        percentile(&sorted, 0.75),
        sorted[sorted.len() - 1],
    )
}

fn fmt_accuracy_cell(mean: f64, std: Option<f64>) -> String {
    match std {
        Some(s) => format!("{:.2} ± {:.2}", 100.0 * mean, 100.0 * s),
        None => format!("{:.2}", 100.0 * mean),
    }
}

/// p-values as the tables print them: four decimals, switching to
/// scientific notation below 0.001.
pub fn format_p(p: f64) -> String {
    if p < 1e-3 {
        format!("{p:.4e}")
    } else {
        format!("{p:.4}")
    }
}

struct Grouped {
    datasets: Vec<String>,
    methods: Vec<Method>,
    noises: Vec<f64>,
    cells: Vec<AggregateCell>,
}

impl Grouped {
    fn cell(&self, dataset: &str, method: Method, noise: f64) -> Option<&AggregateCell> {
        self.cells.iter().find(|c| {
            c.dataset == dataset && c.method == method && c.noise.to_bits() == noise.to_bits()
        })
    }
}

fn group(records: &[ExperimentRecord]) -> Result<Grouped, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Empty);
    }
    let cells = aggregate(records);
    let datasets: Vec<String> = cells
        .iter()
        .map(|c| c.dataset.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let methods: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| cells.iter().any(|c| c.method == *m))
        .collect();
    let mut noises: Vec<f64> = cells
        .iter()
        .map(|c| c.noise.to_bits())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(f64::from_bits)
        .collect();
    noises.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(Grouped {
        datasets,
        methods,
        noises,
        cells,
    })
}

/// One markdown accuracy table: datasets as rows, methods as columns, a
/// column-mean row, and pairwise signed-rank p-values against the first
/// column computed over the per-dataset mean accuracies.
fn accuracy_table(g: &Grouped, noise: f64) -> Result<String, ReportError> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Mean accuracy (percent, mean ± std over repetitions) at noise level {noise}."
    );
    out.push('\n');
    out.push_str("| Dataset |");
    for m in &g.methods {
        let _ = write!(out, " {m} |");
    }
    out.push('\n');
    out.push_str("| --- |");
    for _ in &g.methods {
        out.push_str(" --- |");
    }
    out.push('\n');

    for dataset in &g.datasets {
        let row: Vec<Option<&AggregateCell>> = g
            .methods
            .iter()
            .map(|&m| g.cell(dataset, m, noise))
            .collect();
        let best = row
            .iter()
            .flatten()
            .map(|c| c.mean_accuracy)
            .fold(f64::NEG_INFINITY, f64::max);
        let _ = write!(out, "| {dataset} |");
        for cell in &row {
            match cell {
                Some(c) => {
                    let text = fmt_accuracy_cell(c.mean_accuracy, c.std_accuracy);
                    if c.mean_accuracy == best {
                        let _ = write!(out, " **{text}** |");
                    } else {
                        let _ = write!(out, " {text} |");
                    }
                }
                None => {
                    let _ = write!(out, " - |");
                }
            }
        }
        out.push('\n');
    }

    // column means over the datasets each method actually covered
    let column_means: Vec<Option<f64>> = g
        .methods
        .iter()
        .map(|&m| {
            let values: Vec<f64> = g
                .datasets
                .iter()
                .filter_map(|d| g.cell(d, m, noise))
                .map(|c| c.mean_accuracy)
                .collect();
            if values.is_empty() {
                None
            } else {
                Some(values.iter().sum::<f64>() / values.len() as f64)
            }
        })
        .collect();
    let best_mean = column_means
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    out.push_str("| Mean |");
    for mean in &column_means {
        match mean {
            Some(m) if *m == best_mean => {
                let _ = write!(out, " **{:.2}** |", 100.0 * m);
            }
            Some(m) => {
                let _ = write!(out, " {:.2} |", 100.0 * m);
            }
            None => {
                let _ = write!(out, " - |");
            }
        }
    }
    out.push('\n');

    // pairwise test of the first column against each other column, paired
    // over datasets present in both
    let reference = g.methods[0];
    out.push_str("| p-value |");
    for (i, &m) in g.methods.iter().enumerate() {
        if i == 0 {
            out.push_str(" - |");
            continue;
        }
        let diffs: Vec<f64> = g
            .datasets
            .iter()
            .filter_map(|d| {
                let a = g.cell(d, reference, noise)?;
                let b = g.cell(d, m, noise)?;
                Some(a.mean_accuracy - b.mean_accuracy)
            })
            .collect();
        if diffs.is_empty() {
            out.push_str(" - |");
        } else {
            let r = wilcoxon_signed_rank(&diffs)?;
            let _ = write!(out, " {} |", format_p(r.p_value));
        }
    }
    out.push('\n');
    Ok(out)
}

/// Boxplot data for the freq_noisy distribution at one noise level: one
/// row per dataset over the first bootstrap method that recorded the
/// frequencies, plus the noise rate as the reference line.
fn freq_boxplot(
    records: &[ExperimentRecord],
    g: &Grouped,
    noise: f64,
) -> Option<String> {
    let source_method = g.methods.iter().copied().find(|&m| {
        records.iter().any(|r| {
            r.method == m && r.noise.to_bits() == noise.to_bits() && r.freq_noisy.is_some()
        })
    })?;
    let mut out = String::from("dataset,min,q1,median,q3,max,reference\n");
    for dataset in &g.datasets {
        let values: Vec<f64> = records
            .iter()
            .filter(|r| {
                r.dataset == *dataset
                    && r.method == source_method
                    && r.noise.to_bits() == noise.to_bits()
            })
            .filter_map(|r| r.freq_noisy)
            .collect();
        if values.is_empty() {
            continue;
        }
        let (min, q1, median, q3, max) = five_number_summary(&values);
        let _ = writeln!(out, "{dataset},{min},{q1},{median},{q3},{max},{noise}");
    }
    Some(out)
}

/// Mean accuracy (fraction) per noise level, one column per method,
/// averaged over datasets.
fn noise_curve(g: &Grouped) -> String {
    let mut out = String::from("noise");
    for m in &g.methods {
        let _ = write!(out, ",{m}");
    }
    out.push('\n');
    for &noise in &g.noises {
        let _ = write!(out, "{noise}");
        for &m in &g.methods {
            let values: Vec<f64> = g
                .datasets
                .iter()
                .filter_map(|d| g.cell(d, m, noise))
                .map(|c| c.mean_accuracy)
                .collect();
            if values.is_empty() {
                out.push(',');
            } else {
                let _ = write!(out, ",{}", values.iter().sum::<f64>() / values.len() as f64);
            }
        }
        out.push('\n');
    }
    out
}

/// Build every artifact for a records set.
pub fn build_report(records: &[ExperimentRecord]) -> Result<Report, ReportError> {
    let g = group(records)?;
    let mut tables = Vec::with_capacity(g.noises.len());
    let mut boxplots = Vec::new();
    for &noise in &g.noises {
        tables.push((noise, accuracy_table(&g, noise)?));
        if let Some(csv) = freq_boxplot(records, &g, noise) {
            boxplots.push((noise, csv));
        }
    }
    Ok(Report {
        tables,
        boxplots,
        noise_curve: noise_curve(&g),
    })
}

/// Write the report into `dir` (created if absent); returns the paths
/// written, in a stable order.
pub fn write_report(report: &Report, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, ReportError> {
    let dir = dir.as_ref();
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source: std::io::Error| ReportError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (noise, table) in &report.tables {
        let path = dir.join(format!("accuracy_noise_{noise}.md"));
        std::fs::write(&path, table).map_err(io_err(&path))?;
        written.push(path);
    }
    for (noise, csv) in &report.boxplots {
        let path = dir.join(format!("freq_noisy_noise_{noise}.csv"));
        std::fs::write(&path, csv).map_err(io_err(&path))?;
        written.push(path);
    }
    let path = dir.join("noise_vs_accuracy.csv");
    std::fs::write(&path, &report.noise_curve).map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::CV_FOLDS;

    fn record(
        dataset: &str,
        method: Method,
        noise: f64,
        rep: usize,
        fold: usize,
        accuracy: f64,
        freq: Option<f64>,
    ) -> ExperimentRecord {
        ExperimentRecord {
            dataset: dataset.into(),
            method,
            noise,
            repetition: rep,
            fold,
            accuracy,
            freq_noisy: freq,
            seed: 0,
        }
    }

    /// Two datasets, two methods, one noise level: every fold of a cell
    /// carries the same accuracy so the expected table is exact.
    fn crafted_records() -> Vec<ExperimentRecord> {
        let mut records = Vec::new();
        let cells = [
            ("alpha", Method::BaggingIh, 0.9, Some(0.05)),
            ("alpha", Method::Bagging, 0.8, Some(0.1)),
            ("beta", Method::BaggingIh, 0.7, Some(0.04)),
            ("beta", Method::Bagging, 0.75, Some(0.09)),
        ];
        for (dataset, method, acc, freq) in cells {
            for rep in 0..2 {
                for fold in 0..CV_FOLDS {
                    records.push(record(dataset, method, 0.1, rep, fold, acc, freq));
                }
            }
        }
        records
    }

    #[test]
    fn percentiles_use_linear_interpolation() {
        assert_eq!(
            five_number_summary(&[4.0, 1.0, 3.0, 2.0]),
            (1.0, 1.75, 2.5, 3.25, 4.0)
        );
        assert_eq!(
            five_number_summary(&[5.0, 1.0, 2.0, 4.0, 3.0]),
            (1.0, 2.0, 3.0, 4.0, 5.0)
        );
        assert_eq!(five_number_summary(&[5.0]), (5.0, 5.0, 5.0, 5.0, 5.0));
    }

    #[test]
    fn table_formats_cells_and_bolds_the_best() {
        let report = build_report(&crafted_records()).unwrap();
        assert_eq!(report.tables.len(), 1);
        let (noise, table) = &report.tables[0];
        assert_eq!(*noise, 0.1);
        assert!(table.contains("| Dataset | bagging-ih | bagging |"));
        assert!(table.contains("| alpha | **90.00 ± 0.00** | 80.00 ± 0.00 |"));
        assert!(table.contains("| beta | 70.00 ± 0.00 | **75.00 ± 0.00** |"));
        // column means: ih (0.9+0.7)/2 = 0.8, bagging (0.8+0.75)/2 = 0.775
        assert!(table.contains("| Mean | **80.00** | 77.50 |"));
        // diffs [0.1, -0.05] -> W = 1 -> p = 1.0
        assert!(table.contains("| p-value | - | 1.0000 |"));
    }

    #[test]
    fn tiny_p_values_use_scientific_notation() {
        assert_eq!(format_p(2.0 / (1u64 << 19) as f64), "3.8147e-6");
        assert_eq!(format_p(0.0602), "0.0602");
    }

    #[test]
    fn boxplot_covers_the_first_bootstrap_method() {
        let report = build_report(&crafted_records()).unwrap();
        assert_eq!(report.boxplots.len(), 1);
        let (noise, csv) = &report.boxplots[0];
        assert_eq!(*noise, 0.1);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "dataset,min,q1,median,q3,max,reference"
        );
        // constant freq per dataset: all five numbers equal the cell value
        assert_eq!(lines.next().unwrap(), "alpha,0.05,0.05,0.05,0.05,0.05,0.1");
        assert_eq!(lines.next().unwrap(), "beta,0.04,0.04,0.04,0.04,0.04,0.1");
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn noise_curve_lists_levels_ascending() {
        let mut records = crafted_records();
        for (dataset, acc) in [("alpha", 0.5), ("beta", 0.6)] {
            for fold in 0..CV_FOLDS {
                records.push(record(dataset, Method::BaggingIh, 0.0, 0, fold, acc, None));
                records.push(record(dataset, Method::Bagging, 0.0, 0, fold, acc, None));
            }
        }
        let report = build_report(&records).unwrap();
        let lines: Vec<&str> = report.noise_curve.lines().collect();
        assert_eq!(lines[0], "noise,bagging-ih,bagging");
        assert_eq!(lines[1], "0,0.55,0.55");
        assert_eq!(lines[2], "0.1,0.8,0.775");
    }

    #[test]
    fn missing_cells_render_as_dashes() {
        let mut records = crafted_records();
        // the subspace method only ran on one dataset
        for fold in 0..CV_FOLDS {
            records.push(record(
                "alpha",
                Method::RandomSubspace,
                0.1,
                0,
                fold,
                0.6,
                None,
            ));
        }
        let (_, table) = &build_report(&records).unwrap().tables[0];
        assert!(table.contains("| beta | 70.00 ± 0.00 | **75.00 ± 0.00** | - |"));
        // a single-repetition cell prints without a std
        assert!(table.contains("| alpha | **90.00 ± 0.00** | 80.00 ± 0.00 | 60.00 |"));
    }

    #[test]
    fn report_building_is_deterministic() {
        let records = crafted_records();
        assert_eq!(
            build_report(&records).unwrap(),
            build_report(&records).unwrap()
        );
    }

    #[test]
    fn empty_records_are_rejected() {
        assert!(matches!(build_report(&[]), Err(ReportError::Empty)));
    }

    #[test]
    fn write_report_creates_the_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let report = build_report(&crafted_records()).unwrap();
        let written = write_report(&report, dir.path().join("out")).unwrap();
        let names: Vec<String> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            vec![
                "accuracy_noise_0.1.md",
                "freq_noisy_noise_0.1.csv",
                "noise_vs_accuracy.csv"
            ]
        );
        for p in &written {
            assert!(!std::fs::read_to_string(p).unwrap().is_empty());
        }
    }
}
