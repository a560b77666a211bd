//! Summary statistics and the two-tailed Wilcoxon signed-rank test.
//!
//! The signed-rank test here follows the classic recipe: zero differences
//! are dropped, absolute differences are ranked with average ranks for
//! ties, and the statistic is W = min(W+, W-). Up to 20 effective pairs
//! the two-tailed p-value is exact, computed from the full null
//! distribution of W+ over all 2^n sign assignments; beyond that a normal
//! approximation with tie-corrected variance and continuity correction
//! takes over. Reject at p < 0.05.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least {need} values, got {got}")]
    TooFewValues { got: usize, need: usize },
    #[error("non-finite value {0} in input")]
    NonFinite(f64),
}

/// Paired accuracy differences with zeros already identified.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedComparison {
    differences: Vec<f64>,
    n_effective: usize,
}

impl PairedComparison {
    pub fn new(differences: Vec<f64>) -> Result<Self, StatsError> {
        if let Some(&bad) = differences.iter().find(|d| !d.is_finite()) {
            return Err(StatsError::NonFinite(bad));
        }
        let n_effective = differences.iter().filter(|&&d| d != 0.0).count();
        Ok(Self {
            differences,
            n_effective,
        })
    }

    pub fn differences(&self) -> &[f64] {
        &self.differences
    }

    /// Count of nonzero differences, i.e. the pairs the test actually uses.
    pub fn n_effective(&self) -> usize {
        self.n_effective
    }
}

/// Arithmetic mean.
pub fn mean(values: &[f64]) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::TooFewValues { got: 0, need: 1 });
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Mean and sample standard deviation (n-1 denominator).
pub fn summarize(values: &[f64]) -> Result<(f64, f64), StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFewValues {
            got: values.len(),
            need: 2,
        });
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Ok((m, (ss / (values.len() - 1) as f64).sqrt()))
}

/// Which p-value computation a Wilcoxon result used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

impl WilcoxonMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            WilcoxonMethod::Exact => "exact",
            WilcoxonMethod::NormalApprox => "approx",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: WilcoxonMethod,
    pub n_effective: usize,
}

/// Two-tailed Wilcoxon signed-rank test on paired differences.
///
/// All-zero input is defined as "no evidence": W = 0, p = 1.
pub fn wilcoxon_signed_rank(diffs: &[f64]) -> Result<WilcoxonResult, StatsError> {
    wilcoxon_with_cutoff(diffs, 20)
}

/// Average ranks (1-based) of already-sorted absolute differences.
fn average_ranks(sorted_abs: &[f64]) -> Vec<f64> {
    let n = sorted_abs.len();
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted_abs[j + 1] == sorted_abs[i] {
            j += 1;
        }
        // positions i+1 ..= j+1 share the rank (i + j + 2) / 2
        let shared = (i + j + 2) as f64 / 2.0;
        for r in ranks.iter_mut().take(j + 1).skip(i) {
            *r = shared;
        }
        i = j + 1;
    }
    ranks
}

pub(crate) fn wilcoxon_with_cutoff(
    diffs: &[f64],
    exact_cutoff: usize,
) -> Result<WilcoxonResult, StatsError> {
    if diffs.is_empty() {
        return Err(StatsError::TooFewValues { got: 0, need: 1 });
    }
    if let Some(&bad) = diffs.iter().find(|d| !d.is_finite()) {
        return Err(StatsError::NonFinite(bad));
    }
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            p_value: 1.0,
            method: WilcoxonMethod::Exact,
            n_effective: 0,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| nonzero[a].abs().partial_cmp(&nonzero[b].abs()).unwrap());
    let sorted_abs: Vec<f64> = order.iter().map(|&i| nonzero[i].abs()).collect();
    let ranks_sorted = average_ranks(&sorted_abs);

    let mut w_plus = 0.0;
    for (pos, &i) in order.iter().enumerate() {
        if nonzero[i] > 0.0 {
            w_plus += ranks_sorted[pos];
        }
    }
    let total = n as f64 * (n + 1) as f64 / 2.0;
    let w_minus = total - w_plus;
    let statistic = w_plus.min(w_minus);

    let p_value = if n <= exact_cutoff {
        exact_two_tailed_p(&ranks_sorted, statistic)
    } else {
        approx_two_tailed_p(&ranks_sorted, statistic, n)
    };
    Ok(WilcoxonResult {
        statistic,
        p_value: p_value.clamp(f64::MIN_POSITIVE, 1.0),
        method: if n <= exact_cutoff {
            WilcoxonMethod::Exact
        } else {
            WilcoxonMethod::NormalApprox
        },
        n_effective: n,
    })
}

/// Exact p = 2 * P(W+ <= w) under the null, capped at 1.
///
/// Average ranks are multiples of 1/2, so doubling makes them integers and
/// the distribution of the doubled W+ is a subset-sum count, built by
/// dynamic programming. Counts and the power-of-two denominator are exact
/// in f64 for n <= 20, so the returned p carries no rounding error.
fn exact_two_tailed_p(ranks: &[f64], w: f64) -> f64 {
    let n = ranks.len();
    let doubled: Vec<usize> = ranks.iter().map(|&r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let w2 = (2.0 * w).round() as usize;
    let at_most: u64 = counts[..=w2.min(total)].iter().sum();
    let p = 2.0 * at_most as f64 / (1u64 << n) as f64;
    p.min(1.0)
}

/// Normal approximation with tie-corrected variance and a continuity
/// correction of 1/2 toward the mean.
fn approx_two_tailed_p(ranks_sorted: &[f64], w: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mu = nf * (nf + 1.0) / 4.0;
    let mut variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && ranks_sorted[j + 1] == ranks_sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        variance -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    let z = (w - mu + 0.5) / variance.sqrt();
    // two-tailed: 2 * Phi(z) for z <= 0, via erfc for precision in the tail
    libm::erfc(-z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent enumeration over all 2^n sign assignments.
    fn brute_force_p(diffs: &[f64]) -> f64 {
        let nonzero: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
        let n = nonzero.len();
        if n == 0 {
            return 1.0;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| nonzero[a].abs().partial_cmp(&nonzero[b].abs()).unwrap());
        let sorted_abs: Vec<f64> = order.iter().map(|&i| nonzero[i].abs()).collect();
        let ranks = average_ranks(&sorted_abs);
        let observed_plus: f64 = order
            .iter()
            .enumerate()
            .filter(|(_, &i)| nonzero[i] > 0.0)
            .map(|(pos, _)| ranks[pos])
            .sum();
        let total: f64 = ranks.iter().sum();
        let observed = observed_plus.min(total - observed_plus);
        let mut at_most = 0u64;
        for signs in 0u64..(1u64 << n) {
            let w_plus: f64 = (0..n)
                .filter(|&b| signs >> b & 1 == 1)
                .map(|b| ranks[b])
                .sum();
            if w_plus <= observed {
                at_most += 1;
            }
        }
        (2.0 * at_most as f64 / (1u64 << n) as f64).min(1.0)
    }

    #[test]
    fn summarize_constant_and_two_point() {
        let (m, s) = summarize(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!((m, s), (1.0, 0.0));
        let (m, s) = summarize(&[0.0, 2.0]).unwrap();
        assert_eq!(m, 1.0);
        assert!((s - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!(summarize(&[1.0]).is_err());
    }

    #[test]
    fn summarize_matches_welford_recomputation() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let values: Vec<f64> = (0..20).map(|_| rng.gen_range(0.0..100.0)).collect();
        let (m, s) = summarize(&values).unwrap();
        let mut w_mean = 0.0;
        let mut w_m2 = 0.0;
        for (i, &v) in values.iter().enumerate() {
            let delta = v - w_mean;
            w_mean += delta / (i + 1) as f64;
            w_m2 += delta * (v - w_mean);
        }
        assert!((m - w_mean).abs() < 1e-12);
        assert!((s - (w_m2 / 19.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nineteen_positive_differences_hit_the_floor() {
        let diffs: Vec<f64> = (0..19).map(|i| 0.5 + i as f64).collect();
        let r = wilcoxon_signed_rank(&diffs).unwrap();
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 2.0 / (1u64 << 19) as f64);
        assert!((r.p_value - 3.8147e-6).abs() / 3.8147e-6 < 1e-4);
    }

    #[test]
    fn single_difference_cannot_reject() {
        let r = wilcoxon_signed_rank(&[0.5]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.n_effective, 1);
    }

    #[test]
    fn three_differences_match_hand_enumeration() {
        let r = wilcoxon_signed_rank(&[1.2, -0.5, 0.3]).unwrap();
        assert_eq!(r.statistic, 2.0);
        assert_eq!(r.p_value, 0.75);
        assert_eq!(r.p_value, brute_force_p(&[1.2, -0.5, 0.3]));
    }

    #[test]
    fn all_zero_differences_are_defined() {
        let r = wilcoxon_signed_rank(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.method, WilcoxonMethod::Exact);
        assert_eq!(r.n_effective, 0);
    }

    #[test]
    fn zeros_are_dropped_before_ranking() {
        let with_zeros = wilcoxon_signed_rank(&[0.0, 0.5, 0.0]).unwrap();
        let without = wilcoxon_signed_rank(&[0.5]).unwrap();
        assert_eq!(with_zeros.p_value, without.p_value);
        assert_eq!(with_zeros.n_effective, 1);
    }

    #[test]
    fn p_is_symmetric_under_sign_flip_and_rescaling() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for n in [5usize, 12, 25] {
            let diffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let flipped: Vec<f64> = diffs.iter().map(|d| -d).collect();
            let scaled: Vec<f64> = diffs.iter().map(|d| 2.5 * d).collect();
            let a = wilcoxon_signed_rank(&diffs).unwrap();
            let b = wilcoxon_signed_rank(&flipped).unwrap();
            let c = wilcoxon_signed_rank(&scaled).unwrap();
            assert_eq!(a.p_value, b.p_value);
            assert_eq!(a.statistic, b.statistic);
            assert_eq!(a.p_value, c.p_value);
            assert_eq!(a.statistic, c.statistic);
        }
    }

    #[test]
    fn exact_matches_brute_force_on_random_vectors() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let n = rng.gen_range(1..=10);
            let diffs: Vec<f64> = (0..n)
                .map(|_| {
                    let v: f64 = rng.gen_range(0.01..1.0);
                    if rng.gen::<bool>() {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            let r = wilcoxon_signed_rank(&diffs).unwrap();
            assert!(
                (r.p_value - brute_force_p(&diffs)).abs() < 1e-12,
                "diffs {diffs:?}"
            );
        }
    }

    /// Published two-sided critical values at the 0.05 level: reject exactly
    /// when W is at or below the tabulated value.
    #[test]
    fn exact_p_agrees_with_critical_value_table() {
        let table = [(6usize, 0.0), (7, 2.0), (8, 3.0), (9, 5.0), (10, 8.0), (11, 10.0), (12, 13.0)];
        // build tie-free diffs whose negative ranks sum to the target W
        let with_w_minus = |n: usize, target: f64| -> Vec<f64> {
            let mut remaining = target;
            (1..=n)
                .rev()
                .map(|r| {
                    if r as f64 <= remaining {
                        remaining -= r as f64;
                        -(r as f64)
                    } else {
                        r as f64
                    }
                })
                .collect()
        };
        for (n, w_crit) in table {
            let reject = wilcoxon_signed_rank(&with_w_minus(n, w_crit)).unwrap();
            assert_eq!(reject.statistic, w_crit);
            assert!(reject.p_value < 0.05, "n={n} W={w_crit}: p={}", reject.p_value);
            let accept = wilcoxon_signed_rank(&with_w_minus(n, w_crit + 1.0)).unwrap();
            assert_eq!(accept.statistic, w_crit + 1.0);
            assert!(accept.p_value > 0.05, "n={n} W={}: p={}", w_crit + 1.0, accept.p_value);
        }
    }

    #[test]
    fn approximation_tracks_exact_at_the_cutoff() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let diffs: Vec<f64> = (0..20)
                .map(|_| {
                    let v: f64 = rng.gen_range(0.01..1.0);
                    if rng.gen::<bool>() {
                        v
                    } else {
                        -v
                    }
                })
                .collect();
            let exact = wilcoxon_with_cutoff(&diffs, 20).unwrap();
            let approx = wilcoxon_with_cutoff(&diffs, 0).unwrap();
            assert_eq!(approx.method, WilcoxonMethod::NormalApprox);
            assert!(
                (exact.p_value - approx.p_value).abs() < 0.01,
                "exact {} vs approx {}",
                exact.p_value,
                approx.p_value
            );
        }
    }

    #[test]
    fn large_samples_use_the_approximation() {
        let diffs: Vec<f64> = (1..=25).map(|i| i as f64).collect();
        let r = wilcoxon_signed_rank(&diffs).unwrap();
        assert_eq!(r.method, WilcoxonMethod::NormalApprox);
        assert!(r.p_value > 0.0 && r.p_value < 1e-4);
    }

    #[test]
    fn tied_magnitudes_get_average_ranks() {
        // |diffs| = [1,1,2,2] -> ranks [1.5, 1.5, 3.5, 3.5]
        let ranks = average_ranks(&[1.0, 1.0, 2.0, 2.0]);
        assert_eq!(ranks, vec![1.5, 1.5, 3.5, 3.5]);
        // a tied vector still enumerates exactly
        let diffs = [1.0, -1.0, 2.0, 2.0];
        let r = wilcoxon_signed_rank(&diffs).unwrap();
        assert!((r.p_value - brute_force_p(&diffs)).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(wilcoxon_signed_rank(&[]).is_err());
        assert!(wilcoxon_signed_rank(&[f64::NAN, 1.0]).is_err());
        assert!(PairedComparison::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn paired_comparison_counts_effective_pairs() {
        let pc = PairedComparison::new(vec![0.0, 1.0, -2.0, 0.0]).unwrap();
        assert_eq!(pc.n_effective(), 2);
        assert_eq!(pc.differences().len(), 4);
    }
}
