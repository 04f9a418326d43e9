//! Statistical helpers shared by the integration suites.

#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Upper critical value of the chi-square distribution.
pub fn chi2_critical(df: usize, alpha: f64) -> f64 {
    ChiSquared::new(df as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha)
}

/// Pools adjacent bins until each pooled bin's expected count reaches
/// `min_expected` (any small remainder folds into the final bin), then
/// returns the goodness-of-fit statistic and the pooled bin count.
pub fn pooled_chi2(observed: &[u64], expected: &[f64], min_expected: f64) -> (f64, usize) {
    assert_eq!(observed.len(), expected.len());
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut acc_o, mut acc_e) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        acc_o += o as f64;
        acc_e += e;
        if acc_e >= min_expected {
            bins.push((acc_o, acc_e));
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc_o;
                last.1 += acc_e;
            }
            None => bins.push((acc_o, acc_e)),
        }
    }
    assert!(
        bins.len() >= 2,
        "need at least two pooled bins, got {}",
        bins.len()
    );
    let stat = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    (stat, bins.len())
}

/// Goodness-of-fit test of an observed histogram against target
/// probabilities. Panics with a diagnostic when the statistic exceeds the
/// critical value at the given significance; returns (statistic, critical).
pub fn assert_chi2_gof(
    name: &str,
    observed: &[u64],
    probs: &[f64],
    significance: f64,
) -> (f64, f64) {
    let n: u64 = observed.iter().sum();
    let expected: Vec<f64> = probs.iter().map(|&p| p * n as f64).collect();
    let (stat, bins) = pooled_chi2(observed, &expected, 5.0);
    let crit = chi2_critical(bins - 1, significance);
    assert!(
        stat <= crit,
        "{name}: chi-square {stat:.2} > critical {crit:.2} ({bins} pooled bins, n = {n})"
    );
    (stat, crit)
}

/// Two-sample chi-square statistic for two histograms over the same bins,
/// pooling bins whose combined count is below `min_combined`. Returns the
/// statistic and the pooled bin count.
pub fn two_sample_chi2(a: &[u64], b: &[u64], min_combined: f64) -> (f64, usize) {
    assert_eq!(a.len(), b.len());
    let na: f64 = a.iter().sum::<u64>() as f64;
    let nb: f64 = b.iter().sum::<u64>() as f64;
    assert!(na > 0.0 && nb > 0.0);
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut acc_a, mut acc_b) = (0.0, 0.0);
    for (&ai, &bi) in a.iter().zip(b) {
        acc_a += ai as f64;
        acc_b += bi as f64;
        if acc_a + acc_b >= min_combined {
            bins.push((acc_a, acc_b));
            acc_a = 0.0;
            acc_b = 0.0;
        }
    }
    if acc_a + acc_b > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc_a;
                last.1 += acc_b;
            }
            None => bins.push((acc_a, acc_b)),
        }
    }
    assert!(
        bins.len() >= 2,
        "need at least two pooled bins, got {}",
        bins.len()
    );
    let total = na + nb;
    let stat = bins
        .iter()
        .map(|(ai, bi)| {
            let combined = ai + bi;
            let ea = na * combined / total;
            let eb = nb * combined / total;
            (ai - ea) * (ai - ea) / ea + (bi - eb) * (bi - eb) / eb
        })
        .sum();
    (stat, bins.len())
}

/// Asserts two histograms are consistent with a common distribution;
/// returns (statistic, critical).
pub fn assert_two_sample_chi2(name: &str, a: &[u64], b: &[u64], significance: f64) -> (f64, f64) {
    let (stat, bins) = two_sample_chi2(a, b, 10.0);
    let crit = chi2_critical(bins - 1, significance);
    assert!(
        stat <= crit,
        "{name}: two-sample chi-square {stat:.2} > critical {crit:.2} ({bins} pooled bins)"
    );
    (stat, crit)
}

/// Kolmogorov-Smirnov statistic of a sample against Uniform(lo, hi).
pub fn ks_statistic_uniform(samples: &[f64], lo: f64, hi: f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("no NaN samples"));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic Kolmogorov-Smirnov critical value at significance 10^-2 or
/// 10^-3: c(alpha) / sqrt(n) with c = sqrt(-ln(alpha/2) / 2).
pub fn ks_critical(n: usize, significance: f64) -> f64 {
    let factor = if significance == 1e-2 {
        1.627_623_630_718_729_3
    } else if significance == 1e-3 {
        1.949_474_603_520_405_2
    } else {
        panic!("unsupported KS significance {significance}");
    };
    factor / (n as f64).sqrt()
}

/// Probabilities of Geometric(w) on {1..cap} plus a tail bin for > cap.
pub fn geometric_probs_with_tail(w: f64, cap: usize) -> Vec<f64> {
    assert!(w > 0.0 && w <= 1.0);
    let mut probs: Vec<f64> = (1..=cap)
        .map(|k| w * (1.0 - w).powi(k as i32 - 1))
        .collect();
    let tail = (1.0 - w).powi(cap as i32);
    probs.push(tail);
    probs
}

/// Folds observed counts (1-based values) into {1..cap} plus a tail bin.
pub fn fold_counts_with_tail(values: &[u64], cap: usize) -> Vec<u64> {
    let mut counts = vec![0u64; cap + 1];
    for &v in values {
        assert!(v >= 1);
        let slot = (v as usize).min(cap + 1) - 1;
        counts[slot] += 1;
    }
    counts
}
