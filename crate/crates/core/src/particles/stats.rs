//! Variance estimates with bootstrap intervals and discrete KS statistics.

use std::collections::BTreeMap;

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::sim::CountingSample;
use crate::error::{Error, Result};
use crate::rng::stream;
use crate::special::{kolmogorov_sf, norm_cdf};

pub const BOOTSTRAP_RESAMPLES: usize = 2000;
pub const MIN_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalNumVar {
    pub v_hat: f64,
    pub ci: (f64, f64),
    pub mean: f64,
    pub mean_ci: (f64, f64),
    pub replications: usize,
}

fn histogram(counts: &[u64]) -> Vec<(f64, u64)> {
    let mut h = BTreeMap::new();
    for &c in counts {
        *h.entry(c).or_insert(0u64) += 1;
    }
    h.into_iter().map(|(k, n)| (k as f64, n)).collect()
}

fn weighted_var(hist: &[(f64, u64)]) -> f64 {
    let n: u64 = hist.iter().map(|h| h.1).sum();
    if n < 2 {
        return 0.0;
    }
    let mean = hist.iter().map(|(x, k)| x * *k as f64).sum::<f64>() / n as f64;
    hist.iter().map(|(x, k)| (x - mean).powi(2) * *k as f64).sum::<f64>() / (n - 1) as f64
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap interval for the sample variance of integer counts.
///
/// Resampling with replacement is a multinomial draw over the histogram,
/// generated as a chain of binomials.
pub fn bootstrap_variance_ci(counts: &[u64], resamples: usize, level: f64, seed: u64) -> (f64, f64) {
    let hist = histogram(counts);
    if hist.len() <= 1 {
        return (0.0, 0.0);
    }
    let n = counts.len() as u64;
    let mut stats: Vec<f64> = (0..resamples)
        .map(|b| {
            let mut rng = stream(seed, "bootstrap", b as u64);
            let mut left = n;
            let mut mass_left = 1.0;
            let mut draw = Vec::with_capacity(hist.len());
            for (i, (x, k)) in hist.iter().enumerate() {
                let p = *k as f64 / n as f64;
                let m = if i + 1 == hist.len() || left == 0 {
                    left
                } else {
                    let pr = (p / mass_left).clamp(0.0, 1.0);
                    Binomial::new(left, pr).map(|d| d.sample(&mut rng)).unwrap_or(0)
                };
                left -= m;
                mass_left -= p;
                draw.push((*x, m));
            }
            weighted_var(&draw)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let alpha = 0.5 * (1.0 - level);
    (quantile(&stats, alpha), quantile(&stats, 1.0 - alpha))
}

/// Normal-approximation interval for the mean.
pub fn mean_ci(counts: &[u64], level_z: f64) -> (f64, f64, f64) {
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = weighted_var(&histogram(counts));
    let half = level_z * (var / n).sqrt();
    (mean, mean - half, mean + half)
}

/// Unbiased sample variance with a 95% bootstrap interval.
pub fn empirical_numvar(sample: &CountingSample) -> Result<EmpiricalNumVar> {
    if sample.counts.len() < MIN_REPLICATIONS {
        return Err(Error::InsufficientReplications {
            needed: MIN_REPLICATIONS,
            got: sample.counts.len(),
        });
    }
    let hist = histogram(&sample.counts);
    let v_hat = weighted_var(&hist);
    let ci = bootstrap_variance_ci(&sample.counts, BOOTSTRAP_RESAMPLES, 0.95, sample.seed);
    let (mean, lo, hi) = mean_ci(&sample.counts, 1.959_963_984_540_054);
    Ok(EmpiricalNumVar {
        v_hat,
        ci,
        mean,
        mean_ci: (lo, hi),
        replications: sample.counts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub stat: f64,
    pub p_value: f64,
}

/// KS distance between integer counts and the continuity-corrected normal
/// `Φ((k + 1/2 - mean)/sd)`, with the asymptotic Kolmogorov p-value.
pub fn ks_discrete_normal(counts: &[u64], mean: f64, sd: f64) -> KsResult {
    let n = counts.len() as f64;
    let hist = histogram(counts);
    let mut below = 0u64;
    let mut d: f64 = 0.0;
    for (k, m) in &hist {
        let model_before = norm_cdf((k - 0.5 - mean) / sd);
        d = d.max((below as f64 / n - model_before).abs());
        below += m;
        let model = norm_cdf((k + 0.5 - mean) / sd);
        d = d.max((below as f64 / n - model).abs());
    }
    KsResult {
        stat: d,
        p_value: kolmogorov_sf(d * n.sqrt()),
    }
}

/// Classical KS distance of continuous draws against a cdf.
pub fn ks_continuous<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F) -> KsResult {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    KsResult {
        stat: d,
        p_value: kolmogorov_sf(d * n.sqrt()),
    }
}

/// Two-sample KS distance.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> KsResult {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    KsResult {
        stat: d,
        p_value: kolmogorov_sf(d * en),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_counts_have_degenerate_interval() {
        let counts = vec![4u64; 500];
        assert_eq!(bootstrap_variance_ci(&counts, 200, 0.95, 1), (0.0, 0.0));
        assert_eq!(weighted_var(&histogram(&counts)), 0.0);
    }

    #[test]
    fn bootstrap_interval_brackets_the_estimate() {
        let counts: Vec<u64> = (0..1000u64).map(|i| (i * 7919) % 11).collect();
        let v = weighted_var(&histogram(&counts));
        let (lo, hi) = bootstrap_variance_ci(&counts, 500, 0.95, 3);
        assert!(lo < v && v < hi);
        // Width close to the normal-theory value 2·1.96·sd(s²).
        assert!(hi - lo < 0.3 * v);
    }

    #[test]
    fn discrete_ks_of_exact_poisson_quantiles() {
        // Counts laid out at Poisson(1000) quantiles are close to the corrected normal.
        let lambda: f64 = 1000.0;
        let n = 10_000;
        let mut counts = Vec::with_capacity(n);
        let mut k = 0u64;
        let mut cdf = crate::particles::law::poisson_pmf(lambda, 0);
        for i in 0..n {
            let p = (i as f64 + 0.5) / n as f64;
            while cdf < p {
                k += 1;
                cdf += crate::particles::law::poisson_pmf(lambda, k as usize);
            }
            counts.push(k);
        }
        let r = ks_discrete_normal(&counts, lambda, lambda.sqrt());
        assert!(r.stat < 0.02, "{r:?}");
    }
}
