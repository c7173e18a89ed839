//! Small statistical toolbox: chi-square goodness-of-fit and homogeneity
//! tests, deterministic bootstrap confidence intervals, and moment
//! summaries. Nothing here estimates mixing coefficients; it only supports
//! comparing simulator output against exact oracles and attaching
//! uncertainty to Monte Carlo diagnostics.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Outcome of a chi-square test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GofTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square against fully specified cell probabilities.
/// Cells must already be pooled so that every expected count is positive.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<GofTest> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return Err(Error::InvalidConfig {
            what: "gof needs matching cell/probability lists with at least 2 cells".into(),
        });
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::EmptyBatch {
            what: "gof with zero observations".into(),
        });
    }
    let n = total as f64;
    let mut statistic = 0.0;
    for (&obs, &p) in observed.iter().zip(probs) {
        let expected = n * p;
        if expected <= 0.0 {
            return Err(Error::InvalidConfig {
                what: "gof cell with nonpositive expected count".into(),
            });
        }
        let diff = obs as f64 - expected;
        statistic += diff * diff / expected;
    }
    let dof = observed.len() - 1;
    Ok(GofTest {
        statistic,
        dof,
        p_value: chi_square_p_value(statistic, dof),
    })
}

fn chi_square_p_value(statistic: f64, dof: usize) -> f64 {
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    1.0 - dist.cdf(statistic)
}

/// Greedily pools adjacent integer-support cells until every pooled cell has
/// expected count at least `min_expected`. Returns pooled `(probs, counts)`.
pub fn pool_cells(
    probs: &[f64],
    counts: &[u64],
    total: u64,
    min_expected: f64,
) -> (Vec<f64>, Vec<u64>) {
    let n = total as f64;
    let mut pooled_probs = Vec::new();
    let mut pooled_counts = Vec::new();
    let mut acc_p = 0.0;
    let mut acc_c = 0u64;
    for (&p, &c) in probs.iter().zip(counts) {
        acc_p += p;
        acc_c += c;
        if acc_p * n >= min_expected {
            pooled_probs.push(acc_p);
            pooled_counts.push(acc_c);
            acc_p = 0.0;
            acc_c = 0;
        }
    }
    if acc_p > 0.0 || acc_c > 0 {
        if let (Some(lp), Some(lc)) = (pooled_probs.last_mut(), pooled_counts.last_mut()) {
            *lp += acc_p;
            *lc += acc_c;
        } else {
            pooled_probs.push(acc_p);
            pooled_counts.push(acc_c);
        }
    }
    (pooled_probs, pooled_counts)
}

/// Two-sample chi-square homogeneity test on integer-valued draws, pooling
/// cells to keep expected counts workable.
pub fn chi_square_homogeneity(xs: &[i64], ys: &[i64], min_expected: f64) -> Result<GofTest> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::EmptyBatch {
            what: "homogeneity test sample".into(),
        });
    }
    let lo = xs.iter().chain(ys).copied().min().expect("nonempty");
    let hi = xs.iter().chain(ys).copied().max().expect("nonempty");
    let cells = (hi - lo + 1) as usize;
    let mut count_x = vec![0u64; cells];
    let mut count_y = vec![0u64; cells];
    for &v in xs {
        count_x[(v - lo) as usize] += 1;
    }
    for &v in ys {
        count_y[(v - lo) as usize] += 1;
    }

    // Pool adjacent columns until pooled totals are large enough.
    let grand = (xs.len() + ys.len()) as f64;
    let mut pooled: Vec<(u64, u64)> = Vec::new();
    let mut acc = (0u64, 0u64);
    for i in 0..cells {
        acc.0 += count_x[i];
        acc.1 += count_y[i];
        let combined = (acc.0 + acc.1) as f64;
        // Smallest expected cell is combined * min(share_x, share_y).
        let min_share = (xs.len() as f64).min(ys.len() as f64) / grand;
        if combined * min_share >= min_expected {
            pooled.push(acc);
            acc = (0, 0);
        }
    }
    if acc != (0, 0) {
        if let Some(last) = pooled.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            pooled.push(acc);
        }
    }
    if pooled.len() < 2 {
        return Err(Error::InvalidConfig {
            what: "homogeneity test collapsed to under 2 cells".into(),
        });
    }

    let n_x = xs.len() as f64;
    let n_y = ys.len() as f64;
    let mut statistic = 0.0;
    for &(cx, cy) in &pooled {
        let col = (cx + cy) as f64;
        let ex = col * n_x / grand;
        let ey = col * n_y / grand;
        statistic += (cx as f64 - ex).powi(2) / ex + (cy as f64 - ey).powi(2) / ey;
    }
    let dof = pooled.len() - 1;
    Ok(GofTest {
        statistic,
        dof,
        p_value: chi_square_p_value(statistic, dof),
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the sample mean.
pub fn mean_standard_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Asymptotic standard error of the sample variance, from the fourth
/// central moment: `sqrt((m4 - s^4) / n)`.
pub fn variance_standard_error(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let n = xs.len() as f64;
    let s2 = variance(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    ((m4 - s2 * s2).max(0.0) / n).sqrt()
}

/// Sample covariance and the standard error of its estimate.
pub fn covariance_with_se(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = mean(xs);
    let my = mean(ys);
    let products: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .collect();
    let cov = products.iter().sum::<f64>() / (n - 1.0);
    let se = (variance(&products) / n).sqrt();
    (cov, se)
}

/// Quantile via linear interpolation on order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Percentile bootstrap confidence interval for a statistic of an f64
/// sample, deterministic given the RNG state.
pub fn bootstrap_ci<R: Rng, F: Fn(&[f64]) -> f64>(
    xs: &[f64],
    statistic: F,
    replicates: usize,
    level: f64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::EmptyBatch {
            what: "bootstrap sample".into(),
        });
    }
    let mut stats = Vec::with_capacity(replicates);
    let mut resample = vec![0.0; xs.len()];
    for _ in 0..replicates {
        for slot in resample.iter_mut() {
            *slot = xs[rng.gen_range(0..xs.len())];
        }
        stats.push(statistic(&resample));
    }
    stats.sort_by(|a, b| a.partial_cmp(b).expect("finite bootstrap stats"));
    let alpha = (1.0 - level) / 2.0;
    Ok((quantile(&stats, alpha), quantile(&stats, 1.0 - alpha)))
}

/// Standard error of a statistic of multinomial cell frequencies via the
/// Poisson (multiplier) bootstrap: each cell count is perturbed
/// independently, large cells by a normal approximation, small ones by an
/// exact Poisson draw.
pub fn poisson_bootstrap_se<R: Rng, F: Fn(&[f64]) -> f64>(
    counts: &[u64],
    statistic: F,
    replicates: usize,
    rng: &mut R,
) -> f64 {
    let mut stats = Vec::with_capacity(replicates);
    let mut perturbed = vec![0.0f64; counts.len()];
    for _ in 0..replicates {
        let mut total = 0.0;
        for (slot, &c) in perturbed.iter_mut().zip(counts) {
            let resampled = if c > 64 {
                let z = standard_normal(rng);
                (c as f64 + z * (c as f64).sqrt()).max(0.0)
            } else {
                poisson_knuth(c as f64, rng) as f64
            };
            *slot = resampled;
            total += resampled;
        }
        if total > 0.0 {
            for slot in perturbed.iter_mut() {
                *slot /= total;
            }
        }
        stats.push(statistic(&perturbed));
    }
    let se2 = variance(&stats);
    se2.sqrt()
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; one value per call keeps consumption deterministic.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn poisson_knuth<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let threshold = (-mean).exp();
    let mut k = 0u64;
    let mut product: f64 = rng.gen();
    while product > threshold {
        k += 1;
        product *= rng.gen::<f64>();
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn gof_accepts_fair_counts() {
        let test = chi_square_gof(&[28, 31, 40, 35], &[0.25; 4]).unwrap();
        assert!((test.statistic - 2.41791).abs() < 1e-4);
        assert!(test.p_value > 0.4);
    }

    #[test]
    fn gof_rejects_biased_counts() {
        let test = chi_square_gof(&[100, 10, 10, 10], &[0.25; 4]).unwrap();
        assert!(test.p_value < 1e-6);
    }

    #[test]
    fn pooling_respects_min_expected() {
        let probs = [0.01, 0.02, 0.47, 0.47, 0.02, 0.01];
        let counts = [1, 2, 47, 47, 2, 1];
        let (pp, pc) = pool_cells(&probs, &counts, 100, 5.0);
        assert_eq!(pc.iter().sum::<u64>(), 100);
        assert!((pp.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for &p in &pp {
            assert!(p * 100.0 >= 5.0 - 1e-9);
        }
    }

    #[test]
    fn homogeneity_detects_shift() {
        let xs: Vec<i64> = (0..2000).map(|i| i % 5).collect();
        let ys: Vec<i64> = (0..2000).map(|i| i % 5 + 1).collect();
        let test = chi_square_homogeneity(&xs, &ys, 5.0).unwrap();
        assert!(test.p_value < 1e-6);
        let same = chi_square_homogeneity(&xs, &xs.clone(), 5.0).unwrap();
        assert!(same.statistic < 1e-9);
    }

    #[test]
    fn summary_statistics() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-12);
        let (cov, se) = covariance_with_se(&xs, &[2.0, 4.0, 6.0, 8.0]);
        assert!((cov - 10.0 / 3.0).abs() < 1e-12);
        assert!(se >= 0.0);
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 0.5), 3.0);
        assert_eq!(quantile(&xs, 1.0), 5.0);
        assert_eq!(quantile(&xs, 0.25), 2.0);
    }

    #[test]
    fn bootstrap_brackets_the_mean() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..500).map(|i| (i % 10) as f64).collect();
        let (lo, hi) = bootstrap_ci(&xs, mean, 200, 0.95, &mut rng).unwrap();
        assert!(lo < 4.5 && 4.5 < hi);
        assert!(hi - lo < 1.0);
    }

    #[test]
    fn poisson_bootstrap_se_scales_with_counts() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let small = [50u64, 50];
        let big = [50_000u64, 50_000];
        let first_freq = |f: &[f64]| f[0];
        let se_small = poisson_bootstrap_se(&small, first_freq, 200, &mut rng);
        let se_big = poisson_bootstrap_se(&big, first_freq, 200, &mut rng);
        assert!(se_small > se_big * 5.0);
    }
}
