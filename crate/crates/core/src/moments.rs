//! Exact moment calculus for the block process: weight profiles of partial
//! sums, closed-form component variances, truncated totals with certified
//! tail bounds, per-coordinate mass shares, exact PMFs by weighted
//! convolution, and moment brackets.
//!
//! Everything here is exact rational arithmetic over arbitrary-precision
//! integers; floats appear only in rendered reports. The partial sum over a
//! horizon `N` of coordinate `k` is a linear combination
//! `S_N = sum_j w_j xi(j)` of the i.i.d. ternary noise, with integer weights
//! `w_j` supported on `j in [1 - n_k, N - 1]`. Two independent routes to the
//! weights are kept side by side: the piecewise three-range form and the
//! window-overlap count; tests and the acceptance suite require them to
//! agree everywhere.

use num::bigint::BigInt;
use num::{BigUint, One, Zero};
use serde::Serialize;

use crate::arith::{self, BigRational};
use crate::construction::BlockSequence;
use crate::error::{Error, Result};
use crate::serial::ReportNumber;

/// Default cap on materialized weight-profile slots.
pub const DEFAULT_SUPPORT_CAP: u64 = 1_000_000;

/// Default cap on `N * n_k` for the exact PMF oracle (the convolution cost
/// and support both scale with it).
pub const DEFAULT_PMF_CAP: u64 = 4096;

/// Weights of the noise variables in the partial sum `S_N` of one
/// coordinate, stored implicitly via closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeightProfile {
    n_k: u64,
    horizon: u64,
}

impl WeightProfile {
    pub fn new(n_k: u64, horizon: u64) -> Result<Self> {
        if n_k < 2 {
            return Err(Error::SeedTooSmall {
                n1: n_k.to_string(),
            });
        }
        if horizon == 0 {
            return Err(Error::OutOfRange {
                what: "horizon must be at least 1".to_string(),
            });
        }
        Ok(Self { n_k, horizon })
    }

    /// Support `[1 - n_k, N - 1]` of the weights.
    pub fn support(&self) -> std::ops::RangeInclusive<i64> {
        1 - self.n_k as i64..=self.horizon as i64 - 1
    }

    /// Overlap-count form: the weight of noise index `j` is the number of
    /// window placements `t in [0, N)` whose window `[t - n_k + 1, t]`
    /// covers `j`. Off-support indices return 0.
    pub fn weight(&self, j: i64) -> u64 {
        let n = self.n_k as i64;
        let upper = (self.horizon as i64 - 1).min(j + n - 1);
        let lower = 0i64.max(j);
        (upper - lower + 1).max(0) as u64
    }

    /// Piecewise three-range form, split by `N < n_k` versus `N >= n_k`.
    /// This is the branch-structured route; it must agree with
    /// [`Self::weight`] on every index.
    pub fn piecewise_weight(&self, j: i64) -> u64 {
        let n = self.n_k as i64;
        let big_n = self.horizon as i64;
        if !self.support().contains(&j) {
            return 0;
        }
        if big_n < n {
            if (0..=big_n - 1).contains(&j) {
                (big_n - j) as u64
            } else if (1 - n..=big_n - n).contains(&j) {
                (n + j) as u64
            } else {
                // remaining middle range [1 + N - n, -1]
                big_n as u64
            }
        } else if (0..=big_n - n).contains(&j) {
            n as u64
        } else if (big_n - n + 1..=big_n - 1).contains(&j) {
            (big_n - j) as u64
        } else {
            // trailing range [1 - n, -1]
            (n + j) as u64
        }
    }

    /// Materializes `(j, w_j)` pairs over the support, bounded by `cap`.
    /// Profiles above the cap stay closed-form only.
    pub fn materialize(&self, cap: u64) -> Result<Vec<(i64, u64)>> {
        let slots = self.horizon + self.n_k - 1;
        if slots > cap {
            return Err(Error::CapExceeded {
                what: "weight support slots".to_string(),
                value: slots,
                cap,
            });
        }
        Ok(self.support().map(|j| (j, self.weight(j))).collect())
    }

    /// [`Self::materialize`] with the default slot cap.
    pub fn materialize_default(&self) -> Result<Vec<(i64, u64)>> {
        self.materialize(DEFAULT_SUPPORT_CAP)
    }

    /// `sum_j w_j`, which must equal `N * n_k` (each window slot counted
    /// once).
    pub fn weight_sum(&self) -> BigUint {
        BigUint::from(self.horizon) * BigUint::from(self.n_k)
    }
}

/// Exact `sigma_N^2(f_k)` by the closed form, branch chosen by `N < n_k`:
///
/// - `N < n_k`:  `(2 sum_{j=1}^N j^2 + (n_k - N - 1) N^2) / n_k^2`
/// - `N >= n_k`: `(n_k^2 (N - n_k + 1) + 2 sum_{j=1}^{n_k-1} j^2) / n_k^2`
pub fn component_variance(n_k: &BigUint, horizon: u64) -> BigRational {
    let n = n_k.clone();
    let big_n = BigUint::from(horizon);
    let two = BigUint::from(2u32);
    let numerator = if big_n < n {
        let squares = arith::sum_of_squares(&big_n);
        let deficit = &n - &big_n - BigUint::one();
        &two * squares + deficit * &big_n * &big_n
    } else {
        let squares = arith::sum_of_squares(&(&n - BigUint::one()));
        let run = &big_n - &n + BigUint::one();
        &n * &n * run + &two * squares
    };
    BigRational::new(BigInt::from(numerator), BigInt::from(&n * &n))
}

/// One coordinate's entry in a variance report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentVariance {
    pub k: usize,
    pub n_k: String,
    pub sigma2: ReportNumber,
    pub share: ReportNumber,
}

/// Exact truncated variance of the full vector at one horizon, with a
/// certified upper bound on the mass dropped beyond the truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    pub horizon: u64,
    /// `i(N)`; 0 means the horizon sits below `n_1` (see the index
    /// convention note), `None` that the horizon reaches past `n_K` so the
    /// index cannot be read off the truncation.
    pub index: Option<usize>,
    pub index_note: String,
    pub components: Vec<ComponentVariance>,
    pub truncated_total: ReportNumber,
    /// Upper bound on `sum_{k > K} sigma_N^2(f_k)`; available whenever the
    /// growth condition pushes every dropped coordinate above the horizon
    /// (`n_K^p > N`), which always holds for `N < n_K`.
    pub tail_bound: Option<ReportNumber>,
    /// `[truncated, truncated + tail] / (N * i(N))`, when `i(N) >= 1`.
    pub ratio_interval: Option<(ReportNumber, ReportNumber)>,
}

impl VarianceReport {
    pub fn truncated_total(&self) -> &BigRational {
        self.truncated_total.exact_value().expect("exact by construction")
    }

    pub fn component_sigma2(&self, k: usize) -> &BigRational {
        self.components[k - 1]
            .sigma2
            .exact_value()
            .expect("exact by construction")
    }

    pub fn share(&self, k: usize) -> &BigRational {
        self.components[k - 1]
            .share
            .exact_value()
            .expect("exact by construction")
    }

    pub fn tail_bound(&self) -> Option<&BigRational> {
        self.tail_bound
            .as_ref()
            .map(|t| t.exact_value().expect("exact by construction"))
    }

    /// CSV rendering: one row per component.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,n_k,sigma2_exact,sigma2_float,share\n");
        for c in &self.components {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.k,
                c.n_k,
                c.sigma2.exact_string(),
                c.sigma2.value(),
                c.share.exact_string(),
            ));
        }
        out
    }
}

const INDEX_NOTE: &str =
    "i(N) = 0 denotes N < n_1; bracketing n_i <= N < n_(i+1) applies from i = 1";

/// Bound on `sum_{k > K} sigma_N^2(f_k)` when the growth condition places
/// every dropped coordinate above the horizon, i.e. `n_K^p >= N + 1`.
/// For such coordinates `sigma_N^2(f_k) <= N^2 / n_k` (first branch of the
/// closed form, since `2 sum_{j<=N} j^2 <= N^2 (N + 1)`), and the inverse
/// terms beyond `n_K` are dominated geometrically.
fn variance_tail_bound(seq: &BlockSequence, horizon: u64) -> Result<Option<BigRational>> {
    let last = seq.terms().last().expect("nonempty");
    let target = BigUint::from(horizon) + BigUint::one();
    // last >= (N+1)^(1/p)  <=>  last^p >= N + 1
    let reaches = arith::pow_at_least(last, &target, &seq.exponent().recip())?;
    if !reaches {
        return Ok(None);
    }
    let horizon_sq = BigRational::from(BigInt::from(horizon) * BigInt::from(horizon));
    Ok(Some(
        horizon_sq * arith::tail_inverse_sum_bound(last, seq.exponent())?,
    ))
}

/// Exact truncated total `sum_{k <= K} sigma_N^2(f_k)` plus a certified tail
/// bound for the dropped coordinates.
///
/// The truncated total exists at any horizon; the index and the tail bound
/// are reported only where the truncation supports them.
pub fn total_variance(seq: &BlockSequence, horizon: u64) -> Result<VarianceReport> {
    if horizon == 0 {
        return Err(Error::OutOfRange {
            what: "horizon must be at least 1".to_string(),
        });
    }
    let index = seq.index_of(horizon).ok().map(|h| h.index);
    let sigmas: Vec<BigRational> = seq
        .terms()
        .iter()
        .map(|n_k| component_variance(n_k, horizon))
        .collect();
    let total: BigRational = sigmas.iter().fold(BigRational::zero(), |acc, s| acc + s);
    let tail = variance_tail_bound(seq, horizon)?;

    let components = sigmas
        .iter()
        .enumerate()
        .map(|(i, sigma2)| ComponentVariance {
            k: i + 1,
            n_k: seq.terms()[i].to_string(),
            sigma2: ReportNumber::exact(sigma2.clone()),
            share: ReportNumber::exact(sigma2 / &total),
        })
        .collect();

    let ratio_interval = match (index, &tail) {
        (Some(i), Some(tail)) if i >= 1 => {
            let scale = BigRational::from(BigInt::from(horizon) * BigInt::from(i as u64));
            let lo = &total / &scale;
            let hi = (&total + tail) / &scale;
            Some((ReportNumber::exact(lo), ReportNumber::exact(hi)))
        }
        _ => None,
    };

    Ok(VarianceReport {
        horizon,
        index,
        index_note: INDEX_NOTE.to_string(),
        components,
        truncated_total: ReportNumber::exact(total),
        tail_bound: tail.map(ReportNumber::exact),
        ratio_interval,
    })
}

/// Exact variance mass shares `s_k = sigma_N^2(f_k) / total` and cumulative
/// low-coordinate shares, relative to the truncated total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassProfile {
    pub horizon: u64,
    /// `i(N)` where the truncation brackets it; see the index note.
    pub index: Option<usize>,
    pub index_note: String,
    /// Per-coordinate shares, summing to exactly 1.
    pub shares: Vec<ReportNumber>,
    /// `low_d = sum_{k <= d} s_k` for `d = 1..K`.
    pub cumulative: Vec<ReportNumber>,
    /// Upper bound on the relative deficit from dropped coordinates:
    /// tail bound / truncated total. `None` when the tail estimate is not
    /// supported at this horizon.
    pub truncation_deficit: Option<ReportNumber>,
}

impl MassProfile {
    pub fn share(&self, k: usize) -> &BigRational {
        self.shares[k - 1].exact_value().expect("exact by construction")
    }

    pub fn low(&self, d: usize) -> &BigRational {
        self.cumulative[d - 1]
            .exact_value()
            .expect("exact by construction")
    }
}

/// Shares are well defined at any horizon (they are relative to the
/// truncated total), so unlike [`total_variance`] this does not insist on
/// `N < n_K`; past that point the deficit bound is simply unavailable.
pub fn mass_profile(seq: &BlockSequence, horizon: u64) -> Result<MassProfile> {
    if horizon == 0 {
        return Err(Error::OutOfRange {
            what: "horizon must be at least 1".to_string(),
        });
    }
    let sigmas: Vec<BigRational> = seq
        .terms()
        .iter()
        .map(|n_k| component_variance(n_k, horizon))
        .collect();
    let total: BigRational = sigmas.iter().fold(BigRational::zero(), |acc, s| acc + s);
    let shares: Vec<BigRational> = sigmas.iter().map(|s| s / &total).collect();
    let mut running = BigRational::zero();
    let cumulative: Vec<ReportNumber> = shares
        .iter()
        .map(|s| {
            running += s;
            ReportNumber::exact(running.clone())
        })
        .collect();

    let truncation_deficit = variance_tail_bound(seq, horizon)?
        .map(|tail| ReportNumber::exact(tail / &total));

    Ok(MassProfile {
        horizon,
        index: seq.index_of(horizon).ok().map(|h| h.index),
        index_note: INDEX_NOTE.to_string(),
        shares: shares.into_iter().map(ReportNumber::exact).collect(),
        cumulative,
        truncation_deficit,
    })
}

/// Exact interval for `sigma_N^2(f) / (N * i(N))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioInterval {
    pub horizon: u64,
    pub index: usize,
    pub low: ReportNumber,
    pub high: ReportNumber,
}

impl RatioInterval {
    pub fn low(&self) -> &BigRational {
        self.low.exact_value().expect("exact by construction")
    }

    pub fn high(&self) -> &BigRational {
        self.high.exact_value().expect("exact by construction")
    }
}

/// Ratio of the truncated total (widened by the tail bound) to `N * i(N)`;
/// requires `n_1 <= N < n_K` so that `i(N) >= 1`.
pub fn asymptotic_ratio(seq: &BlockSequence, horizon: u64) -> Result<RatioInterval> {
    let index = seq.index_of(horizon)?.index;
    if index == 0 {
        return Err(Error::UndefinedIndex { horizon });
    }
    let report = total_variance(seq, horizon)?;
    let (low, high) = report.ratio_interval.clone().expect("bracketed index >= 1");
    Ok(RatioInterval {
        horizon,
        index,
        low,
        high,
    })
}

/// Exact distribution of a finite integer-weighted sum of independent
/// ternary variables, symmetric about 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPmf {
    /// Probability of each value in `[-max_value, max_value]`, indexed by
    /// `value + max_value`.
    probs: Vec<BigRational>,
    max_value: i64,
}

impl ExactPmf {
    pub fn max_value(&self) -> i64 {
        self.max_value
    }

    pub fn prob(&self, value: i64) -> BigRational {
        if value.abs() > self.max_value {
            BigRational::zero()
        } else {
            self.probs[(value + self.max_value) as usize].clone()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, p)| (i as i64 - self.max_value, p))
    }

    pub fn total(&self) -> BigRational {
        self.probs
            .iter()
            .fold(BigRational::zero(), |acc, p| acc + p)
    }

    pub fn mean(&self) -> BigRational {
        self.iter().fold(BigRational::zero(), |acc, (v, p)| {
            acc + BigRational::from(BigInt::from(v)) * p
        })
    }

    pub fn variance(&self) -> BigRational {
        // mean is exactly 0 by symmetry, so the variance is the second
        // moment.
        self.moment(2)
    }

    /// `E[X^q]` for even `q`; `E[|X|^q]` equals it by symmetry.
    pub fn moment(&self, q: u32) -> BigRational {
        self.iter().fold(BigRational::zero(), |acc, (v, p)| {
            acc + BigRational::from(BigInt::from(v).pow(q)) * p
        })
    }

    /// Tail probability `P(|X| > t)`.
    pub fn tail_prob(&self, t: i64) -> BigRational {
        self.iter()
            .filter(|(v, _)| v.abs() > t)
            .fold(BigRational::zero(), |acc, (_, p)| acc + p)
    }
}

/// Exact PMF of `S_N` for one coordinate by sequential convolution over the
/// weighted noise slots. Intended for tiny instances; the cap bounds
/// `N * n_k`.
pub fn partial_sum_pmf(n_k: u64, horizon: u64, cap: u64) -> Result<ExactPmf> {
    let profile = WeightProfile::new(n_k, horizon)?;
    let weight_sum = horizon
        .checked_mul(n_k)
        .filter(|&s| s <= cap)
        .ok_or(Error::CapExceeded {
            what: "pmf weight sum N*n_k".to_string(),
            value: horizon.saturating_mul(n_k),
            cap,
        })?;

    let max_value = weight_sum as i64;
    let size = (2 * weight_sum + 1) as usize;
    let mut probs = vec![BigRational::zero(); size];
    probs[weight_sum as usize] = BigRational::one();

    let u = BigRational::new(BigInt::one(), BigInt::from(n_k) * BigInt::from(n_k));
    let half_u = &u / BigRational::from(BigInt::from(2));
    let stay = BigRational::one() - &u;

    for j in profile.support() {
        let w = profile.weight(j) as usize;
        if w == 0 {
            continue;
        }
        let mut next = vec![BigRational::zero(); size];
        for (idx, p) in probs.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            next[idx] += &stay * p;
            next[idx + w] += &half_u * p;
            next[idx - w] += &half_u * p;
        }
        probs = next;
    }

    Ok(ExactPmf { probs, max_value })
}

/// Moment data for a sum of independent centered terms: per-term absolute
/// q-th moments paired with per-term variances.
#[derive(Debug, Clone, PartialEq)]
pub struct RosenthalInput {
    q: f64,
    terms: Vec<(f64, f64)>,
}

impl RosenthalInput {
    pub fn new(q: f64, terms: Vec<(f64, f64)>) -> Result<Self> {
        if q < 2.0 || q.is_nan() {
            return Err(Error::OutOfRange {
                what: format!("moment order q = {q} must be at least 2"),
            });
        }
        if terms.is_empty() {
            return Err(Error::OutOfRange {
                what: "at least one term is required".to_string(),
            });
        }
        if terms.iter().any(|(a, v)| *a < 0.0 || *v < 0.0) {
            return Err(Error::OutOfRange {
                what: "moments must be nonnegative".to_string(),
            });
        }
        Ok(Self { q, terms })
    }
}

/// The two-part moment bracket `sum_j E|Y_j|^q + (sum_j E[Y_j^2])^(q/2)`
/// for independent centered terms, with the q-dependent constant normalized
/// to 1 (the bracket is used for relative growth checks only).
pub fn rosenthal_bracket(input: &RosenthalInput) -> f64 {
    let abs_sum: f64 = input.terms.iter().map(|(abs_q, _)| abs_q).sum();
    let var_sum: f64 = input.terms.iter().map(|(_, var)| var).sum();
    abs_sum + var_sum.powf(input.q / 2.0)
}

/// Exact even-moment check of a single window sum `f_k` (distributionally
/// `S_1`) against the majorant `n_k^(-1) + n_k^(-p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub n_k: u64,
    pub order: u32,
    /// `E |f_k|^(2p)`, exact.
    pub moment: ReportNumber,
    /// `n_k^(-1) + n_k^(-p)`.
    pub majorant: ReportNumber,
    /// moment / majorant.
    pub ratio: ReportNumber,
    /// `n_k * E |f_k|^(2p)`.
    pub normalized: ReportNumber,
}

/// Computes `E|f_k|^(2p)` exactly from the PMF oracle and reports it against
/// the moment majorant.
pub fn moment_check(n_k: u64, p: u32, cap: u64) -> Result<MomentCheck> {
    if p == 0 {
        return Err(Error::OutOfRange {
            what: "moment order p must be at least 1".to_string(),
        });
    }
    let pmf = partial_sum_pmf(n_k, 1, cap)?;
    let moment = pmf.moment(2 * p);
    let n = BigInt::from(n_k);
    let majorant = BigRational::new(BigInt::one(), n.clone())
        + BigRational::new(BigInt::one(), n.pow(p));
    let ratio = &moment / &majorant;
    let normalized = &moment * BigRational::from(BigInt::from(n_k));
    Ok(MomentCheck {
        n_k,
        order: p,
        moment: ReportNumber::exact(moment),
        majorant: ReportNumber::exact(majorant),
        ratio: ReportNumber::exact(ratio),
        normalized: ReportNumber::exact(normalized),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use crate::construction::{build_theorem_a_sequence, BlockSequence, SequenceOrigin};

    fn seq(terms: &[u64], p: (i64, i64)) -> BlockSequence {
        BlockSequence::from_parts(
            terms.iter().map(|&t| BigUint::from(t)).collect(),
            ratio(p.0, p.1),
            SequenceOrigin::Explicit,
        )
        .unwrap()
    }

    #[test]
    fn weight_examples() {
        let short = WeightProfile::new(5, 3).unwrap();
        assert_eq!(short.weight(0), 3);
        assert_eq!(short.weight(-1), 3);
        assert_eq!(short.weight(-5), 0);
        assert_eq!(short.piecewise_weight(0), 3);
        assert_eq!(short.piecewise_weight(-1), 3);

        let long = WeightProfile::new(3, 5).unwrap();
        assert_eq!(long.weight(4), 1);
        assert_eq!(long.piecewise_weight(4), 1);
    }

    #[test]
    fn weight_routes_agree_and_sum() {
        for n_k in 2u64..=8 {
            for horizon in 1u64..=16 {
                let profile = WeightProfile::new(n_k, horizon).unwrap();
                let mut sum = 0u64;
                for j in (1 - n_k as i64 - 3)..=(horizon as i64 + 2) {
                    assert_eq!(
                        profile.weight(j),
                        profile.piecewise_weight(j),
                        "n_k={n_k} N={horizon} j={j}"
                    );
                    sum += profile.weight(j);
                }
                assert_eq!(BigUint::from(sum), profile.weight_sum());
            }
        }
    }

    #[test]
    fn component_variance_examples() {
        assert_eq!(component_variance(&BigUint::from(2u32), 1), ratio(1, 2));
        assert_eq!(component_variance(&BigUint::from(3u32), 3), ratio(19, 9));
        assert_eq!(component_variance(&BigUint::from(5u32), 3), ratio(37, 25));
    }

    #[test]
    fn component_variance_equals_weighted_square_sum() {
        for n_k in 2u64..=8 {
            for horizon in 1u64..=16 {
                let profile = WeightProfile::new(n_k, horizon).unwrap();
                let sq_sum: u64 = profile.support().map(|j| profile.weight(j).pow(2)).sum();
                let expected = BigRational::new(
                    BigInt::from(sq_sum),
                    BigInt::from(n_k) * BigInt::from(n_k),
                );
                assert_eq!(component_variance(&BigUint::from(n_k), horizon), expected);
            }
        }
    }

    #[test]
    fn first_branch_variance_below_n2_over_nk() {
        // Tail-bound ingredient: sigma_N^2(f_k) <= N^2 / n_k whenever
        // N < n_k.
        for n_k in 2u64..=40 {
            for horizon in 1..n_k {
                let sigma = component_variance(&BigUint::from(n_k), horizon);
                let cap = BigRational::new(
                    BigInt::from(horizon) * BigInt::from(horizon),
                    BigInt::from(n_k),
                );
                assert!(sigma <= cap, "n_k={n_k} N={horizon}");
            }
        }
    }

    #[test]
    fn total_variance_small_example() {
        let s = seq(&[2, 4], (2, 1));
        let report = total_variance(&s, 4).unwrap();
        assert_eq!(*report.truncated_total(), ratio(25, 4));
        assert_eq!(*report.component_sigma2(1), ratio(7, 2));
        assert_eq!(*report.component_sigma2(2), ratio(11, 4));
        // The horizon equals n_K, so the index is not readable from the
        // truncation; the tail bound survives since n_K^2 = 16 > 4.
        assert_eq!(report.index, None);
        assert!(report.tail_bound().is_some());
    }

    #[test]
    fn total_variance_single_component() {
        let s = seq(&[2], (2, 1));
        let report = total_variance(&s, 1).unwrap();
        assert_eq!(*report.truncated_total(), ratio(1, 2));
    }

    #[test]
    fn total_variance_p2_horizon_16() {
        let s = build_theorem_a_sequence(&ratio(2, 1), 4).unwrap();
        let report = total_variance(&s, 16).unwrap();
        assert_eq!(*report.component_sigma2(1), ratio(236, 16));
        assert_eq!(*report.component_sigma2(2), ratio(2736, 256));
        assert_eq!(*report.component_sigma2(3), ratio(64176, 65536));
        assert_eq!(
            *report.component_sigma2(4),
            BigRational::new(BigInt::from(16775856u64), BigInt::from(4294967296u64))
        );
    }

    #[test]
    fn tail_bound_covers_next_component() {
        // Adding the exactly computed next component stays within the
        // reported interval.
        let full = build_theorem_a_sequence(&ratio(2, 1), 5).unwrap();
        let truncated = full.truncate(4).unwrap();
        for horizon in [4u64, 16, 100, 255, 256, 65535] {
            let report = total_variance(&truncated, horizon).unwrap();
            let next = component_variance(full.term(5), horizon);
            assert!(
                next <= *report.tail_bound().expect("bracketed horizon"),
                "horizon {horizon}: next component exceeds tail bound"
            );
        }
    }

    #[test]
    fn mass_profile_examples() {
        let s = seq(&[2, 4], (2, 1));
        let profile = mass_profile(&s, 4).unwrap();
        assert_eq!(*profile.share(1), ratio(14, 25));
        assert_eq!(*profile.share(2), ratio(11, 25));
        assert_eq!(*profile.low(2), ratio(1, 1));

        // A single-coordinate sequence carries all mass at any horizon,
        // even beyond its own truncation bracket.
        let single = seq(&[2], (2, 1));
        let p = mass_profile(&single, 3).unwrap();
        assert_eq!(*p.share(1), ratio(1, 1));
        assert_eq!(p.index, None);
        // n_K^2 = 4 still clears horizon 3, so the deficit bound survives;
        // one step further out it does not.
        assert!(p.truncation_deficit.is_some());
        assert!(mass_profile(&single, 4)
            .unwrap()
            .truncation_deficit
            .is_none());
    }

    #[test]
    fn shares_sum_to_one() {
        let s = build_theorem_a_sequence(&ratio(2, 1), 4).unwrap();
        for horizon in [4u64, 16, 100, 9999] {
            let profile = mass_profile(&s, horizon).unwrap();
            let total: BigRational = (1..=4)
                .map(|k| profile.share(k).clone())
                .fold(BigRational::zero(), |a, b| a + b);
            assert_eq!(total, BigRational::one());
        }
    }

    #[test]
    fn asymptotic_ratio_examples() {
        let s = build_theorem_a_sequence(&ratio(2, 1), 4).unwrap();
        let r16 = asymptotic_ratio(&s, 16).unwrap();
        let mid = r16.low.value();
        assert!((mid - 0.8257).abs() < 1e-3, "ratio at 16: {mid}");

        let r4 = asymptotic_ratio(&s, 4).unwrap();
        // k = 1 component at N = 4 is 44/16; ratio uses i(4) = 1.
        let report = total_variance(&s, 4).unwrap();
        assert_eq!(*report.component_sigma2(1), ratio(44, 16));
        assert_eq!(r4.low().clone(), report.truncated_total() / &ratio(4, 1));

        assert!(matches!(
            asymptotic_ratio(&s, 3),
            Err(Error::UndefinedIndex { .. })
        ));
    }

    #[test]
    fn pmf_tiny_example() {
        let pmf = partial_sum_pmf(2, 1, DEFAULT_PMF_CAP).unwrap();
        assert_eq!(pmf.prob(0), ratio(19, 32));
        assert_eq!(pmf.prob(1), ratio(3, 16));
        assert_eq!(pmf.prob(-1), ratio(3, 16));
        assert_eq!(pmf.prob(2), ratio(1, 64));
        assert_eq!(pmf.prob(-2), ratio(1, 64));
        assert_eq!(pmf.total(), BigRational::one());
        assert_eq!(pmf.mean(), BigRational::zero());
        assert_eq!(pmf.variance(), component_variance(&BigUint::from(2u32), 1));
    }

    #[test]
    fn pmf_rejects_degenerate_window() {
        assert!(partial_sum_pmf(1, 1, DEFAULT_PMF_CAP).is_err());
    }

    #[test]
    fn pmf_respects_cap() {
        assert!(matches!(
            partial_sum_pmf(8, 16, 100),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn pmf_matches_variance_on_grid() {
        for n_k in 2u64..=3 {
            for horizon in 1u64..=4 {
                let pmf = partial_sum_pmf(n_k, horizon, DEFAULT_PMF_CAP).unwrap();
                assert_eq!(pmf.total(), BigRational::one());
                assert_eq!(pmf.mean(), BigRational::zero());
                assert_eq!(
                    pmf.variance(),
                    component_variance(&BigUint::from(n_k), horizon)
                );
            }
        }
    }

    #[test]
    fn rosenthal_examples() {
        let single = RosenthalInput::new(4.0, vec![(3.0, 4.0)]).unwrap();
        assert_eq!(rosenthal_bracket(&single), 19.0);
        // At q = 2 both parts collapse to the variance sum.
        let quadratic = RosenthalInput::new(2.0, vec![(2.0, 2.0), (3.0, 3.0)]).unwrap();
        assert_eq!(rosenthal_bracket(&quadratic), 2.0 * 5.0);
        let pair = RosenthalInput::new(4.0, vec![(1.0, 1.0), (1.0, 1.0)]).unwrap();
        assert_eq!(rosenthal_bracket(&pair), 6.0);

        assert!(RosenthalInput::new(1.5, vec![(1.0, 1.0)]).is_err());
        assert!(RosenthalInput::new(2.0, vec![]).is_err());
        assert!(RosenthalInput::new(2.0, vec![(-1.0, 1.0)]).is_err());
    }

    #[test]
    fn window_moment_ratios_are_uniformly_bounded() {
        // Recorded certification of the even-moment majorant
        // n^-1 + n^-p over n in {2..8}: the ratio is exactly 1/2 for
        // p = 1 at every n, and peaks at 5/4 (p = 2, n in {3,4}) and
        // 127/30 (p = 3, n = 3).
        let mut sup2 = BigRational::zero();
        let mut sup3 = BigRational::zero();
        for n_k in 2u64..=8 {
            let r1 = moment_check(n_k, 1, DEFAULT_PMF_CAP).unwrap();
            assert_eq!(*r1.ratio.exact_value().unwrap(), ratio(1, 2));
            let r2 = moment_check(n_k, 2, DEFAULT_PMF_CAP).unwrap();
            sup2 = sup2.max(r2.ratio.exact_value().unwrap().clone());
            let r3 = moment_check(n_k, 3, DEFAULT_PMF_CAP).unwrap();
            sup3 = sup3.max(r3.ratio.exact_value().unwrap().clone());
        }
        assert_eq!(sup2, ratio(5, 4));
        assert_eq!(sup3, ratio(127, 30));
    }

    #[test]
    fn moment_check_examples() {
        let m1 = moment_check(2, 1, DEFAULT_PMF_CAP).unwrap();
        assert_eq!(*m1.normalized.exact_value().unwrap(), ratio(1, 1));
        let m2 = moment_check(2, 2, DEFAULT_PMF_CAP).unwrap();
        assert_eq!(*m2.normalized.exact_value().unwrap(), ratio(7, 4));
        assert_eq!(*m2.moment.exact_value().unwrap(), ratio(7, 8));
        // E f^2 = 1/n_k exactly, for any n_k.
        for n_k in 2u64..=6 {
            let m = moment_check(n_k, 1, DEFAULT_PMF_CAP).unwrap();
            assert_eq!(*m.moment.exact_value().unwrap(), ratio(1, n_k as i64));
        }
    }

    #[test]
    fn variance_csv_has_component_rows() {
        let s = seq(&[2, 4], (2, 1));
        let report = total_variance(&s, 4).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,2,7/2,"));
        assert!(lines[2].starts_with("2,4,11/4,"));
    }
}
