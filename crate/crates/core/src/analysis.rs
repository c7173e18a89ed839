//! Diagnostics over exact moments and sampled batches: uniform-integrability
//! tail profiles, L^p boundedness observables, finite-dimensional nullity
//! and escape-of-mass certificates, the scaling dichotomy, and dependence
//! bounds per lag with an exact tiny-scale oracle.
//!
//! Trend verdicts operationalize asymptotic statements on a finite grid:
//! "decreasing"/"vanishing" means strictly monotone over the trailing half
//! of the grid (at least the last two points). Verdicts on grids shorter
//! than four points are flagged advisory.
//!
//! The tiny-scale dependence coefficient is computed between sigma-algebras
//! generated by *finite* observation windows; it lower-bounds the half-line
//! coefficient and converges to it as the window grows, so reports label it
//! "windowed". Upper bounds are clamped at 1, the trivial maximum for any
//! such coefficient.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{BigUint, One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::arith::{self, rational_to_f64, BigRational};
use crate::construction::BlockSequence;
use crate::error::{Error, Result};
use crate::moments::{mass_profile, total_variance};
use crate::serial::{tsv_table, ReportNumber};
use crate::simulate::SampleBatch;
use crate::stats;

/// Grid length below which trend verdicts are advisory.
const TREND_GRID_RECOMMENDED: usize = 4;

/// Default cap on enumerated ternary indices in the exact tiny-scale oracle.
pub const DEFAULT_ENUMERATION_CAP: usize = 12;

fn trailing_window(len: usize) -> usize {
    len.div_ceil(2).max(2).min(len)
}

/// Strictly decreasing over the trailing half of the grid, by an exact
/// comparator when both sides carry one.
fn trailing_strictly_decreasing(values: &[ReportNumber]) -> bool {
    if values.len() < 2 {
        return false;
    }
    let tail = &values[values.len() - trailing_window(values.len())..];
    tail.windows(2).all(|w| match (&w[0], &w[1]) {
        (ReportNumber::Exact(a), ReportNumber::Exact(b)) => b < a,
        (a, b) => b.value() < a.value(),
    })
}

// ---------------------------------------------------------------------------
// Uniform integrability and L^p profiles
// ---------------------------------------------------------------------------

/// Empirical tail means `E[Z 1{Z > M}]` per horizon and threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UiProfile {
    pub thresholds: Vec<f64>,
    pub rows: Vec<UiRow>,
    /// `sup_N` of the tail mean, per threshold.
    pub sup_tail_mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UiRow {
    pub horizon: u64,
    pub tail_means: Vec<f64>,
    pub z_mean: f64,
}

impl UiProfile {
    /// Two columns: threshold, sup tail mean.
    pub fn to_tsv(&self) -> String {
        let rows: Vec<(String, f64)> = self
            .thresholds
            .iter()
            .zip(&self.sup_tail_mean)
            .map(|(m, v)| (format!("{m}"), *v))
            .collect();
        tsv_table(("M", "sup_tail_mean"), &rows)
    }
}

/// Tail-expectation profile of the normalized squared norms, the empirical
/// shadow of uniform integrability: for each threshold the sup over
/// horizons must shrink as the threshold grows.
pub fn ui_tail_profile(batches: &[SampleBatch], thresholds: &[f64]) -> Result<UiProfile> {
    if batches.is_empty() || batches.iter().any(|b| b.rows.is_empty()) {
        return Err(Error::EmptyBatch {
            what: "ui profile".into(),
        });
    }
    if thresholds.is_empty() || thresholds.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig {
            what: "thresholds must be nonempty and strictly increasing".into(),
        });
    }
    let mut rows = Vec::with_capacity(batches.len());
    for batch in batches {
        let zs = batch.z_values();
        let count = zs.len() as f64;
        let tail_means: Vec<f64> = thresholds
            .iter()
            .map(|&m| zs.iter().filter(|&&z| z > m).sum::<f64>() / count)
            .collect();
        debug_assert!(tail_means.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        rows.push(UiRow {
            horizon: batch.horizon,
            tail_means,
            z_mean: stats::mean(&zs),
        });
    }
    let sup_tail_mean = (0..thresholds.len())
        .map(|i| {
            rows.iter()
                .map(|r| r.tail_means[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Ok(UiProfile {
        thresholds: thresholds.to_vec(),
        rows,
        sup_tail_mean,
    })
}

/// Empirical `E[Z^p]` per horizon with bootstrap confidence intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpProfile {
    pub p: f64,
    pub entries: Vec<LpEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpEntry {
    pub horizon: u64,
    pub moment: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl LpProfile {
    pub fn to_tsv(&self) -> String {
        let rows: Vec<(String, f64)> = self
            .entries
            .iter()
            .map(|e| (e.horizon.to_string(), e.moment))
            .collect();
        tsv_table(("N", "lp_moment"), &rows)
    }
}

/// The L^p boundedness observable behind the uniform-integrability argument,
/// for `p` in `(1, 2]`.
pub fn lp_profile(batches: &[SampleBatch], p: f64, bootstrap: usize) -> Result<LpProfile> {
    if batches.is_empty() || batches.iter().any(|b| b.rows.is_empty()) {
        return Err(Error::EmptyBatch {
            what: "lp profile".into(),
        });
    }
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::OutOfRange {
            what: format!("lp exponent {p} must lie in (1, 2]"),
        });
    }
    let mut entries = Vec::with_capacity(batches.len());
    for batch in batches {
        let powered: Vec<f64> = batch.z_values().iter().map(|z| z.powf(p)).collect();
        let moment = stats::mean(&powered);
        let mut rng = ChaCha12Rng::seed_from_u64(batch.seed ^ 0x6c70_626f_6f74 ^ batch.horizon);
        let (ci_low, ci_high) = stats::bootstrap_ci(&powered, stats::mean, bootstrap, 0.95, &mut rng)?;
        entries.push(LpEntry {
            horizon: batch.horizon,
            moment,
            ci_low,
            ci_high,
        });
    }
    Ok(LpProfile { p, entries })
}

// ---------------------------------------------------------------------------
// Escape of mass and scaling
// ---------------------------------------------------------------------------

/// Exact share of one coordinate's variance in the total, per horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullityReport {
    pub coordinate: usize,
    pub entries: Vec<NullityEntry>,
    pub decreasing: bool,
    pub advisory_short_grid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullityEntry {
    pub horizon: u64,
    pub ratio: ReportNumber,
}

impl NullityReport {
    pub fn ratio(&self, idx: usize) -> &BigRational {
        self.entries[idx].ratio.exact_value().expect("exact ratio")
    }

    pub fn to_tsv(&self) -> String {
        let rows: Vec<(String, f64)> = self
            .entries
            .iter()
            .map(|e| (e.horizon.to_string(), e.ratio.value()))
            .collect();
        tsv_table(("N", "coordinate_share"), &rows)
    }
}

/// Exact `sigma_N^2(f_d) / sigma_N^2(f)` over the horizon grid, with a
/// decreasing-trend verdict: the distributional contribution of any fixed
/// coordinate must fade as the horizon grows.
pub fn coordinate_nullity(
    seq: &BlockSequence,
    coordinate: usize,
    grid: &[u64],
) -> Result<NullityReport> {
    if coordinate == 0 || coordinate > seq.depth() {
        return Err(Error::OutOfRange {
            what: format!("coordinate {coordinate} outside 1..={}", seq.depth()),
        });
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig {
            what: "horizon grid must be nonempty and strictly increasing".into(),
        });
    }
    let mut entries = Vec::with_capacity(grid.len());
    for &horizon in grid {
        let profile = mass_profile(seq, horizon)?;
        entries.push(NullityEntry {
            horizon,
            ratio: ReportNumber::exact(profile.share(coordinate).clone()),
        });
    }
    let ratios: Vec<ReportNumber> = entries.iter().map(|e| e.ratio.clone()).collect();
    Ok(NullityReport {
        coordinate,
        decreasing: trailing_strictly_decreasing(&ratios),
        advisory_short_grid: grid.len() < TREND_GRID_RECOMMENDED,
        entries,
    })
}

/// Cumulative low-coordinate shares and the non-tightness surrogate verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeReport {
    pub coordinate_cutoff: usize,
    pub threshold: ReportNumber,
    pub entries: Vec<EscapeEntry>,
    /// Strictly decreasing over the trailing half of the grid.
    pub eventually_decreasing: bool,
    /// Final low-coordinate share below the threshold.
    pub final_below_threshold: bool,
    /// Both conditions; the finite shadow of "no fixed finite set of
    /// coordinates retains the mass".
    pub certified: bool,
    pub advisory_short_grid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeEntry {
    pub horizon: u64,
    pub low_share: ReportNumber,
}

impl EscapeReport {
    pub fn low(&self, idx: usize) -> &BigRational {
        self.entries[idx]
            .low_share
            .exact_value()
            .expect("exact share")
    }

    pub fn to_tsv(&self) -> String {
        let rows: Vec<(String, f64)> = self
            .entries
            .iter()
            .map(|e| (e.horizon.to_string(), e.low_share.value()))
            .collect();
        tsv_table(("N", "low_coordinate_share"), &rows)
    }
}

/// Exact `low_d(N) = sum_{k <= d} s_k` over the grid; certifies escape of
/// variance mass to high coordinates when the low share decays through the
/// caller's threshold.
pub fn escape_certificate(
    seq: &BlockSequence,
    coordinate_cutoff: usize,
    grid: &[u64],
    threshold: &BigRational,
) -> Result<EscapeReport> {
    if coordinate_cutoff == 0 || coordinate_cutoff > seq.depth() {
        return Err(Error::OutOfRange {
            what: format!(
                "coordinate cutoff {coordinate_cutoff} outside 1..={}",
                seq.depth()
            ),
        });
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig {
            what: "horizon grid must be nonempty and strictly increasing".into(),
        });
    }
    let mut entries = Vec::with_capacity(grid.len());
    for &horizon in grid {
        let profile = mass_profile(seq, horizon)?;
        entries.push(EscapeEntry {
            horizon,
            low_share: ReportNumber::exact(profile.low(coordinate_cutoff).clone()),
        });
    }
    let lows: Vec<ReportNumber> = entries.iter().map(|e| e.low_share.clone()).collect();
    let eventually_decreasing = trailing_strictly_decreasing(&lows);
    let final_below_threshold = entries
        .last()
        .map(|e| e.low_share.exact_value().expect("exact") < threshold)
        .unwrap_or(false);
    Ok(EscapeReport {
        coordinate_cutoff,
        threshold: ReportNumber::exact(threshold.clone()),
        eventually_decreasing,
        final_below_threshold,
        certified: eventually_decreasing && final_below_threshold,
        advisory_short_grid: grid.len() < TREND_GRID_RECOMMENDED,
        entries,
    })
}

/// The normalizing sequence `c_N` of the scaling dichotomy.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalingFamily {
    /// `c_N = sigma_N(f)` itself (ratio is exactly 1).
    SigmaN,
    /// `c_N = N^e`.
    Power(BigRational),
    /// Explicit `(N, c_N)` table.
    Table(Vec<(u64, f64)>),
}

impl ScalingFamily {
    /// Parses `"sigmaN"`, `"sqrtN"`, `"N"`, or `"power:<e>"`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(e) = t.strip_prefix("power:") {
            let exponent = arith::parse_rational(e)?;
            if !exponent.is_positive() {
                return Err(Error::OutOfRange {
                    what: format!("scaling exponent {exponent} must be positive"),
                });
            }
            return Ok(Self::Power(exponent));
        }
        match t {
            "sigmaN" => Ok(Self::SigmaN),
            "sqrtN" => Ok(Self::Power(arith::ratio(1, 2))),
            "N" | "linear" => Ok(Self::Power(arith::ratio(1, 1))),
            other => Err(Error::OutOfRange {
                what: format!("unknown scaling family {other:?}"),
            }),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::SigmaN => "sigmaN".to_string(),
            Self::Power(e) => format!("N^{e}"),
            Self::Table(_) => "table".to_string(),
        }
    }
}

/// A scaling grid: the normalizer plus the horizons to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    pub family: ScalingFamily,
    pub grid: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingEntry {
    pub horizon: u64,
    /// `sigma_N / c_N`; exact only when the ratio is literally 1.
    pub ratio: ReportNumber,
    /// `sigma_N^2 / c_N^2`; exact whenever `c_N^2` is rational.
    pub ratio_squared: ReportNumber,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalingVerdict {
    /// Ratios strictly decreasing over the trailing half: the scaled sums
    /// collapse to the origin in distribution.
    Vanishing,
    /// A witness subsequence keeps the ratio at or above `floor`: along it
    /// the scaled family stays non-tight.
    NonVanishing { floor: f64, witness: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub family: String,
    pub entries: Vec<ScalingEntry>,
    pub verdict: ScalingVerdict,
    pub advisory_short_grid: bool,
}

impl ScalingReport {
    pub fn to_tsv(&self) -> String {
        let rows: Vec<(String, f64)> = self
            .entries
            .iter()
            .map(|e| (e.horizon.to_string(), e.ratio.value()))
            .collect();
        tsv_table(("N", "sigma_over_c"), &rows)
    }
}

/// Classifies `sigma_N / c_N` on the grid from the exact truncated
/// variances: either the ratios die out monotonically ("vanishing") or a
/// witness subsequence stays bounded away from zero ("non-vanishing").
pub fn scaling_dichotomy(seq: &BlockSequence, spec: &ScalingSpec) -> Result<ScalingReport> {
    if spec.grid.is_empty() || spec.grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig {
            what: "scaling grid must be nonempty and strictly increasing".into(),
        });
    }
    let mut entries = Vec::with_capacity(spec.grid.len());
    for &horizon in &spec.grid {
        let sigma2 = total_variance(seq, horizon)?.truncated_total().clone();
        let entry = match &spec.family {
            ScalingFamily::SigmaN => ScalingEntry {
                horizon,
                ratio: ReportNumber::exact(BigRational::one()),
                ratio_squared: ReportNumber::exact(BigRational::one()),
            },
            ScalingFamily::Power(exponent) => {
                // c_N^2 = N^(2e) is rational exactly when 2e is an integer,
                // which covers sqrt(N), N, and every half-integer power.
                let doubled = exponent * BigRational::from(BigInt::from(2));
                let ratio_squared = if doubled.denom().is_one() {
                    let e = u32::try_from(
                        doubled
                            .numer()
                            .to_biguint()
                            .ok_or(Error::OutOfRange {
                                what: "negative scaling exponent".into(),
                            })?
                            .clone(),
                    )
                    .map_err(|_| Error::OutOfRange {
                        what: "scaling exponent too large".into(),
                    })?;
                    let c2 = BigRational::from(BigInt::from(horizon).pow(e));
                    ReportNumber::exact(sigma2 / c2)
                } else {
                    let e2 = rational_to_f64(&doubled);
                    ReportNumber::approx(
                        rational_to_f64(&sigma2) / (horizon as f64).powf(e2),
                    )
                };
                ScalingEntry {
                    horizon,
                    ratio: ReportNumber::approx(ratio_squared.value().sqrt()),
                    ratio_squared,
                }
            }
            ScalingFamily::Table(table) => {
                let c = table
                    .iter()
                    .find(|(n, _)| *n == horizon)
                    .map(|(_, c)| *c)
                    .ok_or(Error::TableMiss {
                        key: horizon.to_string(),
                    })?;
                if c <= 0.0 {
                    return Err(Error::OutOfRange {
                        what: format!("scaling value c({horizon}) = {c} must be positive"),
                    });
                }
                let r2 = rational_to_f64(&sigma2) / (c * c);
                ScalingEntry {
                    horizon,
                    ratio: ReportNumber::approx(r2.sqrt()),
                    ratio_squared: ReportNumber::approx(r2),
                }
            }
        };
        entries.push(entry);
    }

    let squares: Vec<ReportNumber> = entries.iter().map(|e| e.ratio_squared.clone()).collect();
    let verdict = if trailing_strictly_decreasing(&squares) {
        ScalingVerdict::Vanishing
    } else {
        let window = trailing_window(entries.len());
        let floor = entries[entries.len() - window..]
            .iter()
            .map(|e| e.ratio.value())
            .fold(f64::INFINITY, f64::min);
        let witness = entries
            .iter()
            .filter(|e| e.ratio.value() >= floor)
            .map(|e| e.horizon)
            .collect();
        ScalingVerdict::NonVanishing { floor, witness }
    };

    Ok(ScalingReport {
        family: spec.family.describe(),
        verdict,
        advisory_short_grid: spec.grid.len() < TREND_GRID_RECOMMENDED,
        entries,
    })
}


// ---------------------------------------------------------------------------
// Mixing bounds
// ---------------------------------------------------------------------------

/// One lag's dependence bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub lag: u64,
    /// `sum_{j <= K : n_j > lag} 4 / n_j`, exact.
    pub head: ReportNumber,
    /// Bound on the continuation beyond the truncation, exact.
    pub tail: ReportNumber,
    /// `min(1, head + tail)`.
    pub bound: ReportNumber,
    /// `bound * lag^(1/p)`, the decay-normalized value.
    pub normalized: f64,
}

/// Per-lag dependence bounds with the target decay exponent `q = 1/p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingBoundReport {
    /// Target decay exponent `1/p` (as a float for rendering).
    pub target_exponent: f64,
    pub entries: Vec<BoundEntry>,
}

impl MixingBoundReport {
    pub fn to_tsv(&self) -> String {
        let rows: Vec<(String, f64)> = self
            .entries
            .iter()
            .map(|e| (e.lag.to_string(), e.bound.value()))
            .collect();
        tsv_table(("lag", "beta_bound"), &rows)
    }
}

/// Upper bound on the dependence coefficient at one lag.
///
/// A coordinate whose window length satisfies `n_j <= lag` contributes
/// exactly 0: its past and its future at that gap are functions of disjoint
/// independent noise. Every longer coordinate contributes at most `4 / n_j`
/// (its lag-0 coefficient), and the coordinates beyond the truncation are
/// covered by the geometric tail majorant from the growth condition.
/// Subadditivity over independent coordinates sums the contributions; the
/// result is clamped at 1.
pub fn beta_upper_bound(seq: &BlockSequence, lag: u64) -> Result<BoundEntry> {
    let four = BigRational::from(BigInt::from(4));
    let lag_big = BigUint::from(lag);
    let head = seq
        .terms()
        .iter()
        .filter(|n_j| **n_j > lag_big)
        .map(|n_j| BigRational::new(BigInt::from(4), BigInt::from(n_j.clone())))
        .fold(BigRational::zero(), |acc, term| acc + term);
    let last = seq.terms().last().expect("nonempty");
    let tail = &four * arith::tail_inverse_sum_bound(last, seq.exponent())?;
    let bound = (&head + &tail).min(BigRational::one());
    let q = rational_to_f64(&(BigRational::one() / seq.exponent()));
    let normalized = rational_to_f64(&bound) * (lag as f64).powf(q);
    Ok(BoundEntry {
        lag,
        head: ReportNumber::exact(head),
        tail: ReportNumber::exact(tail),
        bound: ReportNumber::exact(bound),
        normalized,
    })
}

/// Evaluates [`beta_upper_bound`] over a lag grid.
pub fn mixing_bound_report(seq: &BlockSequence, lags: &[u64]) -> Result<MixingBoundReport> {
    if lags.is_empty() || lags.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig {
            what: "lag grid must be nonempty and strictly increasing".into(),
        });
    }
    let entries = lags
        .iter()
        .map(|&lag| beta_upper_bound(seq, lag))
        .collect::<Result<Vec<_>>>()?;
    let q = rational_to_f64(&(BigRational::one() / seq.exponent()));
    Ok(MixingBoundReport {
        target_exponent: q,
        entries,
    })
}

// ---------------------------------------------------------------------------
// Exact tiny-scale dependence oracle
// ---------------------------------------------------------------------------

/// A tiny windowed dependence computation for one coordinate: past
/// observations on `[-m, 0]`, future observations on `[gap, gap + m]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TinyBetaSpec {
    pub n_k: u64,
    /// Window extent `m`; each window holds `m + 1` observations.
    pub window: usize,
    pub gap: u64,
    /// Cap on the number of enumerated ternary noise indices.
    pub enumeration_cap: usize,
}

impl TinyBetaSpec {
    pub fn new(n_k: u64, window: usize, gap: u64) -> Self {
        Self {
            n_k,
            window,
            gap,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Result of the exact enumeration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TinyBetaResult {
    pub spec: TinyBetaSpec,
    /// Exact windowed coefficient
    /// `1/2 sum_{x,y} |P(x,y) - P(x) P(y)|`.
    pub beta: ReportNumber,
    /// Number of enumerated noise states (0 when independence is
    /// structural).
    pub states: u64,
    /// Always "windowed": finite windows lower-bound the half-line
    /// definition.
    pub scope: String,
}

impl TinyBetaResult {
    pub fn beta_exact(&self) -> &BigRational {
        self.beta.exact_value().expect("exact beta")
    }
}

/// Exact windowed dependence coefficient between the observation vectors on
/// `[-m, 0]` and `[gap, gap + m]` of a single coordinate, by full
/// enumeration of every ternary noise index either window can see.
///
/// When `gap >= n_k` the windows read disjoint independent noise and the
/// coefficient is exactly 0 without enumeration.
pub fn beta_exact_tiny(spec: &TinyBetaSpec) -> Result<TinyBetaResult> {
    if spec.n_k < 2 {
        return Err(Error::SeedTooSmall {
            n1: spec.n_k.to_string(),
        });
    }
    let scope = "windowed".to_string();
    if spec.gap >= spec.n_k {
        return Ok(TinyBetaResult {
            spec: spec.clone(),
            beta: ReportNumber::exact(BigRational::zero()),
            states: 0,
            scope,
        });
    }

    let n = spec.n_k as i64;
    let m = spec.window as i64;
    let gap = spec.gap as i64;
    // Past observations X_{-m}..X_0 read xi on [-m - n + 1, 0]; future
    // observations X_gap..X_{gap+m} read xi on [gap - n + 1, gap + m].
    // With gap < n the union is one contiguous block.
    let lo = -m - n + 1;
    let hi = gap + m;
    let count = (hi - lo + 1) as usize;
    if count > spec.enumeration_cap {
        return Err(Error::CapExceeded {
            what: "enumerated ternary noise indices".into(),
            value: count as u64,
            cap: spec.enumeration_cap as u64,
        });
    }

    let u = BigRational::new(BigInt::one(), BigInt::from(spec.n_k) * BigInt::from(spec.n_k));
    let p_sign = &u / BigRational::from(BigInt::from(2));
    let p_zero = BigRational::one() - &u;

    let mut joint: BTreeMap<(Vec<i64>, Vec<i64>), BigRational> = BTreeMap::new();
    let mut noise = vec![-1i8; count];
    loop {
        // Probability of this noise configuration.
        let mut prob = BigRational::one();
        for &x in &noise {
            prob *= if x == 0 { &p_zero } else { &p_sign };
        }
        let observe = |time: i64, noise: &[i8]| -> i64 {
            (0..n)
                .map(|s| noise[(time - s - lo) as usize] as i64)
                .sum()
        };
        let past: Vec<i64> = (-m..=0).map(|t| observe(t, &noise)).collect();
        let future: Vec<i64> = (gap..=gap + m).map(|t| observe(t, &noise)).collect();
        *joint.entry((past, future)).or_insert_with(BigRational::zero) += prob;

        // Advance the base-3 counter.
        let mut pos = 0;
        loop {
            if pos == count {
                break;
            }
            if noise[pos] < 1 {
                noise[pos] += 1;
                break;
            }
            noise[pos] = -1;
            pos += 1;
        }
        if pos == count {
            break;
        }
    }

    let mut past_marginal: BTreeMap<Vec<i64>, BigRational> = BTreeMap::new();
    let mut future_marginal: BTreeMap<Vec<i64>, BigRational> = BTreeMap::new();
    for ((past, future), p) in &joint {
        *past_marginal.entry(past.clone()).or_insert_with(BigRational::zero) += p;
        *future_marginal
            .entry(future.clone())
            .or_insert_with(BigRational::zero) += p;
    }

    // Total-variation form over the full product of observed supports:
    // cells with zero joint mass still contribute their product mass.
    let mut sum = BigRational::zero();
    for (past, pp) in &past_marginal {
        for (future, pf) in &future_marginal {
            let pxy = joint
                .get(&(past.clone(), future.clone()))
                .cloned()
                .unwrap_or_else(BigRational::zero);
            let diff = pxy - pp * pf;
            sum += diff.abs();
        }
    }
    let beta = sum / BigRational::from(BigInt::from(2));

    Ok(TinyBetaResult {
        spec: spec.clone(),
        beta: ReportNumber::exact(beta),
        states: 3u64.pow(count as u32),
        scope,
    })
}
