//! Seeded sparse Monte Carlo sampling of component partial sums, coordinate
//! vectors, squared norms, and coupled trajectories.
//!
//! The noise array behind one coordinate has `L = N + n_k - 1` ternary
//! slots, each nonzero with probability `u_k = n_k^{-2}`. The normative
//! sampler never materializes the array: it draws the nonzero-event count
//! from `Binomial(L, u_k)` by CDF inversion, places the events uniformly
//! without replacement (Floyd's selection), assigns fair signs, and
//! accumulates `sign * w_j` through the closed-form weights. Expected cost
//! is proportional to the event count, not to `L`.
//!
//! A dense reference sampler lives alongside as a test oracle. Both paths
//! can consume the same event layer, in which case they agree seed for
//! seed; the fully dense per-slot sampler agrees in distribution only.
//!
//! Streams are derived from `(seed, replicate, component)` with a
//! counter-based generator, so any assignment of replicates to worker
//! threads yields byte-identical batches.

use std::collections::HashSet;

use num::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::rational_to_f64;
use crate::construction::BlockSequence;
use crate::error::{Error, Result};
use crate::moments::{component_variance, WeightProfile};
use crate::serial::ReportNumber;
use crate::stats;

/// Sums are accumulated in `i64`; `N * n_k` must stay below this.
const MAX_WEIGHT_MASS: u64 = 1 << 62;

/// Target mean event count per inversion chunk of the binomial sampler.
const CHUNK_MEAN: f64 = 8.0;

/// What to do with horizons at or beyond the last retained term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationPolicy {
    /// Reject the configuration.
    Error,
    /// Sample the truncated object and carry a tail note in the batch.
    TruncateWithTailNote,
}

/// A reproducible sampling plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub replicates: usize,
    /// Number of leading coordinates simulated (`K_active`).
    pub k_active: usize,
    /// Strictly increasing horizons.
    pub horizons: Vec<u64>,
    pub policy: TruncationPolicy,
}

impl SampleConfig {
    pub fn validate(&self, seq: &BlockSequence) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig {
                what: "replicates must be at least 1".into(),
            });
        }
        if self.replicates as u64 >= 1 << 32 {
            return Err(Error::InvalidConfig {
                what: "replicates must fit in 32 bits of the stream id".into(),
            });
        }
        if self.k_active == 0 || self.k_active > seq.depth() {
            return Err(Error::InvalidConfig {
                what: format!(
                    "k_active = {} must lie in 1..={}",
                    self.k_active,
                    seq.depth()
                ),
            });
        }
        if self.k_active > u16::MAX as usize {
            return Err(Error::InvalidConfig {
                what: "k_active must fit in 16 bits of the stream id".into(),
            });
        }
        if self.horizons.is_empty() {
            return Err(Error::InvalidConfig {
                what: "at least one horizon is required".into(),
            });
        }
        if self.horizons.len() > u16::MAX as usize {
            return Err(Error::InvalidConfig {
                what: "horizon count must fit in 16 bits of the stream id".into(),
            });
        }
        if self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig {
                what: "horizons must be strictly increasing".into(),
            });
        }
        if self.horizons.contains(&0) {
            return Err(Error::InvalidConfig {
                what: "horizons must be positive".into(),
            });
        }
        for k in 1..=self.k_active {
            let n_k = term_u64(seq, k)?;
            for &horizon in &self.horizons {
                if horizon.saturating_mul(n_k) > MAX_WEIGHT_MASS {
                    return Err(Error::CapExceeded {
                        what: format!("weight mass N*n_k at k = {k}"),
                        value: horizon.saturating_mul(n_k),
                        cap: MAX_WEIGHT_MASS,
                    });
                }
            }
        }
        if self.policy == TruncationPolicy::Error {
            let last = seq.terms().last().expect("nonempty");
            for &horizon in &self.horizons {
                if BigUint::from(horizon) >= *last {
                    return Err(Error::HorizonExceeded {
                        horizon,
                        last_term: last.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

fn term_u64(seq: &BlockSequence, k: usize) -> Result<u64> {
    u64::try_from(seq.term(k)).map_err(|_| Error::CapExceeded {
        what: format!("simulated term n_{k}"),
        value: u64::MAX,
        cap: u64::MAX,
    })
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic, collision-resistant substream derivation: the seed
/// expands into a cipher key and `(replicate, component)` selects one of
/// 2^64 independent counter streams. Identical inputs always produce the
/// identical stream; distinct pairs produce independent streams.
///
/// `replicate` must fit 32 bits and `component` 32 bits.
pub fn derive_stream(seed: u64, replicate: u64, component: u64) -> ChaCha12Rng {
    debug_assert!(replicate < 1 << 32, "replicate id exceeds 32 bits");
    debug_assert!(component < 1 << 32, "component id exceeds 32 bits");
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream((replicate << 32) | (component & 0xffff_ffff));
    rng
}

fn stream_component_id(component: usize, horizon_slot: usize) -> u64 {
    (component as u64 & 0xffff) | ((horizon_slot as u64 & 0xffff) << 16)
}

/// One ternary draw by CDF inversion of a single uniform.
fn invert_ternary(u01: f64, u: f64) -> i8 {
    if u01 < u / 2.0 {
        1
    } else if u01 < u {
        -1
    } else {
        0
    }
}

/// `Binomial(trials, p)` from one uniform by CDF inversion. Stable only for
/// moderate `trials * p`; the public sampler chunks accordingly.
fn binomial_from_uniform(u01: f64, trials: u64, p: f64) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    let odds = p / (1.0 - p);
    let mut pmf = (trials as f64 * (-p).ln_1p()).exp();
    let mut cdf = pmf;
    let mut m = 0u64;
    while u01 > cdf && m < trials {
        pmf *= (trials - m) as f64 / (m + 1) as f64 * odds;
        cdf += pmf;
        m += 1;
    }
    m
}

/// Number of nonzero events among `trials` slots, split into chunks so that
/// each single-uniform inversion walk stays short and well conditioned. The
/// chunk layout is a function of `(trials, p)` alone, so the uniform
/// consumption is deterministic.
fn binomial_count<R: Rng>(rng: &mut R, trials: u64, p: f64) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    let mean = trials as f64 * p;
    let chunks = ((mean / CHUNK_MEAN).ceil() as u64).clamp(1, trials);
    let base = trials / chunks;
    let remainder = trials % chunks;
    let mut total = 0;
    for c in 0..chunks {
        let size = base + u64::from(c < remainder);
        total += binomial_from_uniform(rng.gen::<f64>(), size, p);
    }
    total
}

/// Floyd's selection of `count` distinct offsets in `[0, len)`, sorted.
fn select_positions<R: Rng>(rng: &mut R, len: u64, count: u64) -> Vec<u64> {
    debug_assert!(count <= len);
    let mut chosen: HashSet<u64> = HashSet::with_capacity(count as usize);
    for i in len - count..len {
        let candidate = rng.gen_range(0..=i);
        if !chosen.insert(candidate) {
            chosen.insert(i);
        }
    }
    let mut positions: Vec<u64> = chosen.into_iter().collect();
    positions.sort_unstable();
    positions
}

/// The shared event layer: nonzero positions (sorted) with fair signs,
/// distributed exactly as the nonzero pattern of `len` i.i.d. ternary slots.
pub fn draw_events<R: Rng>(rng: &mut R, len: u64, u: f64) -> Vec<(u64, i8)> {
    let count = binomial_count(rng, len, u);
    let positions = select_positions(rng, len, count);
    positions
        .into_iter()
        .map(|pos| {
            let sign: i8 = if rng.gen::<f64>() < 0.5 { 1 } else { -1 };
            (pos, sign)
        })
        .collect()
}

/// A sampled component partial sum plus the nonzero-event count it touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentSum {
    pub value: i64,
    pub events: usize,
}

/// Sparse draw of `S_N` for one coordinate: distributed exactly as
/// `sum_j w_j xi(j)` with i.i.d. ternary noise. Expected cost
/// `O((N + n_k) / n_k^2 + 1)`.
pub fn sample_component_sum<R: Rng>(n_k: u64, horizon: u64, rng: &mut R) -> ComponentSum {
    let profile = WeightProfile::new(n_k, horizon).expect("valid component");
    let len = horizon + n_k - 1;
    let u = 1.0 / (n_k as f64 * n_k as f64);
    let events = draw_events(rng, len, u);
    let mut value = 0i64;
    for &(offset, sign) in &events {
        let j = offset as i64 + 1 - n_k as i64;
        value += sign as i64 * profile.weight(j) as i64;
    }
    ComponentSum {
        value,
        events: events.len(),
    }
}

/// Dense reference draw sharing the sparse event layer: materializes the
/// full ternary array from the same events and accumulates the partial sum
/// by the direct window double loop, bypassing the weight formula entirely.
/// Seed for seed, the value must equal [`sample_component_sum`]'s.
pub fn sample_component_sum_dense<R: Rng>(n_k: u64, horizon: u64, rng: &mut R) -> ComponentSum {
    let len = horizon + n_k - 1;
    let u = 1.0 / (n_k as f64 * n_k as f64);
    let events = draw_events(rng, len, u);
    let array = dense_array_from_events(&events, len);
    ComponentSum {
        value: window_double_sum(&array, n_k, horizon),
        events: events.len(),
    }
}

/// Fully dense sampler: every slot drawn by per-index inversion. Agrees
/// with the sparse path in distribution, not seed for seed.
pub fn dense_draws<R: Rng>(rng: &mut R, len: u64, u: f64) -> Vec<i8> {
    (0..len).map(|_| invert_ternary(rng.gen::<f64>(), u)).collect()
}

/// Expands an event list into the full ternary array.
pub fn dense_array_from_events(events: &[(u64, i8)], len: u64) -> Vec<i8> {
    let mut array = vec![0i8; len as usize];
    for &(pos, sign) in events {
        array[pos as usize] = sign;
    }
    array
}

/// `S_N` from a materialized noise array by summing every window placement
/// directly; the array covers noise indices `j = offset + 1 - n_k`.
pub fn window_double_sum(array: &[i8], n_k: u64, horizon: u64) -> i64 {
    debug_assert_eq!(array.len() as u64, horizon + n_k - 1);
    let mut total = 0i64;
    for t in 0..horizon {
        for i in 0..n_k {
            // noise index j = t - i maps to offset j + n_k - 1.
            let offset = t + n_k - 1 - i;
            total += array[offset as usize] as i64;
        }
    }
    total
}

/// One replicate of the truncated coordinate vector at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub replicate: u64,
    /// `S_N(f_k)` for `k = 1..=k_active`.
    pub sums: Vec<i64>,
    /// `sum_k S_N(f_k)^2`, exact integer.
    pub norm2: u128,
    /// `norm2 / sigma2_truncated`.
    pub z: f64,
    /// Total nonzero noise events touched.
    pub events: usize,
}

/// All replicates at one horizon, with provenance and the exact truncated
/// normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub horizon: u64,
    pub k_active: usize,
    pub seed: u64,
    /// Fingerprint of `(sequence, config)` for cross-file consistency checks.
    pub config_digest: String,
    /// Present when the horizon is not bracketed by the truncated sequence.
    pub truncation_note: Option<String>,
    /// `sum_{k <= k_active} sigma_N^2(f_k)`, exact; `E[Z] = 1` against it.
    pub sigma2_truncated: ReportNumber,
    pub rows: Vec<SampleRow>,
}

impl SampleBatch {
    pub fn z_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.z).collect()
    }

    pub fn component_values(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.sums[k - 1] as f64).collect()
    }

    /// CSV: one row per replicate.
    pub fn to_csv(&self) -> String {
        let mut header = String::from("replicate,N");
        for k in 1..=self.k_active {
            header.push_str(&format!(",S_{k}"));
        }
        header.push_str(",norm2,Z\n");
        let mut out = header;
        for row in &self.rows {
            out.push_str(&format!("{},{}", row.replicate, self.horizon));
            for s in &row.sums {
                out.push_str(&format!(",{s}"));
            }
            out.push_str(&format!(",{},{}\n", row.norm2, row.z));
        }
        out
    }

    /// Summary statistics for the JSON report.
    pub fn summary(&self) -> BatchSummary {
        let zs = self.z_values();
        let mut sorted = zs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite Z"));
        let quantiles = [0.25, 0.5, 0.75, 0.9, 0.99]
            .iter()
            .map(|&q| (format!("{q}"), stats::quantile(&sorted, q)))
            .collect();
        let component_means = (1..=self.k_active)
            .map(|k| stats::mean(&self.component_values(k)))
            .collect();
        BatchSummary {
            horizon: self.horizon,
            replicates: self.rows.len(),
            seed: self.seed,
            config_digest: self.config_digest.clone(),
            truncation_note: self.truncation_note.clone(),
            sigma2_truncated: self.sigma2_truncated.clone(),
            z_mean: stats::mean(&zs),
            z_variance: stats::variance(&zs),
            z_quantiles: quantiles,
            component_means,
            total_events: self.rows.iter().map(|r| r.events as u64).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub horizon: u64,
    pub replicates: usize,
    pub seed: u64,
    pub config_digest: String,
    pub truncation_note: Option<String>,
    pub sigma2_truncated: ReportNumber,
    pub z_mean: f64,
    pub z_variance: f64,
    pub z_quantiles: Vec<(String, f64)>,
    pub component_means: Vec<f64>,
    pub total_events: u64,
}

/// One replicate of the truncated vector: independent component draws, the
/// squared norm, and the normalized `Z` against the exact truncated
/// variance.
pub fn sample_vector(
    seq: &BlockSequence,
    horizon: u64,
    seed: u64,
    replicate: u64,
    horizon_slot: usize,
    k_active: usize,
    sigma2_truncated: f64,
) -> SampleRow {
    let mut sums = Vec::with_capacity(k_active);
    let mut norm2 = 0u128;
    let mut events = 0usize;
    for k in 1..=k_active {
        let n_k = u64::try_from(seq.term(k)).expect("validated term");
        let mut rng = derive_stream(seed, replicate, stream_component_id(k, horizon_slot));
        let draw = sample_component_sum(n_k, horizon, &mut rng);
        norm2 += (draw.value as i128 * draw.value as i128) as u128;
        events += draw.events;
        sums.push(draw.value);
    }
    SampleRow {
        replicate,
        sums,
        norm2,
        z: norm2 as f64 / sigma2_truncated,
        events,
    }
}

/// Runs the full plan: one batch per horizon, replicates embarrassingly
/// parallel, assembled in replicate order so the result is independent of
/// worker scheduling.
pub fn sample_batches(seq: &BlockSequence, config: &SampleConfig) -> Result<Vec<SampleBatch>> {
    config.validate(seq)?;
    let digest = config_digest(seq, config);
    let mut batches = Vec::with_capacity(config.horizons.len());
    for (slot, &horizon) in config.horizons.iter().enumerate() {
        let sigma2 = truncated_sigma2(seq, horizon, config.k_active);
        let sigma2_f = rational_to_f64(&sigma2);
        let rows: Vec<SampleRow> = (0..config.replicates as u64)
            .into_par_iter()
            .map(|replicate| {
                sample_vector(
                    seq,
                    horizon,
                    config.seed,
                    replicate,
                    slot,
                    config.k_active,
                    sigma2_f,
                )
            })
            .collect();
        let truncation_note = if seq.index_of(horizon).is_err() {
            Some(format!(
                "horizon {horizon} reaches beyond n_K; sampled object is the {}-coordinate truncation",
                config.k_active
            ))
        } else {
            None
        };
        batches.push(SampleBatch {
            horizon,
            k_active: config.k_active,
            seed: config.seed,
            config_digest: digest.clone(),
            truncation_note,
            sigma2_truncated: ReportNumber::exact(sigma2),
            rows,
        });
    }
    Ok(batches)
}

/// Exact `sum_{k <= k_active} sigma_N^2(f_k)`, the normalization that makes
/// `E[Z_N] = 1` hold exactly for the simulated (truncated) object.
pub fn truncated_sigma2(
    seq: &BlockSequence,
    horizon: u64,
    k_active: usize,
) -> crate::arith::BigRational {
    (1..=k_active)
        .map(|k| component_variance(seq.term(k), horizon))
        .fold(num::Zero::zero(), |acc: crate::arith::BigRational, s| acc + s)
}

/// One replicate of a coupled trajectory: a single noise realization per
/// coordinate drives every horizon, so increments are meaningful. Marginals
/// at each horizon agree in law with [`sample_vector`].
pub fn sample_trajectory(
    seq: &BlockSequence,
    horizons: &[u64],
    seed: u64,
    replicate: u64,
    k_active: usize,
) -> Result<Vec<SampleRow>> {
    if horizons.is_empty() || horizons.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig {
            what: "trajectory horizons must be nonempty and strictly increasing".into(),
        });
    }
    let widest = *horizons.last().expect("nonempty");
    let mut per_component_events = Vec::with_capacity(k_active);
    for k in 1..=k_active {
        let n_k = term_u64(seq, k)?;
        if widest.saturating_mul(n_k) > MAX_WEIGHT_MASS {
            return Err(Error::CapExceeded {
                what: format!("trajectory weight mass at k = {k}"),
                value: widest.saturating_mul(n_k),
                cap: MAX_WEIGHT_MASS,
            });
        }
        let len = widest + n_k - 1;
        let u = 1.0 / (n_k as f64 * n_k as f64);
        let mut rng = derive_stream(seed, replicate, stream_component_id(k, 0));
        per_component_events.push((n_k, draw_events(&mut rng, len, u)));
    }

    let mut rows = Vec::with_capacity(horizons.len());
    for &horizon in horizons {
        let mut sums = Vec::with_capacity(k_active);
        let mut norm2 = 0u128;
        let mut events = 0usize;
        for (n_k, evs) in &per_component_events {
            let profile = WeightProfile::new(*n_k, horizon).expect("valid component");
            let mut value = 0i64;
            for &(offset, sign) in evs {
                // Offsets index the widest support; weights at shorter
                // horizons vanish off their own support automatically.
                let j = offset as i64 + 1 - *n_k as i64;
                value += sign as i64 * profile.weight(j) as i64;
            }
            norm2 += (value as i128 * value as i128) as u128;
            events += evs.len();
            sums.push(value);
        }
        let sigma2 = rational_to_f64(&truncated_sigma2(seq, horizon, k_active));
        rows.push(SampleRow {
            replicate,
            sums,
            norm2,
            z: norm2 as f64 / sigma2,
            events,
        });
    }
    Ok(rows)
}

fn config_digest(seq: &BlockSequence, config: &SampleConfig) -> String {
    let mut acc: u64 = 0xcbf29ce484222325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            acc ^= b as u64;
            acc = acc.wrapping_mul(0x100000001b3);
        }
    };
    for t in seq.terms() {
        eat(t.to_string().as_bytes());
        eat(b"|");
    }
    eat(config.seed.to_string().as_bytes());
    eat(config.replicates.to_string().as_bytes());
    eat(config.k_active.to_string().as_bytes());
    for h in &config.horizons {
        eat(h.to_string().as_bytes());
    }
    format!("{acc:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use crate::construction::build_theorem_a_sequence;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: Vec<u64> = {
            let mut rng = derive_stream(42, 0, 1);
            (0..8).map(|_| rng.gen()).collect()
        };
        let b: Vec<u64> = {
            let mut rng = derive_stream(42, 0, 1);
            (0..8).map(|_| rng.gen()).collect()
        };
        assert_eq!(a, b);
        let c: Vec<u64> = {
            let mut rng = derive_stream(42, 0, 2);
            (0..8).map(|_| rng.gen()).collect()
        };
        assert_ne!(a, c);
        let d: Vec<u64> = {
            let mut rng = derive_stream(43, 0, 1);
            (0..8).map(|_| rng.gen()).collect()
        };
        assert_ne!(a, d);
    }

    #[test]
    fn binomial_inversion_edges() {
        assert_eq!(binomial_from_uniform(0.5, 0, 0.5), 0);
        assert_eq!(binomial_from_uniform(0.5, 10, 0.0), 0);
        assert_eq!(binomial_from_uniform(0.5, 10, 1.0), 10);
        // u below pmf(0) = (3/4)^2 = 0.5625 gives 0 events.
        assert_eq!(binomial_from_uniform(0.5, 2, 0.25), 0);
        // u above 1 - pmf(2) = 1 - 1/16 gives both slots nonzero.
        assert_eq!(binomial_from_uniform(0.95, 2, 0.25), 2);
    }

    #[test]
    fn binomial_count_matches_mean() {
        let mut rng = derive_stream(1, 0, 0);
        let trials = 100_000u64;
        let p = 0.001;
        let draws: Vec<f64> = (0..2000)
            .map(|_| binomial_count(&mut rng, trials, p) as f64)
            .collect();
        let m = stats::mean(&draws);
        let expected = trials as f64 * p;
        let se = (expected / draws.len() as f64).sqrt() * 1.05;
        assert!(
            (m - expected).abs() < 5.0 * se,
            "mean {m} vs expected {expected}"
        );
    }

    #[test]
    fn floyd_selects_distinct_sorted() {
        let mut rng = derive_stream(2, 0, 0);
        for _ in 0..200 {
            let positions = select_positions(&mut rng, 50, 12);
            assert_eq!(positions.len(), 12);
            assert!(positions.windows(2).all(|w| w[0] < w[1]));
            assert!(positions.iter().all(|&p| p < 50));
        }
    }

    #[test]
    fn zero_events_means_zero_sum() {
        // With u = n^-2 = 2^-32 and one slot, events are essentially never
        // drawn from the first uniforms of this stream; binomial count 0
        // must produce value 0.
        let mut rng = derive_stream(3, 0, 0);
        let draw = sample_component_sum(65536, 1, &mut rng);
        assert_eq!(draw.events, 0);
        assert_eq!(draw.value, 0);
    }

    #[test]
    fn sparse_and_shared_dense_agree_seed_for_seed() {
        for (n_k, horizon) in [(2u64, 1u64), (2, 4), (3, 4), (5, 9), (4, 16)] {
            for replicate in 0..50u64 {
                let sparse = {
                    let mut rng = derive_stream(7, replicate, 1);
                    sample_component_sum(n_k, horizon, &mut rng)
                };
                let dense = {
                    let mut rng = derive_stream(7, replicate, 1);
                    sample_component_sum_dense(n_k, horizon, &mut rng)
                };
                assert_eq!(sparse, dense, "n_k={n_k} N={horizon} r={replicate}");
            }
        }
    }

    #[test]
    fn component_sum_respects_mass_bound() {
        let mut rng = derive_stream(11, 0, 1);
        for _ in 0..500 {
            let draw = sample_component_sum(2, 3, &mut rng);
            assert!(draw.value.unsigned_abs() <= 6);
        }
    }

    #[test]
    fn batches_are_deterministic_and_normalized() {
        let seq = build_theorem_a_sequence(&ratio(2, 1), 4).unwrap();
        let config = SampleConfig {
            seed: 99,
            replicates: 400,
            k_active: 2,
            horizons: vec![4, 16],
            policy: TruncationPolicy::Error,
        };
        let a = sample_batches(&seq, &config).unwrap();
        let b = sample_batches(&seq, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        // Z is nonnegative and the batch carries the exact normalization.
        for batch in &a {
            assert!(batch.rows.iter().all(|r| r.z >= 0.0));
            assert!(batch.truncation_note.is_none());
            assert_eq!(batch.rows.len(), 400);
        }
        // Different horizons use decoupled streams.
        assert_ne!(a[0].rows[0].sums, a[1].rows[0].sums);
    }

    #[test]
    fn config_validation_catches_mistakes() {
        let seq = build_theorem_a_sequence(&ratio(2, 1), 3).unwrap();
        let base = SampleConfig {
            seed: 1,
            replicates: 10,
            k_active: 3,
            horizons: vec![4, 16],
            policy: TruncationPolicy::Error,
        };
        assert!(base.validate(&seq).is_ok());

        let mut bad = base.clone();
        bad.horizons = vec![16, 4];
        assert!(bad.validate(&seq).is_err());

        let mut overflow = base.clone();
        overflow.horizons = vec![300];
        assert!(matches!(
            overflow.validate(&seq),
            Err(Error::HorizonExceeded { .. })
        ));

        let mut tolerated = overflow.clone();
        tolerated.policy = TruncationPolicy::TruncateWithTailNote;
        assert!(tolerated.validate(&seq).is_ok());
        let batches = sample_batches(&seq, &tolerated).unwrap();
        assert!(batches[0].truncation_note.is_some());

        let mut deep = base;
        deep.k_active = 4;
        assert!(deep.validate(&seq).is_err());
    }

    #[test]
    fn trajectory_single_horizon_matches_component_law() {
        let seq = build_theorem_a_sequence(&ratio(2, 1), 3).unwrap();
        let rows = sample_trajectory(&seq, &[4], 5, 0, 1).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].sums.len(), 1);
        let err = sample_trajectory(&seq, &[4, 4], 5, 0, 1);
        assert!(err.is_err());
    }

    #[test]
    fn csv_layout() {
        let seq = build_theorem_a_sequence(&ratio(2, 1), 3).unwrap();
        let config = SampleConfig {
            seed: 5,
            replicates: 3,
            k_active: 2,
            horizons: vec![4],
            policy: TruncationPolicy::Error,
        };
        let batches = sample_batches(&seq, &config).unwrap();
        let csv = batches[0].to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "replicate,N,S_1,S_2,norm2,Z");
        assert_eq!(csv.lines().count(), 4);
    }
}
