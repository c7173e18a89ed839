//! Block-sequence builders and validation, the ternary noise law, horizon
//! indexing, and the process specification tying them together.
//!
//! A [`BlockSequence`] is a strictly increasing truncation `n_1 < ... < n_K`
//! with `n_1 >= 2`, certified against the growth condition
//! `n_(k+1) >= n_k^p` for its stored exponent `p > 1`. Coordinate `k` of the
//! process carries a moving window of length `n_k` over i.i.d. ternary noise
//! with rare-event probability `u_k = n_k^(-2)`; time evolution is the unit
//! shift on noise indices.

use num::bigint::BigInt;
use num::{BigUint, One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, BigRational, DEFAULT_MAX_BITS};
use crate::error::{Error, Result};
use crate::families::{DecayFamily, GrowthFamily};

/// Which builder produced a sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceOrigin {
    ClosedFormA,
    RecursiveA,
    TheoremAPrime,
    Explicit,
}

impl SequenceOrigin {
    fn as_str(self) -> &'static str {
        match self {
            Self::ClosedFormA => "closed_form_A",
            Self::RecursiveA => "recursive_A",
            Self::TheoremAPrime => "theorem_A_prime",
            Self::Explicit => "explicit",
        }
    }

    fn parse(text: &str) -> Result<Self> {
        match text {
            "closed_form_A" => Ok(Self::ClosedFormA),
            "recursive_A" => Ok(Self::RecursiveA),
            "theorem_A_prime" => Ok(Self::TheoremAPrime),
            "explicit" => Ok(Self::Explicit),
            other => Err(Error::OutOfRange {
                what: format!("unknown sequence origin {other:?}"),
            }),
        }
    }
}

/// Strictly increasing block lengths `n_1 .. n_K` with a certified growth
/// exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSequence {
    terms: Vec<BigUint>,
    exponent: BigRational,
    origin: SequenceOrigin,
}

impl BlockSequence {
    /// Validates and assembles a sequence: nonempty, `n_1 >= 2`, strictly
    /// increasing, and `n_(k+1) >= n_k^p` for every consecutive pair.
    pub fn from_parts(
        terms: Vec<BigUint>,
        exponent: BigRational,
        origin: SequenceOrigin,
    ) -> Result<Self> {
        if exponent <= BigRational::one() {
            return Err(Error::InvalidExponent {
                p: exponent.to_string(),
            });
        }
        let first = terms.first().ok_or_else(|| Error::OutOfRange {
            what: "sequence must contain at least one term".to_string(),
        })?;
        if *first < BigUint::from(2u32) {
            return Err(Error::SeedTooSmall {
                n1: first.to_string(),
            });
        }
        for (i, pair) in terms.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::NonIncreasing { k: i + 1 });
            }
        }
        let report = validate_condition_c(&terms, &exponent)?;
        if let Some(k) = report.first_failure() {
            return Err(Error::ConditionCViolated {
                k,
                p: exponent.to_string(),
            });
        }
        Ok(Self {
            terms,
            exponent,
            origin,
        })
    }

    /// Truncation depth `K`.
    pub fn depth(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[BigUint] {
        &self.terms
    }

    /// 1-based term accessor: `term(1) = n_1`.
    pub fn term(&self, k: usize) -> &BigUint {
        assert!(k >= 1 && k <= self.terms.len(), "term index out of range");
        &self.terms[k - 1]
    }

    pub fn exponent(&self) -> &BigRational {
        &self.exponent
    }

    pub fn origin(&self) -> SequenceOrigin {
        self.origin
    }

    /// Rare-event probability `u_k = n_k^(-2)` of coordinate `k` (1-based).
    pub fn u(&self, k: usize) -> BigRational {
        let n = BigInt::from(self.term(k).clone());
        BigRational::new(BigInt::one(), &n * &n)
    }

    /// The horizon index `i(N)`: the unique `i >= 1` with
    /// `n_i <= N < n_(i+1)`, or 0 when `N < n_1` (artifact convention; the
    /// bracketing definition only applies from `n_1` upward).
    pub fn index_of(&self, horizon: u64) -> Result<HorizonIndex> {
        let n = BigUint::from(horizon);
        let last = self.terms.last().expect("nonempty");
        if n >= *last {
            return Err(Error::HorizonExceeded {
                horizon,
                last_term: last.to_string(),
            });
        }
        let index = self.terms.partition_point(|t| *t <= n);
        Ok(HorizonIndex { horizon, index })
    }

    /// Keeps the first `k` terms.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        Self::from_parts(
            self.terms.iter().take(k).cloned().collect(),
            self.exponent.clone(),
            self.origin,
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::OutOfRange {
            what: format!("sequence JSON: {e}"),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceJson {
    terms: Vec<String>,
    p: String,
    origin: String,
}

impl Serialize for BlockSequence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SequenceJson {
            terms: self.terms.iter().map(|t| t.to_string()).collect(),
            p: self.exponent.to_string(),
            origin: self.origin.as_str().to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BlockSequence {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SequenceJson::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in &raw.terms {
            let parsed = t
                .parse::<BigUint>()
                .map_err(|e| serde::de::Error::custom(format!("term {t:?}: {e}")))?;
            terms.push(parsed);
        }
        let p = arith::parse_rational(&raw.p).map_err(serde::de::Error::custom)?;
        let origin = SequenceOrigin::parse(&raw.origin).map_err(serde::de::Error::custom)?;
        BlockSequence::from_parts(terms, p, origin).map_err(serde::de::Error::custom)
    }
}

/// Position of a horizon `N` relative to the block sequence: `index` is
/// `i(N)`, with the convention `i(N) = 0` for `N < n_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HorizonIndex {
    pub horizon: u64,
    pub index: usize,
}

/// Ternary law on `{-1, 0, +1}` with `P(+1) = P(-1) = u/2`, `P(0) = 1 - u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernaryLaw {
    u: BigRational,
}

impl TernaryLaw {
    pub fn new(u: BigRational) -> Result<Self> {
        noise_law(u)
    }

    pub fn u(&self) -> &BigRational {
        &self.u
    }

    /// `(P(+1), P(0), P(-1))`, exact.
    pub fn probabilities(&self) -> (BigRational, BigRational, BigRational) {
        let half = &self.u / BigRational::from(BigInt::from(2));
        let zero = BigRational::one() - &self.u;
        (half.clone(), zero, half)
    }

    /// Exactly 0.
    pub fn mean(&self) -> BigRational {
        BigRational::zero()
    }

    /// Exactly `u`.
    pub fn variance(&self) -> BigRational {
        self.u.clone()
    }

    /// `E|X|^q` for integer `q >= 1`; equals `u` for every `q` since the
    /// nonzero values have modulus 1.
    pub fn abs_moment(&self, _q: u32) -> BigRational {
        self.u.clone()
    }
}

/// Builds the ternary noise law for a rare-event probability `u` in `(0, 1]`.
pub fn noise_law(u: BigRational) -> Result<TernaryLaw> {
    if u <= BigRational::zero() || u > BigRational::one() {
        return Err(Error::OutOfRange {
            what: format!("ternary parameter u = {u} must lie in (0, 1]"),
        });
    }
    Ok(TernaryLaw { u })
}

/// The full process specification: coordinate `k` is the moving-window sum
/// of length `n_k` over an i.i.d. ternary array with `u_k = n_k^(-2)`, all
/// coordinates mutually independent, and time advances by shifting the noise
/// index. Every derived law satisfies `u_k * n_k^2 = 1` exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessSpec {
    sequence: BlockSequence,
}

impl ProcessSpec {
    pub fn new(sequence: BlockSequence) -> Self {
        Self { sequence }
    }

    pub fn sequence(&self) -> &BlockSequence {
        &self.sequence
    }

    /// Noise law of coordinate `k` (1-based).
    pub fn law(&self, k: usize) -> TernaryLaw {
        TernaryLaw {
            u: self.sequence.u(k),
        }
    }
}

/// Per-pair outcome of the growth-condition check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionCEntry {
    /// Pair index: checks `n_(k+1) >= n_k^p`.
    pub k: usize,
    pub holds: bool,
}

/// Report of the exact growth-condition check `n_(k+1) >= n_k^p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionCReport {
    pub exponent: String,
    pub entries: Vec<ConditionCEntry>,
    pub pass: bool,
}

impl ConditionCReport {
    pub fn first_failure(&self) -> Option<usize> {
        self.entries.iter().find(|e| !e.holds).map(|e| e.k)
    }
}

/// Checks `n_(k+1) >= n_k^p` for every consecutive pair by the exact integer
/// comparison `n_(k+1)^b >= n_k^a` with `p = a/b`. Failures are reported,
/// not raised.
pub fn validate_condition_c(terms: &[BigUint], p: &BigRational) -> Result<ConditionCReport> {
    let mut entries = Vec::with_capacity(terms.len().saturating_sub(1));
    for (i, pair) in terms.windows(2).enumerate() {
        let holds = arith::pow_at_least(&pair[1], &pair[0], p)?;
        entries.push(ConditionCEntry { k: i + 1, holds });
    }
    let pass = entries.iter().all(|e| e.holds);
    Ok(ConditionCReport {
        exponent: p.to_string(),
        entries,
        pass,
    })
}

/// Closed-form builder: `n_k = floor(2^(p^k))` for `k = 1..K`.
///
/// The floor is exact (integer root extraction), so a duplicate pair is a
/// genuine property of the closed form at this `p`; it is rejected rather
/// than repaired, and the recursive builder is the sanctioned slow-growth
/// alternative.
pub fn build_theorem_a_sequence(p: &BigRational, depth: usize) -> Result<BlockSequence> {
    if *p <= BigRational::one() {
        return Err(Error::InvalidExponent { p: p.to_string() });
    }
    if depth == 0 {
        return Err(Error::OutOfRange {
            what: "depth must be at least 1".to_string(),
        });
    }
    let (a, b) = arith::exponent_parts(p)?;
    let mut c = BigUint::one();
    let mut d = BigUint::one();
    let mut terms = Vec::with_capacity(depth);
    for k in 0..depth {
        c *= BigUint::from(a);
        d *= BigUint::from(b);
        let term = arith::floor_pow2(&c, &d, DEFAULT_MAX_BITS)?;
        if let Some(prev) = terms.last() {
            if term <= *prev {
                return Err(Error::NonIncreasing { k });
            }
        }
        terms.push(term);
    }
    BlockSequence::from_parts(terms, p.clone(), SequenceOrigin::ClosedFormA)
}

/// Recursive builder: `n_(k+1) = max(ceil(n_k^p), n_k + 1)` from a seed
/// `n_1 >= 2`. Satisfies the growth condition by construction and supports
/// slow growth (`p` near 1), which is what drives `i(N)` large at desk scale.
pub fn build_recursive_sequence(
    p: &BigRational,
    n1: u64,
    depth: usize,
) -> Result<BlockSequence> {
    if *p <= BigRational::one() {
        return Err(Error::InvalidExponent { p: p.to_string() });
    }
    if n1 < 2 {
        return Err(Error::SeedTooSmall { n1: n1.to_string() });
    }
    if depth == 0 {
        return Err(Error::OutOfRange {
            what: "depth must be at least 1".to_string(),
        });
    }
    let (a, b) = arith::exponent_parts(p)?;
    let mut terms = vec![BigUint::from(n1)];
    while terms.len() < depth {
        let prev = terms.last().expect("nonempty");
        let grown = arith::ceil_pow(prev, a, b, DEFAULT_MAX_BITS)?;
        let next = grown.max(prev + BigUint::one());
        terms.push(next);
    }
    BlockSequence::from_parts(terms, p.clone(), SequenceOrigin::RecursiveA)
}

/// Inputs for the inductive builder: a decay target `b` (nonincreasing, to
/// 0), a growth scale `h` (nondecreasing, to infinity), and the seed `n_1`.
///
/// The default seed is 4 so that `n_k >= 2^(2^k)` holds with 1-based
/// indexing; it can be overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremAPrimeInputs {
    pub b: DecayFamily,
    pub h: GrowthFamily,
    pub seed: BigUint,
}

impl TheoremAPrimeInputs {
    pub fn new(b: DecayFamily, h: GrowthFamily) -> Self {
        Self {
            b,
            h,
            seed: BigUint::from(4u32),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = BigUint::from(seed);
        self
    }
}

/// Inductive builder:
/// `n_(k+1) = max { n_k^2, floor(2^k / b(n_k)), h^{-1}(k) }` from `n_1`.
///
/// The growth condition holds with exponent 2 by the `n_k^2` arm.
pub fn build_theorem_a_prime_sequence(
    inputs: &TheoremAPrimeInputs,
    depth: usize,
) -> Result<BlockSequence> {
    if inputs.seed < BigUint::from(2u32) {
        return Err(Error::SeedTooSmall {
            n1: inputs.seed.to_string(),
        });
    }
    if depth == 0 {
        return Err(Error::OutOfRange {
            what: "depth must be at least 1".to_string(),
        });
    }
    let mut terms = vec![inputs.seed.clone()];
    for k in 1..depth as u64 {
        let prev = terms.last().expect("nonempty");
        if prev.bits() * 2 > DEFAULT_MAX_BITS {
            return Err(Error::PrecisionExhausted {
                what: format!("square of {}-bit term", prev.bits()),
                max_bits: DEFAULT_MAX_BITS,
            });
        }
        let squared = prev * prev;
        let shifted = inputs.b.floor_shift_over(k, prev)?;
        let inverse = inputs.h.inverse(k)?;
        let next = squared.max(shifted).max(inverse);
        terms.push(next);
    }
    BlockSequence::from_parts(
        terms,
        arith::ratio(2, 1),
        SequenceOrigin::TheoremAPrime,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;

    fn seq_u64(seq: &BlockSequence) -> Vec<u64> {
        seq.terms()
            .iter()
            .map(|t| u64::try_from(t).expect("fits"))
            .collect()
    }

    #[test]
    fn closed_form_p2() {
        let seq = build_theorem_a_sequence(&ratio(2, 1), 4).unwrap();
        assert_eq!(seq_u64(&seq), vec![4, 16, 256, 65536]);
        assert_eq!(seq.origin(), SequenceOrigin::ClosedFormA);
    }

    #[test]
    fn closed_form_rejects_p_at_most_one() {
        assert!(matches!(
            build_theorem_a_sequence(&ratio(1, 1), 3),
            Err(Error::InvalidExponent { .. })
        ));
    }

    #[test]
    fn closed_form_p_three_halves() {
        let seq = build_theorem_a_sequence(&ratio(3, 2), 3).unwrap();
        assert_eq!(seq_u64(&seq), vec![2, 4, 10]);
    }

    #[test]
    fn closed_form_duplicates_rejected() {
        // floor(2^1.1) = floor(2^1.21) = 2.
        assert!(matches!(
            build_theorem_a_sequence(&ratio(11, 10), 3),
            Err(Error::NonIncreasing { .. })
        ));
    }

    #[test]
    fn closed_form_matches_recursive_for_p2() {
        let closed = build_theorem_a_sequence(&ratio(2, 1), 5).unwrap();
        let recursive = build_recursive_sequence(&ratio(2, 1), 4, 5).unwrap();
        assert_eq!(closed.terms(), recursive.terms());
        assert_eq!(seq_u64(&closed), vec![4, 16, 256, 65536, 4294967296]);
    }

    #[test]
    fn recursive_p2() {
        let seq = build_recursive_sequence(&ratio(2, 1), 2, 4).unwrap();
        assert_eq!(seq_u64(&seq), vec![2, 4, 16, 256]);
    }

    #[test]
    fn recursive_slow_growth() {
        let seq = build_recursive_sequence(&ratio(11, 10), 2, 6).unwrap();
        assert_eq!(seq_u64(&seq), vec![2, 3, 4, 5, 6, 8]);
    }

    #[test]
    fn recursive_rejects_degenerate_seed() {
        assert!(matches!(
            build_recursive_sequence(&ratio(2, 1), 1, 2),
            Err(Error::SeedTooSmall { .. })
        ));
    }

    #[test]
    fn a_prime_reproduces_closed_form() {
        let inputs = TheoremAPrimeInputs::new(
            DecayFamily::parse("power:1").unwrap(),
            GrowthFamily::parse("linear").unwrap(),
        );
        let seq = build_theorem_a_prime_sequence(&inputs, 4).unwrap();
        assert_eq!(seq_u64(&seq), vec![4, 16, 256, 65536]);
        assert_eq!(seq.origin(), SequenceOrigin::TheoremAPrime);
    }

    #[test]
    fn a_prime_single_term() {
        let inputs = TheoremAPrimeInputs::new(
            DecayFamily::parse("power:1").unwrap(),
            GrowthFamily::parse("linear").unwrap(),
        );
        let seq = build_theorem_a_prime_sequence(&inputs, 1).unwrap();
        assert_eq!(seq_u64(&seq), vec![4]);
    }

    #[test]
    fn a_prime_exponential_decay_dominates() {
        let inputs = TheoremAPrimeInputs::new(
            DecayFamily::parse("exp2").unwrap(),
            GrowthFamily::parse("linear").unwrap(),
        );
        let seq = build_theorem_a_prime_sequence(&inputs, 3).unwrap();
        assert_eq!(seq_u64(&seq), vec![4, 32, 17179869184]);
    }

    #[test]
    fn condition_c_report() {
        let pass = validate_condition_c(
            &[4u32.into(), 16u32.into(), 256u32.into()],
            &ratio(2, 1),
        )
        .unwrap();
        assert!(pass.pass);

        let fail =
            validate_condition_c(&[4u32.into(), 8u32.into()], &ratio(2, 1)).unwrap();
        assert!(!fail.pass);
        assert_eq!(fail.first_failure(), Some(1));

        let slow = validate_condition_c(
            &[2u32.into(), 3u32.into(), 4u32.into()],
            &ratio(11, 10),
        )
        .unwrap();
        assert!(slow.pass);
    }

    #[test]
    fn index_of_brackets() {
        let seq = build_theorem_a_sequence(&ratio(2, 1), 4).unwrap();
        assert_eq!(seq.index_of(4).unwrap().index, 1);
        assert_eq!(seq.index_of(100).unwrap().index, 2);
        assert_eq!(seq.index_of(3).unwrap().index, 0);
        assert!(matches!(
            seq.index_of(70000),
            Err(Error::HorizonExceeded { .. })
        ));
    }

    #[test]
    fn index_of_is_monotone_and_bracketing() {
        let seq = build_recursive_sequence(&ratio(11, 10), 2, 6).unwrap();
        let terms = seq_u64(&seq);
        let mut prev = 0usize;
        for n in 2..terms[5] {
            let idx = seq.index_of(n).unwrap().index;
            assert!(idx >= prev);
            prev = idx;
            if idx >= 1 {
                assert!(terms[idx - 1] <= n);
                assert!(n < terms[idx]);
            } else {
                assert!(n < terms[0]);
            }
        }
    }

    #[test]
    fn noise_law_probabilities() {
        let law = noise_law(ratio(1, 4)).unwrap();
        let (plus, zero, minus) = law.probabilities();
        assert_eq!(plus, ratio(1, 8));
        assert_eq!(zero, ratio(3, 4));
        assert_eq!(minus, ratio(1, 8));
        assert_eq!(law.mean(), ratio(0, 1));
        assert_eq!(law.variance(), ratio(1, 4));

        let fair = noise_law(ratio(1, 1)).unwrap();
        let (p, z, m) = fair.probabilities();
        assert_eq!(p, ratio(1, 2));
        assert_eq!(z, ratio(0, 1));
        assert_eq!(m, ratio(1, 2));

        assert!(matches!(
            noise_law(ratio(0, 1)),
            Err(Error::OutOfRange { .. })
        ));
        assert!(matches!(
            noise_law(ratio(5, 4)),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn process_spec_laws_are_exact() {
        let seq = build_theorem_a_sequence(&ratio(2, 1), 3).unwrap();
        let spec = ProcessSpec::new(seq);
        for k in 1..=3 {
            let law = spec.law(k);
            let n = BigInt::from(spec.sequence().term(k).clone());
            // u_k * n_k^2 = 1 exactly.
            assert_eq!(law.u() * BigRational::from(&n * &n), BigRational::one());
            let (p, z, m) = law.probabilities();
            assert_eq!(p.clone() + z + m, BigRational::one());
            assert_eq!(p, law.u() / BigRational::from(BigInt::from(2)));
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let seq = build_theorem_a_sequence(&ratio(3, 2), 3).unwrap();
        let json = seq.to_json();
        let back = BlockSequence::from_json(&json).unwrap();
        assert_eq!(seq, back);

        // Import validates: decreasing terms are rejected.
        let bad = r#"{"terms": ["4", "3"], "p": "2", "origin": "explicit"}"#;
        assert!(BlockSequence::from_json(bad).is_err());
        // And so is a growth-condition violation.
        let no_c = r#"{"terms": ["4", "8"], "p": "2", "origin": "explicit"}"#;
        assert!(BlockSequence::from_json(no_c).is_err());
    }

    #[test]
    fn built_sequences_pass_their_own_condition() {
        for (p, depth) in [(ratio(2, 1), 5), (ratio(3, 2), 6), (ratio(11, 10), 12)] {
            if let Ok(seq) = build_recursive_sequence(&p, 2, depth) {
                let report = validate_condition_c(seq.terms(), seq.exponent()).unwrap();
                assert!(report.pass);
            }
        }
        let closed = build_theorem_a_sequence(&ratio(3, 2), 6).unwrap();
        assert!(validate_condition_c(closed.terms(), closed.exponent())
            .unwrap()
            .pass);
    }
}
