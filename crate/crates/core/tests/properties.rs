//! Property tests for the exact layers: weight identities, variance
//! identities, horizon bracketing, law exactness, serialization, and bound
//! monotonicity.

use hsmix_core::arith::{ratio, BigRational};
use hsmix_core::moments::{component_variance, partial_sum_pmf, WeightProfile};
use hsmix_core::{
    beta_upper_bound, build_recursive_sequence, build_theorem_a_sequence, mixing_bound_report,
    noise_law, total_variance, validate_condition_c, BlockSequence, SequenceOrigin,
};
use num::bigint::BigInt;
use num::{BigUint, One, Zero};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weight_piecewise_equals_overlap(n_k in 2u64..=64, horizon in 1u64..=128, j in -80i64..200) {
        let profile = WeightProfile::new(n_k, horizon).unwrap();
        prop_assert_eq!(profile.weight(j), profile.piecewise_weight(j));
    }

    #[test]
    fn weight_sum_counts_every_slot(n_k in 2u64..=32, horizon in 1u64..=64) {
        let profile = WeightProfile::new(n_k, horizon).unwrap();
        let sum: u64 = profile.support().map(|j| profile.weight(j)).sum();
        prop_assert_eq!(BigUint::from(sum), profile.weight_sum());
    }

    #[test]
    fn variance_matches_weight_enumeration(n_k in 2u64..=24, horizon in 1u64..=48) {
        let profile = WeightProfile::new(n_k, horizon).unwrap();
        let sq_sum: u64 = profile.support().map(|j| profile.weight(j).pow(2)).sum();
        let expected = BigRational::new(
            BigInt::from(sq_sum),
            BigInt::from(n_k) * BigInt::from(n_k),
        );
        prop_assert_eq!(component_variance(&BigUint::from(n_k), horizon), expected);
    }

    #[test]
    fn ternary_law_is_exact(num in 1u64..=64, den in 1u64..=64) {
        prop_assume!(num <= den);
        let u = ratio(num as i64, den as i64);
        let law = noise_law(u.clone()).unwrap();
        let (plus, zero, minus) = law.probabilities();
        prop_assert_eq!(plus.clone() + zero + minus.clone(), BigRational::one());
        prop_assert_eq!(plus.clone(), minus);
        prop_assert_eq!(law.mean(), BigRational::zero());
        prop_assert_eq!(law.variance(), u);
    }

    #[test]
    fn index_of_brackets_every_horizon(n1 in 2u64..=5, seed in 0u64..1000) {
        let seq = build_recursive_sequence(&ratio(3, 2), n1, 6).unwrap();
        let terms: Vec<u64> = seq.terms().iter().map(|t| u64::try_from(t).unwrap()).collect();
        let last = *terms.last().unwrap();
        let horizon = 1 + seed % (last - 1);
        let idx = seq.index_of(horizon).unwrap().index;
        if idx == 0 {
            prop_assert!(horizon < terms[0]);
        } else {
            prop_assert!(terms[idx - 1] <= horizon);
            prop_assert!(horizon < terms[idx]);
        }
    }

    #[test]
    fn sequence_json_round_trips(p_num in 11u64..=40, n1 in 2u64..=6, depth in 1usize..=8) {
        prop_assume!(p_num > 10);
        let p = ratio(p_num as i64, 10);
        let seq = build_recursive_sequence(&p, n1, depth).unwrap();
        let back = BlockSequence::from_json(&seq.to_json()).unwrap();
        prop_assert_eq!(seq, back);
    }

    #[test]
    fn pmf_is_symmetric_normalized(n_k in 2u64..=4, horizon in 1u64..=4) {
        let pmf = partial_sum_pmf(n_k, horizon, 1 << 12).unwrap();
        prop_assert_eq!(pmf.total(), BigRational::one());
        prop_assert_eq!(pmf.mean(), BigRational::zero());
        for (v, p) in pmf.iter() {
            prop_assert_eq!(p.clone(), pmf.prob(-v));
        }
    }

    #[test]
    fn mixing_bound_nonincreasing_and_clamped(raw in proptest::collection::vec(1u64..100_000, 2..12)) {
        let mut lags = raw;
        lags.sort_unstable();
        lags.dedup();
        prop_assume!(lags.len() >= 2);
        let seq = build_theorem_a_sequence(&ratio(2, 1), 4).unwrap();
        let report = mixing_bound_report(&seq, &lags).unwrap();
        for entry in &report.entries {
            let b = entry.bound.exact_value().unwrap();
            prop_assert!(*b >= BigRational::zero());
            prop_assert!(*b <= BigRational::one());
        }
        for w in report.entries.windows(2) {
            prop_assert!(w[1].bound.exact_value().unwrap() <= w[0].bound.exact_value().unwrap());
        }
    }
}

#[test]
fn built_sequences_always_pass_their_own_condition() {
    let cases = [
        build_theorem_a_sequence(&ratio(2, 1), 5).unwrap(),
        build_theorem_a_sequence(&ratio(3, 2), 6).unwrap(),
        build_recursive_sequence(&ratio(11, 10), 2, 20).unwrap(),
        build_recursive_sequence(&ratio(2, 1), 3, 5).unwrap(),
    ];
    for seq in &cases {
        let report = validate_condition_c(seq.terms(), seq.exponent()).unwrap();
        assert!(report.pass, "{:?}", seq.origin());
    }
}

#[test]
fn recursive_growth_is_exact_not_rounded() {
    // n_{k+1} >= n_k^p must hold by exact cross-multiplication for the
    // slow-growth sequence, where a rounding slip would be easiest.
    let p = ratio(11, 10);
    let seq = build_recursive_sequence(&p, 2, 26).unwrap();
    for pair in seq.terms().windows(2) {
        let lhs = pair[1].pow(10);
        let rhs = pair[0].pow(11);
        assert!(lhs >= rhs);
    }
}

#[test]
fn tail_bound_covers_one_step_extension_for_slow_growth() {
    let p = ratio(11, 10);
    let full = build_recursive_sequence(&p, 2, 16).unwrap();
    let truncated = full.truncate(15).unwrap();
    let last = u64::try_from(full.term(15)).unwrap();
    for horizon in [1u64, 5, 50, last - 1] {
        let report = total_variance(&truncated, horizon).unwrap();
        let next = component_variance(full.term(16), horizon);
        assert!(
            next <= *report.tail_bound().expect("bracketed"),
            "horizon {horizon}"
        );
    }
}

#[test]
fn beta_bound_head_is_zero_past_last_term() {
    let seq = build_theorem_a_sequence(&ratio(2, 1), 4).unwrap();
    let entry = beta_upper_bound(&seq, 65536).unwrap();
    assert!(entry.head.exact_value().unwrap().is_zero());
    assert!(entry.tail.exact_value().unwrap() > &BigRational::zero());
}

#[test]
fn explicit_sequences_validate_on_import() {
    let good = BlockSequence::from_parts(
        vec![BigUint::from(3u32), BigUint::from(9u32), BigUint::from(81u32)],
        ratio(2, 1),
        SequenceOrigin::Explicit,
    );
    assert!(good.is_ok());
    let bad = BlockSequence::from_parts(
        vec![BigUint::from(3u32), BigUint::from(8u32)],
        ratio(2, 1),
        SequenceOrigin::Explicit,
    );
    assert!(bad.is_err());
}
