//! Recomputes, from the exact oracles, the constants that the acceptance
//! suite pins (ratio brackets, share values, normalized mixing bounds,
//! moment-ratio suprema). Run it when extending the suite:
//!
//! ```text
//! cargo run --release -p hsmix-core --example acceptance_constants
//! ```

use hsmix_core::arith::{ratio, rational_to_f64};
use hsmix_core::{
    asymptotic_ratio, beta_exact_tiny, beta_upper_bound, build_recursive_sequence,
    build_theorem_a_sequence, mass_profile, moment_check, TinyBetaSpec,
};
use num::BigUint;

fn main() {
    let p2 = build_theorem_a_sequence(&ratio(2, 1), 5).unwrap();

    println!("== criterion 5: ratio over log grid, p=2 closed form K=5 ==");
    let mut grid: Vec<u64> = (2..=15).map(|e| 1u64 << e).collect();
    grid.push(65535);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &n in &grid {
        let r = asymptotic_ratio(&p2, n).unwrap();
        let v = r.low.value();
        lo = lo.min(v);
        hi = hi.max(v);
        println!("N={n:6} i={} ratio={v:.6} high={:.6}", r.index, r.high.value());
    }
    println!("bracket observed: [{lo:.6}, {hi:.6}]");

    println!("\n== criterion 7: s_1 for p=2 over {{16,256,4096,65535}} ==");
    for &n in &[16u64, 256, 4096, 65535] {
        let profile = mass_profile(&p2, n).unwrap();
        println!("N={n:6} s_1={:.6}", rational_to_f64(profile.share(1)));
    }

    println!("\n== criterion 6: recursive p=1.1 from 2, K=26 ==");
    let slow = build_recursive_sequence(&ratio(11, 10), 2, 26).unwrap();
    let terms: Vec<String> = slow.terms().iter().map(|t| t.to_string()).collect();
    println!("terms: {}", terms.join(", "));
    for k in [10usize, 15, 20, 25] {
        let n = u64::try_from(slow.term(k)).unwrap();
        let profile = mass_profile(&slow, n).unwrap();
        println!(
            "N=n_{k}={n:7} low_5={:.6} deficit={:?}",
            rational_to_f64(profile.low(5)),
            profile.truncation_deficit.as_ref().map(|d| d.value()),
        );
    }

    println!("\n== criterion 9: bound(n_k) * sqrt(n_k), p=2 K=4 ==");
    let p2k4 = build_theorem_a_sequence(&ratio(2, 1), 4).unwrap();
    for k in 1..=4usize {
        let n = u64::try_from(p2k4.term(k)).unwrap();
        let entry = beta_upper_bound(&p2k4, n).unwrap();
        println!(
            "lag=n_{k}={n:6} bound={:.10} normalized={:.6}",
            entry.bound.value(),
            entry.normalized
        );
    }
    let b = beta_exact_tiny(&TinyBetaSpec::new(2, 0, 1)).unwrap();
    println!(
        "beta_exact(n=2, m=0, g=1) = {} = {:.8}",
        b.beta.exact_string(),
        b.beta.value()
    );

    println!("\n== Eq-14-style moment certification: sup ratios ==");
    for p in 1u32..=3 {
        let mut sup: f64 = 0.0;
        for n in 2u64..=8 {
            let check = moment_check(n, p, 1 << 14).unwrap();
            sup = sup.max(check.ratio.value());
        }
        println!("p={p}: sup ratio = {sup:.6}");
    }

    println!("\n== theorem A' bound vs decay target at n_2, n_3 ==");
    let seq = build_theorem_a_sequence(&ratio(2, 1), 4).unwrap();
    for k in [2usize, 3] {
        let n = u64::try_from(seq.term(k)).unwrap();
        let entry = beta_upper_bound(&seq, n).unwrap();
        println!(
            "bound(n_{k}={n}) = {:.8} vs b = 1/{n} = {:.8}",
            entry.bound.value(),
            1.0 / n as f64
        );
    }
    let _ = BigUint::from(0u32);
}
