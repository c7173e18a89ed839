//! Exact arbitrary-precision helpers: rational powers of integers, provable
//! floors of `2^(c/d)`, cross-multiplied power comparisons, and geometric
//! tail majorants.
//!
//! All floors and ceilings here are computed by exact integer root
//! extraction, so the result never depends on a floating-point rounding
//! decision. Size caps guard against materializing astronomically large
//! intermediates; exceeding one reports [`Error::PrecisionExhausted`].

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{BigUint, One, Signed, Zero};

use crate::error::{Error, Result};

pub type BigRational = Ratio<BigInt>;

/// Default cap on the bit length of any materialized integer intermediate.
pub const DEFAULT_MAX_BITS: u64 = 1 << 26;

/// Splits a positive rational exponent into coprime `(numerator, denominator)`
/// that fit machine words, as required by exact power/root extraction.
pub fn exponent_parts(p: &BigRational) -> Result<(u64, u64)> {
    if !p.is_positive() {
        return Err(Error::InvalidExponent { p: p.to_string() });
    }
    let numer = p.numer().to_biguint().expect("positive rational");
    let denom = p.denom().to_biguint().expect("positive denominator");
    let a = to_u64(&numer, "exponent numerator")?;
    let b = to_u64(&denom, "exponent denominator")?;
    Ok((a, b))
}

fn to_u64(x: &BigUint, what: &str) -> Result<u64> {
    u64::try_from(x).map_err(|_| Error::PrecisionExhausted {
        what: format!("{what} {x}"),
        max_bits: 64,
    })
}

fn to_u32_exp(x: u64, what: &str) -> Result<u32> {
    u32::try_from(x).map_err(|_| Error::PrecisionExhausted {
        what: format!("{what} {x}"),
        max_bits: 32,
    })
}

/// `base^(a/b)` rounded down, exactly: `floor((base^a)^(1/b))`.
pub fn floor_pow(base: &BigUint, a: u64, b: u64, max_bits: u64) -> Result<BigUint> {
    let (r, _exact) = root_of_power(base, a, b, max_bits)?;
    Ok(r)
}

/// `base^(a/b)` rounded up, exactly.
pub fn ceil_pow(base: &BigUint, a: u64, b: u64, max_bits: u64) -> Result<BigUint> {
    let (r, exact) = root_of_power(base, a, b, max_bits)?;
    Ok(if exact { r } else { r + BigUint::one() })
}

/// Returns `(floor((base^a)^(1/b)), whether the root is exact)`.
fn root_of_power(base: &BigUint, a: u64, b: u64, max_bits: u64) -> Result<(BigUint, bool)> {
    if b == 0 {
        return Err(Error::InvalidExponent {
            p: format!("{a}/0"),
        });
    }
    let pow_bits = base.bits().saturating_mul(a);
    if pow_bits > max_bits {
        return Err(Error::PrecisionExhausted {
            what: format!("{base}^{a}"),
            max_bits,
        });
    }
    let power = base.pow(to_u32_exp(a, "power exponent")?);
    if b == 1 {
        return Ok((power, true));
    }
    let root = power.nth_root(to_u32_exp(b, "root index")?);
    let exact = root.pow(to_u32_exp(b, "root index")?) == power;
    Ok((root, exact))
}

/// `floor(2^(c/d))`, exactly. The working size is `c + 1` bits.
pub fn floor_pow2(c: &BigUint, d: &BigUint, max_bits: u64) -> Result<BigUint> {
    let d64 = to_u64(d, "dyadic exponent denominator")?;
    if d64 == 0 {
        return Err(Error::InvalidExponent {
            p: format!("{c}/0"),
        });
    }
    let c64 = to_u64(c, "dyadic exponent numerator")?;
    if c64.saturating_add(1) > max_bits {
        return Err(Error::PrecisionExhausted {
            what: format!("2^({c}/{d})"),
            max_bits,
        });
    }
    let power = BigUint::one() << usize::try_from(c64).expect("capped bit count");
    if d64 == 1 {
        return Ok(power);
    }
    Ok(power.nth_root(to_u32_exp(d64, "root index")?))
}

/// Whether `lhs >= rhs^p` for rational `p = a/b`, decided by the exact
/// integer comparison `lhs^b >= rhs^a`. A bit-length bracket avoids
/// materializing the powers except near equality.
pub fn pow_at_least(lhs: &BigUint, rhs: &BigUint, p: &BigRational) -> Result<bool> {
    let (a, b) = exponent_parts(p)?;
    if rhs.is_zero() {
        return Ok(true);
    }
    if lhs.is_zero() {
        return Ok(false);
    }
    // 2^(bits-1) <= x < 2^bits brackets both powers.
    let lhs_low = (lhs.bits() - 1).saturating_mul(b);
    let lhs_high = lhs.bits().saturating_mul(b);
    let rhs_low = (rhs.bits() - 1).saturating_mul(a);
    let rhs_high = rhs.bits().saturating_mul(a);
    if lhs_low >= rhs_high {
        return Ok(true);
    }
    if lhs_high < rhs_low.saturating_add(1) {
        return Ok(false);
    }
    let lp = lhs.pow(to_u32_exp(b, "comparison exponent")?);
    let rp = rhs.pow(to_u32_exp(a, "comparison exponent")?);
    Ok(lp >= rp)
}

/// `sum_{j=1}^{m} j^2 = m(m+1)(2m+1)/6`, exactly.
pub fn sum_of_squares(m: &BigUint) -> BigUint {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    (m * (m + &one) * (&two * m + &one)) / BigUint::from(6u32)
}

/// A rational upper bound on `sum_{m>=1} 1/n_{K+m}` for any extension of the
/// sequence obeying `n_{k+1} >= n_k^p` beyond its last retained term `n_K`.
///
/// Chain: `n_{K+m} >= n_K^(p^m) >= n_K^(1 + m(p-1))` (Bernoulli), so the
/// inverse sum is dominated by the geometric series `(1/n_K) * sum rho^m`
/// with `rho = n_K^-(p-1)`. `rho` is replaced by the provable rational upper
/// bound `2^w / floor(2^w * n_K^(p-1))`, with `w` grown until the bound is
/// strictly below 1.
pub fn tail_inverse_sum_bound(last_term: &BigUint, p: &BigRational) -> Result<BigRational> {
    let (a, b) = exponent_parts(p)?;
    if a <= b {
        return Err(Error::InvalidExponent { p: p.to_string() });
    }
    if *last_term < BigUint::from(2u32) {
        return Err(Error::SeedTooSmall {
            n1: last_term.to_string(),
        });
    }
    let mut w: u64 = 32;
    loop {
        // floor(2^w * n_K^((a-b)/b)) = floor((n_K^(a-b) * 2^(w b))^(1/b))
        let shifted = last_term.pow(to_u32_exp(a - b, "tail exponent")?)
            << usize::try_from(w.saturating_mul(b)).expect("bounded shift");
        let g = if b == 1 {
            shifted
        } else {
            shifted.nth_root(to_u32_exp(b, "tail root index")?)
        };
        let scale = BigUint::one() << usize::try_from(w).expect("bounded shift");
        if g > scale {
            let rho = BigRational::new(BigInt::from(scale), BigInt::from(g));
            let one = BigRational::one();
            let geometric = &rho / (&one - &rho);
            let inv_last = BigRational::new(BigInt::one(), BigInt::from(last_term.clone()));
            return Ok(inv_last * geometric);
        }
        w *= 2;
        if w > 1 << 20 {
            return Err(Error::PrecisionExhausted {
                what: format!("tail ratio bound for n_K = {last_term}, p = {p}"),
                max_bits: 1 << 20,
            });
        }
    }
}

/// Parses a rational from `"a/b"`, an integer, or a terminating decimal.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let trimmed = text.trim();
    let invalid = || Error::OutOfRange {
        what: format!("cannot parse rational from {trimmed:?}"),
    };
    if let Some((num, den)) = trimmed.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| invalid())?;
        let d: BigInt = den.trim().parse().map_err(|_| invalid())?;
        if d.is_zero() {
            return Err(invalid());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = trimmed.split_once('.') {
        let digits = format!("{}{}", int.trim_start_matches(['+', '-']), frac);
        let n: BigInt = digits.parse().map_err(|_| invalid())?;
        let sign = if trimmed.starts_with('-') { -1 } else { 1 };
        let d = BigInt::from(10u32).pow(u32::try_from(frac.len()).map_err(|_| invalid())?);
        return Ok(BigRational::new(BigInt::from(sign) * n, d));
    }
    let n: BigInt = trimmed.parse().map_err(|_| invalid())?;
    Ok(BigRational::from(n))
}

/// Shorthand for a small rational.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Lossy conversion of a big nonnegative integer, `+inf` past the f64 range.
pub fn big_to_f64(x: &BigUint) -> f64 {
    if x.bits() <= 1000 {
        let mut acc = 0.0f64;
        for digit in x.to_u64_digits().iter().rev() {
            acc = acc * 1.8446744073709552e19 + *digit as f64;
        }
        acc
    } else {
        f64::INFINITY
    }
}

/// Natural log of a big positive integer, stable for huge values.
pub fn big_ln(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 52 {
        return (u64::try_from(x).expect("fits") as f64).ln();
    }
    let shift = bits - 52;
    let top: BigUint = x >> usize::try_from(shift).expect("bit count");
    (u64::try_from(&top).expect("52 bits") as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Rounds a rational to f64, staying finite and accurate even when both
/// numerator and denominator are far outside the f64 range.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    if num.is_zero() {
        return 0.0;
    }
    let value = if num.bits() <= 900 && den.bits() <= 900 {
        big_to_f64(num) / big_to_f64(den)
    } else {
        (big_ln(num) - big_ln(den)).exp()
    };
    sign * value
}
