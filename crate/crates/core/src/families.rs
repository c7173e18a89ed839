//! Closed-form sequence families for the inductive builder: a nonincreasing
//! positive decay target `b` with limit 0 and a nondecreasing growth scale
//! `h` with limit infinity.
//!
//! The builder queries `b` at sequence terms that can be astronomically
//! large, so every family is evaluated symbolically: the only operations are
//! `floor(2^k / b(n))`, exact comparison of a rational against `b(n)`, and
//! the generalized inverse `h^{-1}(u) = inf { j >= 1 : h_j >= u }`. The
//! logarithmic families use the integer base-2 logarithm so that all results
//! stay exact.

use num::bigint::BigInt;
use num::{BigUint, One, Signed, Zero};

use crate::arith::{self, big_ln, big_to_f64, rational_to_f64, BigRational};
use crate::error::{Error, Result};

/// Cap on bit sizes materialized while evaluating a family.
const FAMILY_MAX_BITS: u64 = 1 << 26;

/// Nonincreasing positive sequence with limit 0, evaluated symbolically.
#[derive(Debug, Clone, PartialEq)]
pub enum DecayFamily {
    /// `b_N = N^(-e)` for a rational `e > 0`.
    PowerInv { exponent: BigRational },
    /// `b_N = 2^(-N)`.
    Exp2Inv,
    /// `b_N = 1 / (1 + floor(log2 N))`.
    InvLog2,
    /// Explicit table of `(N, b_N)` pairs; queries must hit a listed key.
    Table(Vec<(BigUint, BigRational)>),
}

impl DecayFamily {
    /// Parses `"power:<e>"`, `"exp2"`, or `"invlog2"`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(e) = t.strip_prefix("power:") {
            return Self::power(arith::parse_rational(e)?);
        }
        match t {
            "exp2" => Ok(Self::Exp2Inv),
            "invlog2" => Ok(Self::InvLog2),
            other => Err(Error::OutOfRange {
                what: format!("unknown decay family {other:?}"),
            }),
        }
    }

    /// `b_N = N^(-e)`; requires `e > 0`.
    pub fn power(exponent: BigRational) -> Result<Self> {
        if !exponent.is_positive() {
            return Err(Error::OutOfRange {
                what: format!("decay exponent {exponent} must be positive"),
            });
        }
        Ok(Self::PowerInv { exponent })
    }

    /// Builds a table family, validating keys strictly increasing and values
    /// positive nonincreasing.
    pub fn table(entries: Vec<(BigUint, BigRational)>) -> Result<Self> {
        for window in entries.windows(2) {
            let (ka, va) = &window[0];
            let (kb, vb) = &window[1];
            if kb <= ka {
                return Err(Error::OutOfRange {
                    what: format!("table keys must increase: {ka} then {kb}"),
                });
            }
            if vb > va {
                return Err(Error::NotDecreasing {
                    at_smaller: ka.to_string(),
                    at_larger: kb.to_string(),
                });
            }
        }
        if entries.iter().any(|(_, v)| !v.is_positive()) {
            return Err(Error::OutOfRange {
                what: "table decay values must be positive".to_string(),
            });
        }
        Ok(Self::Table(entries))
    }

    /// `floor(2^k / b(n))`, exactly.
    pub fn floor_shift_over(&self, k: u64, n: &BigUint) -> Result<BigUint> {
        let shift_bits = |extra: u64| -> Result<usize> {
            let total = k.saturating_add(extra);
            if total > FAMILY_MAX_BITS {
                return Err(Error::PrecisionExhausted {
                    what: format!("2^{k} / b({n})"),
                    max_bits: FAMILY_MAX_BITS,
                });
            }
            Ok(usize::try_from(total).expect("capped shift"))
        };
        match self {
            Self::PowerInv { exponent } => {
                // floor(2^k * n^(a/b)) = floor((n^a * 2^(k b))^(1/b))
                let (a, b) = arith::exponent_parts(exponent)?;
                let pow_bits = n.bits().saturating_mul(a).saturating_add(k.saturating_mul(b));
                if pow_bits > FAMILY_MAX_BITS {
                    return Err(Error::PrecisionExhausted {
                        what: format!("2^{k} * {n}^{exponent}"),
                        max_bits: FAMILY_MAX_BITS,
                    });
                }
                let a32 = u32::try_from(a).map_err(|_| Error::PrecisionExhausted {
                    what: format!("exponent {a}"),
                    max_bits: 32,
                })?;
                let shifted = n.pow(a32)
                    << usize::try_from(k.saturating_mul(b)).expect("capped shift");
                if b == 1 {
                    Ok(shifted)
                } else {
                    let b32 = u32::try_from(b).map_err(|_| Error::PrecisionExhausted {
                        what: format!("root index {b}"),
                        max_bits: 32,
                    })?;
                    Ok(shifted.nth_root(b32))
                }
            }
            Self::Exp2Inv => {
                let n64 = u64::try_from(n).map_err(|_| Error::PrecisionExhausted {
                    what: format!("2^{n}"),
                    max_bits: FAMILY_MAX_BITS,
                })?;
                Ok(BigUint::one() << shift_bits(n64)?)
            }
            Self::InvLog2 => {
                let log = if n.is_zero() { 0 } else { n.bits() - 1 };
                Ok((BigUint::one() << shift_bits(0)?) * BigUint::from(log + 1))
            }
            Self::Table(entries) => {
                let value = self.lookup(entries, n)?;
                let scaled = BigRational::new(
                    BigInt::from(BigUint::one() << shift_bits(0)?) * value.denom(),
                    value.numer().clone(),
                );
                Ok(scaled.floor().to_integer().to_biguint().expect("positive"))
            }
        }
    }

    /// Whether `b(n) >= q`, decided exactly.
    pub fn dominates(&self, q: &BigRational, n: &BigUint) -> Result<bool> {
        if q.is_negative() || q.is_zero() {
            return Ok(true);
        }
        let qn = q.numer().to_biguint().expect("positive rational");
        let qd = q.denom().to_biguint().expect("positive denominator");
        match self {
            Self::PowerInv { exponent } => {
                // q <= n^(-a/b)  <=>  qn^b * n^a <= qd^b
                let (a, b) = arith::exponent_parts(exponent)?;
                let a32 = u32::try_from(a).map_err(|_| Error::PrecisionExhausted {
                    what: format!("exponent {a}"),
                    max_bits: 32,
                })?;
                let b32 = u32::try_from(b).map_err(|_| Error::PrecisionExhausted {
                    what: format!("exponent {b}"),
                    max_bits: 32,
                })?;
                Ok(qn.pow(b32) * n.pow(a32) <= qd.pow(b32))
            }
            Self::Exp2Inv => {
                let n64 = u64::try_from(n).map_err(|_| Error::PrecisionExhausted {
                    what: format!("2^{n}"),
                    max_bits: FAMILY_MAX_BITS,
                })?;
                if n64 > FAMILY_MAX_BITS {
                    return Err(Error::PrecisionExhausted {
                        what: format!("2^{n}"),
                        max_bits: FAMILY_MAX_BITS,
                    });
                }
                Ok(qn << usize::try_from(n64).expect("capped shift") <= qd)
            }
            Self::InvLog2 => {
                let log = if n.is_zero() { 0 } else { n.bits() - 1 };
                Ok(qn * BigUint::from(log + 1) <= qd)
            }
            Self::Table(entries) => Ok(*q <= self.lookup(entries, n)?.clone()),
        }
    }

    /// Approximate value for report rendering.
    pub fn approx(&self, n: &BigUint) -> f64 {
        match self {
            Self::PowerInv { exponent } => {
                let e = rational_to_f64(exponent);
                (-e * big_ln(n)).exp()
            }
            Self::Exp2Inv => (-std::f64::consts::LN_2 * big_to_f64(n)).exp(),
            Self::InvLog2 => {
                let log = if n.is_zero() { 0 } else { n.bits() - 1 };
                1.0 / (log as f64 + 1.0)
            }
            Self::Table(entries) => self
                .lookup(entries, n)
                .map(rational_to_f64)
                .unwrap_or(f64::NAN),
        }
    }

    fn lookup<'a>(
        &self,
        entries: &'a [(BigUint, BigRational)],
        n: &BigUint,
    ) -> Result<&'a BigRational> {
        entries
            .iter()
            .find(|(key, _)| key == n)
            .map(|(_, v)| v)
            .ok_or_else(|| Error::TableMiss { key: n.to_string() })
    }
}

/// Nondecreasing positive sequence with limit infinity, queried only through
/// its generalized inverse.
#[derive(Debug, Clone, PartialEq)]
pub enum GrowthFamily {
    /// `h_N = N^e` for a rational `e > 0`.
    Power { exponent: BigRational },
    /// `h_N = floor(log2 N)`.
    Log2,
    /// `h_N = 2^N`.
    Exp2,
    /// Explicit table of `(N, h_N)` pairs with nondecreasing values.
    Table(Vec<(BigUint, BigRational)>),
}

impl GrowthFamily {
    /// Parses `"power:<e>"`, `"linear"`, `"log2"`, or `"exp2"`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(e) = t.strip_prefix("power:") {
            return Self::power(arith::parse_rational(e)?);
        }
        match t {
            "linear" => Self::power(BigRational::one()),
            "log2" => Ok(Self::Log2),
            "exp2" => Ok(Self::Exp2),
            other => Err(Error::OutOfRange {
                what: format!("unknown growth family {other:?}"),
            }),
        }
    }

    /// `h_N = N^e`; requires `e > 0`.
    pub fn power(exponent: BigRational) -> Result<Self> {
        if !exponent.is_positive() {
            return Err(Error::OutOfRange {
                what: format!("growth exponent {exponent} must be positive"),
            });
        }
        Ok(Self::Power { exponent })
    }

    /// Builds a table family, validating keys strictly increasing and values
    /// nondecreasing.
    pub fn table(entries: Vec<(BigUint, BigRational)>) -> Result<Self> {
        for window in entries.windows(2) {
            let (ka, va) = &window[0];
            let (kb, vb) = &window[1];
            if kb <= ka {
                return Err(Error::OutOfRange {
                    what: format!("table keys must increase: {ka} then {kb}"),
                });
            }
            if vb < va {
                return Err(Error::OutOfRange {
                    what: format!("growth table must be nondecreasing at {kb}"),
                });
            }
        }
        Ok(Self::Table(entries))
    }

    /// `h^{-1}(u) = inf { j >= 1 : h_j >= u }`, exactly.
    pub fn inverse(&self, u: u64) -> Result<BigUint> {
        let one = BigUint::one();
        if u <= 1 {
            // h is positive and either h_1 >= 1 holds or the infimum over a
            // positive nondecreasing sequence is still attained at 1 for
            // u <= h_1; families below all satisfy h_1 >= ... see per-arm.
        }
        match self {
            Self::Power { exponent } => {
                // smallest j with j^a >= u^b, i.e. ceil(u^(b/a)), at least 1.
                if u <= 1 {
                    return Ok(one);
                }
                let (a, b) = arith::exponent_parts(exponent)?;
                let j = arith::ceil_pow(&BigUint::from(u), b, a, FAMILY_MAX_BITS)?;
                Ok(j.max(one))
            }
            Self::Log2 => {
                // smallest j with floor(log2 j) >= u is 2^u (and 1 for u = 0).
                if u == 0 {
                    return Ok(one);
                }
                if u > FAMILY_MAX_BITS {
                    return Err(Error::PrecisionExhausted {
                        what: format!("2^{u}"),
                        max_bits: FAMILY_MAX_BITS,
                    });
                }
                Ok(one << usize::try_from(u).expect("capped shift"))
            }
            Self::Exp2 => {
                // smallest j >= 1 with 2^j >= u.
                if u <= 2 {
                    return Ok(one);
                }
                Ok(BigUint::from(64 - (u - 1).leading_zeros() as u64))
            }
            Self::Table(entries) => {
                let target = BigRational::from(BigInt::from(u));
                entries
                    .iter()
                    .find(|(_, v)| *v >= target)
                    .map(|(k, _)| k.clone())
                    .ok_or(Error::HInverseDiverged {
                        target: u,
                        cap: entries.len() as u64,
                    })
            }
        }
    }
}
