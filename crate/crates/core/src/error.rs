//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by sequence construction, exact analysis, and simulation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// The growth exponent must satisfy `p > 1`.
    #[error("invalid exponent: p = {p} violates growth condition (C), which requires p > 1")]
    InvalidExponent { p: String },

    /// A closed-form builder produced a non-increasing pair of terms.
    #[error("closed-form sequence is not strictly increasing at k = {k}; use the recursive builder for slow growth")]
    NonIncreasing { k: usize },

    /// Block lengths start at 2 so that `u = n^{-2} < 1`.
    #[error("block length {n1} is below the minimum of 2")]
    SeedTooSmall { n1: String },

    /// A term or intermediate value exceeded the configured working precision.
    #[error("precision exhausted: {what} needs more than {max_bits} bits")]
    PrecisionExhausted { what: String, max_bits: u64 },

    /// `h^{-1}(u)` was not found below the configured search cap.
    #[error("h^-1({target}) not found below cap {cap}")]
    HInverseDiverged { target: u64, cap: u64 },

    /// The decay sequence `b` failed to be nonincreasing on queried points.
    #[error("decay sequence is not nonincreasing: b({at_larger}) > b({at_smaller})")]
    NotDecreasing { at_smaller: String, at_larger: String },

    /// A sequence violates the growth condition `n_(k+1) >= n_k^p`.
    #[error("growth condition (C) fails at k = {k}: n_(k+1) < n_k^p for p = {p}")]
    ConditionCViolated { k: usize, p: String },

    /// The horizon is not bracketed by the truncated sequence.
    #[error("horizon {horizon} is not below the last retained term n_K = {last_term}")]
    HorizonExceeded { horizon: u64, last_term: String },

    /// `i(N)` is zero, so a ratio against `N * i(N)` is undefined.
    #[error("horizon {horizon} is below n_1; i(N) = 0 and the requested ratio is undefined")]
    UndefinedIndex { horizon: u64 },

    /// A probability or parameter fell outside its admissible range.
    #[error("out of range: {what}")]
    OutOfRange { what: String },

    /// An enumeration or materialization exceeded its configured cap.
    #[error("cap exceeded: {what} = {value} is above the cap {cap}")]
    CapExceeded { what: String, value: u64, cap: u64 },

    /// An operation was asked to aggregate an empty batch.
    #[error("empty batch: {what}")]
    EmptyBatch { what: String },

    /// An explicit table was queried at a point it does not contain.
    #[error("explicit table has no entry for {key}")]
    TableMiss { key: String },

    /// Invalid configuration for a simulation or analysis run.
    #[error("invalid configuration: {what}")]
    InvalidConfig { what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
