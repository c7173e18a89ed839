//! Construction, exact moment analysis, and sparse Monte Carlo simulation of a
//! family of strictly stationary `l2`-valued processes built from sparse
//! ternary noise over geometrically growing block lengths.
//!
//! The process is parameterized by an increasing integer sequence `(n_k)`
//! satisfying the growth condition `n_{k+1} >= n_k^p` for some `p > 1`.
//! Coordinate `k` carries a moving-window sum of length `n_k` over i.i.d.
//! ternary noise with rare-event probability `u_k = n_k^{-2}`. The crate
//! provides:
//!
//! - [`construction`]: sequence builders and validation, noise laws, horizon
//!   indexing;
//! - [`moments`]: exact rational variances, weight profiles, PMF oracles,
//!   moment brackets;
//! - [`simulate`]: seeded, reproducible, event-driven sampling of partial
//!   sums, vectors, and coupled trajectories;
//! - [`analysis`]: uniform-integrability profiles, escape-of-mass and scaling
//!   diagnostics, and mixing-coefficient bounds with an exact tiny-scale
//!   oracle.
//!
//! All closed-form quantities are computed in arbitrary-precision rational
//! arithmetic; floating point appears only in Monte Carlo paths and report
//! rendering.

pub mod analysis;
pub mod arith;
pub mod construction;
pub mod error;
pub mod families;
pub mod moments;
pub mod serial;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};

/// Library version, surfaced in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use construction::{
    build_recursive_sequence, build_theorem_a_prime_sequence, build_theorem_a_sequence,
    noise_law, validate_condition_c, BlockSequence, HorizonIndex, ProcessSpec, SequenceOrigin,
    TernaryLaw, TheoremAPrimeInputs,
};
pub use moments::{
    asymptotic_ratio, component_variance, mass_profile, moment_check, partial_sum_pmf,
    rosenthal_bracket, total_variance, ExactPmf, RosenthalInput, VarianceReport, WeightProfile,
};
pub use simulate::{
    derive_stream, sample_batches, sample_component_sum, sample_trajectory, sample_vector,
    SampleBatch, SampleConfig, TruncationPolicy,
};
pub use analysis::{
    beta_exact_tiny, beta_upper_bound, coordinate_nullity, escape_certificate, lp_profile,
    mixing_bound_report, scaling_dichotomy, ui_tail_profile, MixingBoundReport, ScalingFamily,
    ScalingSpec, ScalingVerdict, TinyBetaSpec, UiProfile,
};
