//! Experiment configuration: one JSON document describes the sequence, the
//! horizons, the simulation plan, and the analyses to run. Command-line
//! flags overlay individual fields; the effective configuration is echoed
//! in the run manifest and hashed so every output file can be traced to it.

use hsmix_core::arith::parse_rational;
use hsmix_core::families::{DecayFamily, GrowthFamily};
use hsmix_core::{
    build_recursive_sequence, build_theorem_a_prime_sequence, build_theorem_a_sequence,
    BlockSequence, Error, Result, SequenceOrigin, TheoremAPrimeInputs,
};
use num::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// How the block sequence is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    /// One of `closed_form`, `recursive`, `theorem_a_prime`, `explicit`.
    pub builder: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n1: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Decay family for the inductive builder, e.g. `power:1`, `exp2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    /// Growth family for the inductive builder, e.g. `linear`, `log2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    /// Explicit terms (decimal strings) for `builder = "explicit"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<String>>,
}

impl SequenceSpec {
    pub fn build(&self) -> Result<BlockSequence> {
        let depth = self.depth.unwrap_or(4);
        match self.builder.as_str() {
            "closed_form" => {
                let p = parse_rational(self.p.as_deref().ok_or(Error::InvalidConfig {
                    what: "closed_form builder needs p".into(),
                })?)?;
                build_theorem_a_sequence(&p, depth)
            }
            "recursive" => {
                let p = parse_rational(self.p.as_deref().ok_or(Error::InvalidConfig {
                    what: "recursive builder needs p".into(),
                })?)?;
                build_recursive_sequence(&p, self.n1.unwrap_or(2), depth)
            }
            "theorem_a_prime" => {
                let b = DecayFamily::parse(self.b.as_deref().ok_or(Error::InvalidConfig {
                    what: "theorem_a_prime builder needs a decay family b".into(),
                })?)?;
                let h = GrowthFamily::parse(self.h.as_deref().ok_or(Error::InvalidConfig {
                    what: "theorem_a_prime builder needs a growth family h".into(),
                })?)?;
                let mut inputs = TheoremAPrimeInputs::new(b, h);
                if let Some(n1) = self.n1 {
                    inputs = inputs.with_seed(n1);
                }
                build_theorem_a_prime_sequence(&inputs, depth)
            }
            "explicit" => {
                let terms = self.terms.as_ref().ok_or(Error::InvalidConfig {
                    what: "explicit builder needs terms".into(),
                })?;
                let parsed = terms
                    .iter()
                    .map(|t| {
                        t.parse::<BigUint>().map_err(|e| Error::InvalidConfig {
                            what: format!("term {t:?}: {e}"),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let p = parse_rational(self.p.as_deref().unwrap_or("2"))?;
                BlockSequence::from_parts(parsed, p, SequenceOrigin::Explicit)
            }
            other => Err(Error::InvalidConfig {
                what: format!("unknown builder {other:?}"),
            }),
        }
    }
}

/// Analyses the runner knows how to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Analysis {
    /// Sample batches only (CSV + summary), no diagnostic on top.
    #[serde(rename = "simulate")]
    Simulate,
    #[serde(rename = "variance")]
    Variance,
    #[serde(rename = "profile")]
    Profile,
    #[serde(rename = "ui")]
    Ui,
    #[serde(rename = "fdd")]
    Fdd,
    #[serde(rename = "tightness")]
    Tightness,
    #[serde(rename = "scaling")]
    Scaling,
    #[serde(rename = "mixing-bound")]
    MixingBound,
    #[serde(rename = "mixing-exact")]
    MixingExact,
}

impl Analysis {
    pub fn needs_simulation(self) -> bool {
        matches!(self, Analysis::Ui | Analysis::Simulate)
    }
}

/// Scaling options inside a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    /// `sigmaN`, `sqrtN`, `N`, or `power:<e>`.
    pub c: String,
}

/// Tightness (escape-of-mass) options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TightnessConfig {
    pub cutoff: usize,
    /// Rational threshold, e.g. `"0.3"` or `"3/10"`.
    pub threshold: String,
}

/// Exact tiny-scale dependence options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingExactConfig {
    pub n_k: u64,
    pub window: usize,
    pub gap: u64,
}

/// The experiment description; see `ExperimentConfig::validated`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sequence: SequenceSpec,
    pub horizons: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_k_active")]
    pub k_active: usize,
    pub analyses: Vec<Analysis>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<f64>,
    /// Exponent for the L^p observable attached to the ui analysis.
    #[serde(default = "default_lp")]
    pub lp_exponent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lags: Option<Vec<u64>>,
    #[serde(default = "default_fdd_coordinate")]
    pub fdd_coordinate: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tightness: Option<TightnessConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixing_exact: Option<MixingExactConfig>,
}

fn default_replicates() -> usize {
    10_000
}
fn default_k_active() -> usize {
    4
}
fn default_output_dir() -> String {
    std::env::var("HSMIX_OUT_DIR").unwrap_or_else(|_| "out".to_string())
}
fn default_formats() -> Vec<String> {
    vec!["json".into(), "csv".into(), "tsv".into()]
}
fn default_thresholds() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0]
}
fn default_lp() -> f64 {
    1.5
}
fn default_fdd_coordinate() -> usize {
    1
}

/// Flag-level overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub k_active: Option<usize>,
    pub horizons: Option<Vec<u64>>,
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig {
            what: format!("cannot read config {}: {e}", path.display()),
        })?;
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig {
            what: format!("config parse error: {e}"),
        })
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = Some(seed);
        }
        if let Some(replicates) = overrides.replicates {
            self.replicates = replicates;
        }
        if let Some(k_active) = overrides.k_active {
            self.k_active = k_active;
        }
        if let Some(horizons) = &overrides.horizons {
            self.horizons = horizons.clone();
        }
        if let Some(dir) = &overrides.output_dir {
            self.output_dir = dir.clone();
        }
    }

    /// Builds the sequence and checks cross-field invariants.
    pub fn validated(&self) -> Result<BlockSequence> {
        let seq = self.sequence.build()?;
        if self.horizons.is_empty() || self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig {
                what: "horizons must be nonempty and strictly increasing".into(),
            });
        }
        if self.analyses.is_empty() {
            return Err(Error::InvalidConfig {
                what: "at least one analysis must be requested".into(),
            });
        }
        if self.analyses.iter().any(|a| a.needs_simulation()) {
            if self.seed.is_none() {
                return Err(Error::InvalidConfig {
                    what: "a seed is required whenever a simulation analysis is requested".into(),
                });
            }
            if self.k_active == 0 || self.k_active > seq.depth() {
                return Err(Error::InvalidConfig {
                    what: format!("k_active must lie in 1..={}", seq.depth()),
                });
            }
        }
        for format in &self.formats {
            if !matches!(format.as_str(), "json" | "csv" | "tsv") {
                return Err(Error::InvalidConfig {
                    what: format!("unknown output format {format:?}"),
                });
            }
        }
        Ok(seq)
    }

    /// SHA-256 over the canonical JSON of the effective config. The output
    /// directory is not part of the experiment's identity: the same
    /// experiment written to two places must carry the same hash.
    pub fn hash(&self) -> String {
        let mut identity = self.clone();
        identity.output_dir = String::new();
        let canonical = serde_json::to_string(&identity).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Default log-spaced lag grid when none is configured: powers of two up
    /// to the largest horizon (at least 2^16).
    pub fn lag_grid(&self) -> Vec<u64> {
        if let Some(lags) = &self.lags {
            return lags.clone();
        }
        let max = self.horizons.last().copied().unwrap_or(1 << 16).max(1 << 16);
        let mut lags = Vec::new();
        let mut lag = 1u64;
        while lag <= max {
            lags.push(lag);
            lag *= 2;
        }
        lags
    }
}
