//! `hsmix`: build block sequences, run exact variance/mixing analyses and
//! sparse simulations, and emit reproducible report trees.
//!
//! Single-shot subcommands print JSON to stdout; `simulate` and `run` write
//! an output tree with a manifest; `report` collates a tree into one
//! summary document. Exit codes: 0 success, 1 configuration or validation
//! failure, 2 runtime failure (caps, horizons, precision).

mod config;
mod output;
mod runner;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hsmix_core::arith::parse_rational;
use hsmix_core::{
    asymptotic_ratio, beta_exact_tiny, beta_upper_bound, coordinate_nullity, escape_certificate,
    mass_profile, mixing_bound_report, scaling_dichotomy, total_variance, validate_condition_c,
    BlockSequence, Error, ScalingFamily, ScalingSpec, TinyBetaSpec,
};
use num::BigUint;
use serde::Deserialize;
use serde_json::json;

use config::{Analysis, ExperimentConfig, Overrides, SequenceSpec};

#[derive(Parser)]
#[command(
    name = "hsmix",
    version,
    about = "Exact analysis and sparse simulation of block-structured stationary processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or validate block sequences.
    Seq {
        #[command(subcommand)]
        command: SeqCommand,
    },
    /// Exact truncated variance report at one horizon.
    Variance {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        horizon: u64,
        /// Also report the ratio against N * i(N).
        #[arg(long)]
        ratio: bool,
    },
    /// Exact per-coordinate variance mass shares at one horizon.
    Profile {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        horizon: u64,
    },
    /// Sample batches to an output tree (CSV per horizon + JSON summary).
    Simulate {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<u64>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
        #[arg(long, default_value_t = 4)]
        k_active: usize,
        #[arg(long)]
        out_dir: Option<String>,
    },
    /// Diagnostics over exact moments and sampled batches.
    Diagnose {
        #[command(subcommand)]
        command: DiagnoseCommand,
    },
    /// Dependence-coefficient bounds and the exact tiny-scale oracle.
    Mixing {
        #[command(subcommand)]
        command: MixingCommand,
    },
    /// Collate a run's JSON reports into one summary document.
    Report {
        #[arg(long)]
        dir: PathBuf,
        /// Write the summary here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a full experiment from a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        k_active: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        horizons: Option<Vec<u64>>,
        #[arg(long)]
        out_dir: Option<String>,
    },
}

#[derive(Subcommand)]
enum SeqCommand {
    /// Build a sequence and print it as JSON.
    Build {
        #[command(flatten)]
        seq: SeqArgs,
        /// Write the sequence here as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the growth condition of explicit terms.
    Validate {
        /// JSON file holding {"terms": [...], "p": "a/b", ...}.
        #[arg(long)]
        file: PathBuf,
        /// Exponent override for the check.
        #[arg(long)]
        p: Option<String>,
    },
}

#[derive(Subcommand)]
enum DiagnoseCommand {
    /// Uniform-integrability tail profile plus the L^p observable.
    Ui {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        horizons: Vec<u64>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
        #[arg(long, default_value_t = 4)]
        k_active: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0, 16.0])]
        thresholds: Vec<f64>,
        #[arg(long, default_value_t = 1.5)]
        lp: f64,
    },
    /// Exact coordinate-share decay over a horizon grid.
    Fdd {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 1)]
        coordinate: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<u64>,
    },
    /// Escape-of-mass certificate over a horizon grid.
    Tightness {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value_t = 5)]
        cutoff: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<u64>,
        #[arg(long, default_value = "0.3")]
        threshold: String,
    },
    /// Scaling dichotomy against a normalizing sequence.
    Scaling {
        #[command(flatten)]
        seq: SeqArgs,
        /// Normalizer: sigmaN, sqrtN, N, or power:<e>.
        #[arg(long)]
        c: String,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<u64>,
    },
}

#[derive(Subcommand)]
enum MixingCommand {
    /// Per-lag upper bounds.
    Bound {
        #[command(flatten)]
        seq: SeqArgs,
        /// Single lag to evaluate.
        #[arg(long, conflicts_with = "lags")]
        lag: Option<u64>,
        /// Comma-separated lag grid (default: powers of two up to 65536).
        #[arg(long, value_delimiter = ',')]
        lags: Option<Vec<u64>>,
    },
    /// Exact windowed coefficient by tiny-scale enumeration.
    Exact {
        #[arg(long)]
        n_k: u64,
        #[arg(long, default_value_t = 0)]
        window: usize,
        #[arg(long)]
        gap: u64,
    },
}

/// Where the block sequence comes from: a JSON file or builder flags.
#[derive(Args)]
struct SeqArgs {
    /// Load the sequence from a JSON file.
    #[arg(long, conflicts_with_all = ["closed_form", "recursive", "a_prime"])]
    seq_file: Option<PathBuf>,
    /// Closed-form builder.
    #[arg(long)]
    closed_form: bool,
    /// Recursive slow-growth builder.
    #[arg(long)]
    recursive: bool,
    /// Inductive builder from decay/growth targets.
    #[arg(long)]
    a_prime: bool,
    /// Growth exponent, e.g. 2 or 11/10 or 1.5.
    #[arg(long)]
    p: Option<String>,
    /// Seed term for the recursive and inductive builders.
    #[arg(long)]
    n1: Option<u64>,
    /// Truncation depth K.
    #[arg(long)]
    depth: Option<usize>,
    /// Decay family for the inductive builder (power:<e>, exp2, invlog2).
    #[arg(long)]
    b: Option<String>,
    /// Growth family for the inductive builder (power:<e>, linear, log2, exp2).
    #[arg(long)]
    h: Option<String>,
}

impl SeqArgs {
    fn spec(&self) -> Result<SequenceSpec, Error> {
        let builder = match (self.closed_form, self.recursive, self.a_prime) {
            (true, false, false) => "closed_form",
            (false, true, false) => "recursive",
            (false, false, true) => "theorem_a_prime",
            (false, false, false) => {
                return Err(Error::InvalidConfig {
                    what: "choose a sequence source: --seq-file, --closed-form, --recursive, or --a-prime"
                        .into(),
                })
            }
            _ => {
                return Err(Error::InvalidConfig {
                    what: "choose exactly one of --closed-form, --recursive, --a-prime".into(),
                })
            }
        };
        Ok(SequenceSpec {
            builder: builder.to_string(),
            p: self.p.clone(),
            n1: self.n1,
            depth: self.depth,
            b: self.b.clone(),
            h: self.h.clone(),
            terms: None,
        })
    }

    fn resolve(&self) -> Result<BlockSequence, Error> {
        if let Some(path) = &self.seq_file {
            let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig {
                what: format!("cannot read {}: {e}", path.display()),
            })?;
            return BlockSequence::from_json(&text);
        }
        self.spec()?.build()
    }

    /// A canonical config spec for provenance: explicit terms of the
    /// resolved sequence.
    fn canonical_spec(&self, seq: &BlockSequence) -> SequenceSpec {
        SequenceSpec {
            builder: "explicit".to_string(),
            p: Some(seq.exponent().to_string()),
            n1: None,
            depth: None,
            b: None,
            h: None,
            terms: Some(seq.terms().iter().map(|t| t.to_string()).collect()),
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serializes")
    );
}

fn exit_code(error: &Error) -> i32 {
    match error {
        Error::HorizonExceeded { .. }
        | Error::CapExceeded { .. }
        | Error::PrecisionExhausted { .. }
        | Error::HInverseDiverged { .. } => 2,
        _ => 1,
    }
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(error) => {
            eprintln!("error: {error}");
            std::process::exit(exit_code(&error));
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Seq { command } => match command {
            SeqCommand::Build { seq, out } => {
                let sequence = seq.resolve()?;
                let text = sequence.to_json();
                if let Some(path) = out {
                    output::write_atomic(&path, text.as_bytes())?;
                }
                println!("{text}");
                Ok(())
            }
            SeqCommand::Validate { file, p } => {
                let text = std::fs::read_to_string(&file).map_err(|e| Error::InvalidConfig {
                    what: format!("cannot read {}: {e}", file.display()),
                })?;
                #[derive(Deserialize)]
                struct RawSequence {
                    terms: Vec<String>,
                    p: Option<String>,
                }
                let raw: RawSequence =
                    serde_json::from_str(&text).map_err(|e| Error::InvalidConfig {
                        what: format!("sequence JSON: {e}"),
                    })?;
                let terms = raw
                    .terms
                    .iter()
                    .map(|t| {
                        t.parse::<BigUint>().map_err(|e| Error::InvalidConfig {
                            what: format!("term {t:?}: {e}"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let exponent = parse_rational(
                    p.as_deref()
                        .or(raw.p.as_deref())
                        .ok_or(Error::InvalidConfig {
                            what: "no exponent: pass --p or include p in the file".into(),
                        })?,
                )?;
                let strictly_increasing = terms.windows(2).all(|w| w[1] > w[0]);
                let seed_ok = terms.first().map(|t| *t >= BigUint::from(2u32));
                let condition = validate_condition_c(&terms, &exponent)?;
                print_json(&json!({
                    "strictly_increasing": strictly_increasing,
                    "seed_at_least_2": seed_ok,
                    "condition_c": condition,
                    "pass": strictly_increasing
                        && seed_ok.unwrap_or(false)
                        && condition.pass,
                }));
                Ok(())
            }
        },
        Command::Variance { seq, horizon, ratio } => {
            let sequence = seq.resolve()?;
            let report = total_variance(&sequence, horizon)?;
            if ratio {
                let interval = asymptotic_ratio(&sequence, horizon)?;
                print_json(&json!({ "variance": report, "ratio": interval }));
            } else {
                print_json(&report);
            }
            Ok(())
        }
        Command::Profile { seq, horizon } => {
            let sequence = seq.resolve()?;
            print_json(&mass_profile(&sequence, horizon)?);
            Ok(())
        }
        Command::Simulate {
            seq,
            horizons,
            seed,
            replicates,
            k_active,
            out_dir,
        } => {
            let sequence = seq.resolve()?;
            let config = ExperimentConfig {
                sequence: seq.canonical_spec(&sequence),
                horizons,
                seed: Some(seed),
                replicates,
                k_active,
                analyses: vec![Analysis::Simulate],
                output_dir: out_dir
                    .unwrap_or_else(config::ExperimentConfig::default_dir),
                formats: vec!["json".into(), "csv".into()],
                thresholds: vec![2.0, 4.0, 8.0, 16.0],
                lp_exponent: 1.5,
                lags: None,
                fdd_coordinate: 1,
                tightness: None,
                scaling: None,
                mixing_exact: None,
            };
            let outputs = runner::run(&config)?;
            print_json(&json!({
                "output_dir": config.output_dir,
                "files": outputs,
            }));
            Ok(())
        }
        Command::Diagnose { command } => match command {
            DiagnoseCommand::Ui {
                seq,
                horizons,
                seed,
                replicates,
                k_active,
                thresholds,
                lp,
            } => {
                let sequence = seq.resolve()?;
                let sample_config = hsmix_core::SampleConfig {
                    seed,
                    replicates,
                    k_active,
                    horizons,
                    policy: hsmix_core::TruncationPolicy::Error,
                };
                let batches = hsmix_core::sample_batches(&sequence, &sample_config)?;
                let profile = hsmix_core::ui_tail_profile(&batches, &thresholds)?;
                let lp_report = hsmix_core::lp_profile(&batches, lp, 200)?;
                print_json(&json!({ "tail_profile": profile, "lp_profile": lp_report }));
                Ok(())
            }
            DiagnoseCommand::Fdd {
                seq,
                coordinate,
                grid,
            } => {
                let sequence = seq.resolve()?;
                print_json(&coordinate_nullity(&sequence, coordinate, &grid)?);
                Ok(())
            }
            DiagnoseCommand::Tightness {
                seq,
                cutoff,
                grid,
                threshold,
            } => {
                let sequence = seq.resolve()?;
                let threshold = parse_rational(&threshold)?;
                print_json(&escape_certificate(&sequence, cutoff, &grid, &threshold)?);
                Ok(())
            }
            DiagnoseCommand::Scaling { seq, c, grid } => {
                let sequence = seq.resolve()?;
                let spec = ScalingSpec {
                    family: ScalingFamily::parse(&c)?,
                    grid,
                };
                print_json(&scaling_dichotomy(&sequence, &spec)?);
                Ok(())
            }
        },
        Command::Mixing { command } => match command {
            MixingCommand::Bound { seq, lag, lags } => {
                let sequence = seq.resolve()?;
                if let Some(lag) = lag {
                    print_json(&beta_upper_bound(&sequence, lag)?);
                } else {
                    let grid = lags.unwrap_or_else(|| (0..=16).map(|e| 1u64 << e).collect());
                    print_json(&mixing_bound_report(&sequence, &grid)?);
                }
                Ok(())
            }
            MixingCommand::Exact { n_k, window, gap } => {
                let result = beta_exact_tiny(&TinyBetaSpec::new(n_k, window, gap))?;
                print_json(&result);
                Ok(())
            }
        },
        Command::Report { dir, out } => {
            let summary = runner::collate(&dir)?;
            let mut text =
                serde_json::to_string_pretty(&summary).expect("summary serializes");
            text.push('\n');
            if let Some(path) = out {
                output::write_atomic(&path, text.as_bytes())?;
            } else {
                print!("{text}");
            }
            Ok(())
        }
        Command::Run {
            config,
            seed,
            replicates,
            k_active,
            horizons,
            out_dir,
        } => {
            let mut experiment = ExperimentConfig::from_file(&config)?;
            experiment.apply(&Overrides {
                seed,
                replicates,
                k_active,
                horizons,
                output_dir: out_dir,
            });
            let outputs = runner::run(&experiment)?;
            print_json(&json!({
                "output_dir": experiment.output_dir,
                "config_hash": experiment.hash(),
                "files": outputs,
            }));
            Ok(())
        }
    }
}

// Referenced from the simulate arm; lives here to keep config.rs free of
// CLI-only helpers.
impl ExperimentConfig {
    fn default_dir() -> String {
        std::env::var("HSMIX_OUT_DIR").unwrap_or_else(|_| "out".to_string())
    }
}
