//! Orchestrates a configured experiment: builds the sequence, runs the
//! requested analyses in dependency order (construction, exact moments,
//! simulation, diagnostics), and writes one JSON report per analysis plus
//! tabular data files and a manifest. Identical configurations produce
//! byte-identical output trees.

use std::path::{Path, PathBuf};

use hsmix_core::arith::parse_rational;
use hsmix_core::serial::tsv_table;
use hsmix_core::{
    coordinate_nullity, escape_certificate, lp_profile, mass_profile, mixing_bound_report,
    sample_batches, scaling_dichotomy, total_variance, ui_tail_profile, Error,
    Result, SampleBatch, SampleConfig, ScalingFamily, ScalingSpec, TinyBetaSpec,
    TruncationPolicy,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{Analysis, ExperimentConfig};
use crate::output::{tagged_table, wrapped_json, write_atomic};

#[derive(Serialize)]
struct Manifest<'a> {
    config_hash: &'a str,
    seed: Option<u64>,
    versions: Versions,
    effective_config: &'a ExperimentConfig,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct Versions {
    core: &'static str,
    cli: &'static str,
}

/// Runs every requested analysis and writes the output tree. Returns the
/// list of files written (relative to the output directory).
pub fn run(config: &ExperimentConfig) -> Result<Vec<String>> {
    let seq = config.validated()?;
    let hash = config.hash();
    let out_dir = PathBuf::from(&config.output_dir);
    let mut outputs: Vec<String> = Vec::new();

    let json_on = config.formats.iter().any(|f| f == "json");
    let csv_on = config.formats.iter().any(|f| f == "csv");
    let tsv_on = config.formats.iter().any(|f| f == "tsv");

    let emit = |name: &str, contents: String, outputs: &mut Vec<String>| -> Result<()> {
        write_atomic(&out_dir.join(name), contents.as_bytes())?;
        outputs.push(name.to_string());
        Ok(())
    };

    // The sequence itself is always part of the tree.
    emit(
        "sequence.json",
        wrapped_json(&hash, config.seed, &seq),
        &mut outputs,
    )?;

    // Simulation runs once; every analysis that needs batches shares them.
    let batches: Option<Vec<SampleBatch>> =
        if config.analyses.iter().any(|a| a.needs_simulation()) {
            let sample_config = SampleConfig {
                seed: config.seed.expect("validated"),
                replicates: config.replicates,
                k_active: config.k_active,
                horizons: config.horizons.clone(),
                policy: TruncationPolicy::Error,
            };
            let batches = sample_batches(&seq, &sample_config)?;
            if csv_on {
                for batch in &batches {
                    emit(
                        &format!("batch_N{}.csv", batch.horizon),
                        tagged_table(&hash, config.seed, &batch.to_csv()),
                        &mut outputs,
                    )?;
                }
            }
            if json_on {
                let summaries: Vec<_> = batches.iter().map(|b| b.summary()).collect();
                emit(
                    "batches.json",
                    wrapped_json(&hash, config.seed, summaries),
                    &mut outputs,
                )?;
            }
            Some(batches)
        } else {
            None
        };

    for analysis in &config.analyses {
        match analysis {
            // Batches are already on disk; nothing to add.
            Analysis::Simulate => {}
            Analysis::Variance => {
                let reports = config
                    .horizons
                    .iter()
                    .map(|&n| total_variance(&seq, n))
                    .collect::<Result<Vec<_>>>()?;
                if csv_on {
                    for report in &reports {
                        emit(
                            &format!("variance_N{}.csv", report.horizon),
                            tagged_table(&hash, config.seed, &report.to_csv()),
                            &mut outputs,
                        )?;
                    }
                }
                if json_on {
                    emit(
                        "variance.json",
                        wrapped_json(&hash, config.seed, &reports),
                        &mut outputs,
                    )?;
                }
            }
            Analysis::Profile => {
                let profiles = config
                    .horizons
                    .iter()
                    .map(|&n| mass_profile(&seq, n))
                    .collect::<Result<Vec<_>>>()?;
                if json_on {
                    emit(
                        "profile.json",
                        wrapped_json(&hash, config.seed, &profiles),
                        &mut outputs,
                    )?;
                }
                if tsv_on {
                    for profile in &profiles {
                        let rows: Vec<(String, f64)> = profile
                            .shares
                            .iter()
                            .enumerate()
                            .map(|(i, s)| ((i + 1).to_string(), s.value()))
                            .collect();
                        emit(
                            &format!("profile_N{}.tsv", profile.horizon),
                            tagged_table(&hash, config.seed, &tsv_table(("k", "share"), &rows)),
                            &mut outputs,
                        )?;
                    }
                }
            }
            Analysis::Ui => {
                let batches = batches.as_ref().expect("simulation ran");
                let profile = ui_tail_profile(batches, &config.thresholds)?;
                let lp = lp_profile(batches, config.lp_exponent, 200)?;
                if json_on {
                    emit(
                        "ui.json",
                        wrapped_json(
                            &hash,
                            config.seed,
                            json!({ "tail_profile": profile, "lp_profile": lp }),
                        ),
                        &mut outputs,
                    )?;
                }
                if tsv_on {
                    emit(
                        "ui.tsv",
                        tagged_table(&hash, config.seed, &profile.to_tsv()),
                        &mut outputs,
                    )?;
                }
            }
            Analysis::Fdd => {
                let report = coordinate_nullity(&seq, config.fdd_coordinate, &config.horizons)?;
                if json_on {
                    emit(
                        "fdd.json",
                        wrapped_json(&hash, config.seed, &report),
                        &mut outputs,
                    )?;
                }
                if tsv_on {
                    emit(
                        "fdd.tsv",
                        tagged_table(&hash, config.seed, &report.to_tsv()),
                        &mut outputs,
                    )?;
                }
            }
            Analysis::Tightness => {
                let settings = config.tightness.as_ref().ok_or(Error::InvalidConfig {
                    what: "tightness analysis needs a tightness section".into(),
                })?;
                let threshold = parse_rational(&settings.threshold)?;
                let report =
                    escape_certificate(&seq, settings.cutoff, &config.horizons, &threshold)?;
                if json_on {
                    emit(
                        "tightness.json",
                        wrapped_json(&hash, config.seed, &report),
                        &mut outputs,
                    )?;
                }
                if tsv_on {
                    emit(
                        "tightness.tsv",
                        tagged_table(&hash, config.seed, &report.to_tsv()),
                        &mut outputs,
                    )?;
                }
            }
            Analysis::Scaling => {
                let settings = config.scaling.as_ref().ok_or(Error::InvalidConfig {
                    what: "scaling analysis needs a scaling section".into(),
                })?;
                let spec = ScalingSpec {
                    family: ScalingFamily::parse(&settings.c)?,
                    grid: config.horizons.clone(),
                };
                let report = scaling_dichotomy(&seq, &spec)?;
                if json_on {
                    emit(
                        "scaling.json",
                        wrapped_json(&hash, config.seed, &report),
                        &mut outputs,
                    )?;
                }
                if tsv_on {
                    emit(
                        "scaling.tsv",
                        tagged_table(&hash, config.seed, &report.to_tsv()),
                        &mut outputs,
                    )?;
                }
            }
            Analysis::MixingBound => {
                let report = mixing_bound_report(&seq, &config.lag_grid())?;
                if json_on {
                    emit(
                        "mixing_bound.json",
                        wrapped_json(&hash, config.seed, &report),
                        &mut outputs,
                    )?;
                }
                if tsv_on {
                    emit(
                        "mixing_bound.tsv",
                        tagged_table(&hash, config.seed, &report.to_tsv()),
                        &mut outputs,
                    )?;
                }
            }
            Analysis::MixingExact => {
                let settings = config.mixing_exact.as_ref().ok_or(Error::InvalidConfig {
                    what: "mixing-exact analysis needs a mixing_exact section".into(),
                })?;
                let spec = TinyBetaSpec::new(settings.n_k, settings.window, settings.gap);
                let result = hsmix_core::beta_exact_tiny(&spec)?;
                if json_on {
                    emit(
                        "mixing_exact.json",
                        wrapped_json(&hash, config.seed, &result),
                        &mut outputs,
                    )?;
                }
            }
        }
    }

    outputs.sort();
    let manifest = Manifest {
        config_hash: &hash,
        seed: config.seed,
        versions: Versions {
            core: hsmix_core::VERSION,
            cli: env!("CARGO_PKG_VERSION"),
        },
        effective_config: config,
        outputs: outputs.clone(),
    };
    let mut manifest_text =
        serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    manifest_text.push('\n');
    write_atomic(&out_dir.join("manifest.json"), manifest_text.as_bytes())?;
    outputs.push("manifest.json".to_string());
    Ok(outputs)
}

/// Collates the JSON reports of a finished run into one summary document,
/// refusing trees whose files carry mismatched config hashes.
pub fn collate(dir: &Path) -> Result<serde_json::Value> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| Error::InvalidConfig {
            what: format!("cannot read {}: {e}", dir.display()),
        })?
        .filter_map(|entry| {
            let name = entry.ok()?.file_name().to_string_lossy().to_string();
            (name.ends_with(".json") && name != "manifest.json").then_some(name)
        })
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(Error::EmptyBatch {
            what: format!("no reports under {}", dir.display()),
        });
    }

    let mut sections = serde_json::Map::new();
    let mut hash: Option<String> = None;
    let mut seed: Option<serde_json::Value> = None;
    for name in &names {
        let text = std::fs::read_to_string(dir.join(name)).map_err(|e| Error::InvalidConfig {
            what: format!("cannot read {name}: {e}"),
        })?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig {
                what: format!("{name} is not valid JSON: {e}"),
            })?;
        let file_hash = value
            .get("config_hash")
            .and_then(|h| h.as_str())
            .ok_or_else(|| Error::InvalidConfig {
                what: format!("{name} carries no config hash"),
            })?
            .to_string();
        match &hash {
            None => hash = Some(file_hash),
            Some(existing) if *existing != file_hash => {
                return Err(Error::InvalidConfig {
                    what: format!(
                        "config hash mismatch: {name} has {file_hash}, previous files have {existing}"
                    ),
                });
            }
            _ => {}
        }
        if seed.is_none() {
            seed = value.get("seed").cloned();
        }
        sections.insert(name.clone(), value);
    }

    Ok(json!({
        "config_hash": hash.expect("at least one report"),
        "seed": seed,
        "files": names,
        "sections": sections,
    }))
}
