//! Output-tree plumbing: atomic file writes and provenance-wrapped reports.
//! Every file lands via write-temp-then-rename, and every report embeds the
//! config hash and seed so trees can be audited and collated safely.

use std::fs;
use std::path::{Path, PathBuf};

use hsmix_core::{Error, Result};
use serde::Serialize;

/// Writes bytes atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().ok_or_else(|| Error::InvalidConfig {
        what: format!("output path {} has no parent", path.display()),
    })?;
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut tmp = PathBuf::from(dir);
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidConfig {
            what: format!("output path {} has no file name", path.display()),
        })?
        .to_string_lossy()
        .to_string();
    tmp.push(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| io_error(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_error(path, e))?;
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidConfig {
        what: format!("io error at {}: {e}", path.display()),
    }
}

/// A report payload wrapped with its provenance.
#[derive(Serialize)]
pub struct WrappedReport<'a, T: Serialize> {
    pub config_hash: &'a str,
    pub seed: Option<u64>,
    pub report: T,
}

/// Serializes a provenance-wrapped report to pretty JSON.
pub fn wrapped_json<T: Serialize>(config_hash: &str, seed: Option<u64>, report: T) -> String {
    let wrapped = WrappedReport {
        config_hash,
        seed,
        report,
    };
    let mut text = serde_json::to_string_pretty(&wrapped).expect("report serializes");
    text.push('\n');
    text
}

/// Prepends the provenance comment to tabular (CSV/TSV) data.
pub fn tagged_table(config_hash: &str, seed: Option<u64>, body: &str) -> String {
    let seed_text = seed.map_or("none".to_string(), |s| s.to_string());
    format!("# config_hash={config_hash} seed={seed_text}\n{body}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("file.json");
        write_atomic(&path, b"{}").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"{}");
        // No temp file left behind.
        let leftovers: Vec<_> = fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(leftovers.len(), 1);
    }

    #[test]
    fn wrappers_carry_provenance() {
        let json = wrapped_json("abc", Some(7), serde_json::json!({"x": 1}));
        assert!(json.contains("\"config_hash\": \"abc\""));
        assert!(json.contains("\"seed\": 7"));
        let table = tagged_table("abc", None, "a,b\n1,2\n");
        assert!(table.starts_with("# config_hash=abc seed=none\n"));
    }
}
