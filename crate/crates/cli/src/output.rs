//! Deterministic artifact emission: CSV time series, JSON summaries and a
//! manifest tying config hash, seed and artifact digests together.
//! Identical config and seed produce byte-identical files; the manifest
//! carries no timestamps.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub struct OutputWriter {
    dir: PathBuf,
    csv: bool,
    json: bool,
    artifacts: Vec<(String, String)>,
}

impl OutputWriter {
    pub fn new(dir: &Path, formats: &[String]) -> Result<OutputWriter, CliError> {
        fs::create_dir_all(dir)?;
        Ok(OutputWriter {
            dir: dir.to_path_buf(),
            csv: formats.iter().any(|f| f == "csv"),
            json: formats.iter().any(|f| f == "json"),
            artifacts: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn register(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.artifacts.push((name.to_string(), sha256_hex(bytes)));
        Ok(())
    }

    /// Write a time-series table. Columns are named with units in the
    /// header; every value uses the shortest round-trip float form.
    pub fn write_series(
        &mut self,
        stem: &str,
        header: &[&str],
        rows: &[Vec<f64>],
    ) -> Result<(), CliError> {
        if self.csv {
            let mut buf = Vec::new();
            writeln!(buf, "{}", header.join(","))?;
            for row in rows {
                let cells: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
                writeln!(buf, "{}", cells.join(","))?;
            }
            self.register(&format!("{stem}.csv"), &buf)?;
        }
        if self.json && !self.csv {
            let value = serde_json::json!({
                "columns": header,
                "rows": rows,
            });
            let text = serde_json::to_string_pretty(&value)?;
            self.register(&format!("{stem}.json"), text.as_bytes())?;
        }
        Ok(())
    }

    /// Write a JSON summary artifact.
    pub fn write_json<T: Serialize>(&mut self, stem: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value)?;
        self.register(&format!("{stem}.json"), text.as_bytes())?;
        Ok(())
    }

    /// Write the manifest: experiment name, resolved config (verbatim),
    /// its hash, the seed, the crate version and the artifact digests.
    pub fn write_manifest(
        &mut self,
        experiment: &str,
        config: &RunConfig,
        seed: u64,
    ) -> Result<(), CliError> {
        let config_json = serde_json::to_string_pretty(config)?;
        let mut artifacts = self.artifacts.clone();
        artifacts.sort();
        let manifest = serde_json::json!({
            "experiment": experiment,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "config_sha256": sha256_hex(config_json.as_bytes()),
            "config": serde_json::from_str::<serde_json::Value>(&config_json)?,
            "artifacts": artifacts
                .iter()
                .map(|(n, h)| serde_json::json!({ "name": n, "sha256": h }))
                .collect::<Vec<_>>(),
        });
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(self.dir.join("manifest.json"), text.as_bytes())?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    hex::encode(h.finalize())
}

/// Shortest round-trip decimal form; deterministic across runs.
pub fn format_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}
