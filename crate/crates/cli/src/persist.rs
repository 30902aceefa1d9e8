//! Deterministic persistence: CSV for numeric series (header row, fixed
//! column order, shortest round-trip decimal floats) and JSON for
//! manifests and catalogs (struct-declaration key order).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// A numeric series with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(headers: &[&str]) -> Self {
        CsvTable {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.headers.len(), "column count mismatch");
        self.rows.push(row);
    }

    /// Renders the table. Rust's `{}` float formatting is the shortest
    /// decimal that round-trips, so re-parsing reproduces the values
    /// bit-for-bit.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.headers.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<CsvTable> {
        let mut lines = text.lines();
        let headers: Vec<String> = lines
            .next()
            .context("empty CSV: missing header row")?
            .split(',')
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|c| {
                    c.parse::<f64>()
                        .with_context(|| format!("row {}: bad float {c:?}", i + 1))
                })
                .collect::<Result<_>>()?;
            if row.len() != headers.len() {
                anyhow::bail!("row {} has {} cells, expected {}", i + 1, row.len(), headers.len());
            }
            rows.push(row);
        }
        Ok(CsvTable { headers, rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render().as_bytes())
    }
}

/// One named stage of a run, with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub stage: String,
    /// Wall-clock duration; excluded from the byte-determinism guarantee.
    pub seconds: f64,
    pub diagnostics: Vec<(String, String)>,
}

/// Manifest emitted for every run, success or failure. Field order is the
/// serialization order, so the file has a stable key order.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub success: bool,
    pub error: Option<String>,
    pub stages: Vec<StageReport>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            artifact: "kinlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            success: false,
            error: None,
            stages: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn stage(&mut self, name: &str, seconds: f64, diagnostics: Vec<(String, String)>) {
        self.stages.push(StageReport {
            stage: name.into(),
            seconds,
            diagnostics,
        });
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).context("serializing manifest")?;
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

/// Resolves the output directory: explicit flag, else the `KINLAB_OUT`
/// environment root, else ./kinlab-out, and creates it.
pub fn resolve_out_dir(flag: Option<&Path>, subcommand: &str) -> Result<PathBuf> {
    let dir = match flag {
        Some(p) => p.to_path_buf(),
        None => {
            let root = std::env::var_os("KINLAB_OUT")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("kinlab-out"));
            root.join(subcommand)
        }
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Idempotent overwrite via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
