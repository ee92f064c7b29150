//! Artifact writing: per-table CSV files and a JSON manifest named
//! `<command>_<design-hash>`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::circuit::{CircuitDesign, CouplingConvention};
use crate::config::{ConfigFile, OutputFormat};
use crate::observables::WignerGrid;
use crate::sweep::{PointStatus, SweepTable};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const OUT_DIR_ENV: &str = "MASERSIM_OUT";

/// First 12 hex digits of the SHA-256 of the canonical JSON encoding of the
/// design and coupling convention.
pub fn design_hash(design: &CircuitDesign, convention: CouplingConvention) -> String {
    let canonical = serde_json::to_vec(&json!({ "design": design, "convention": convention })).expect("design serializes");
    let digest = Sha256::digest(&canonical);
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// Output directory: `--out-dir`, then `MASERSIM_OUT`, then the config.
pub fn resolve_out_dir(flag: Option<&Path>, env: Option<&str>, config: &str) -> PathBuf {
    match (flag, env) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(e)) if !e.is_empty() => PathBuf::from(e),
        _ => PathBuf::from(config),
    }
}

#[derive(Debug, Clone, Serialize)]
struct TableEntry<'a> {
    name: &'a str,
    file: Option<String>,
    axes: &'a [crate::sweep::Axis],
    columns: &'a [crate::sweep::Column],
    points: usize,
    failures: Vec<Value>,
    excluded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<&'a [crate::sweep::SweepRow]>,
}

pub struct ArtifactWriter {
    dir: PathBuf,
    format: OutputFormat,
    command: String,
    hash: String,
    tables: Vec<Value>,
    extras: Vec<(String, Value)>,
    files: Vec<PathBuf>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path, format: OutputFormat, command: &str, design: &CircuitDesign, convention: CouplingConvention) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            format,
            command: command.into(),
            hash: design_hash(design, convention),
            tables: Vec::new(),
            extras: Vec::new(),
            files: Vec::new(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join(format!("{}_{}.json", self.command, self.hash))
    }

    fn csv_path(&self, stem: &str) -> PathBuf {
        self.dir.join(format!("{stem}_{}.csv", self.hash))
    }

    /// Writes the CSV (when enabled) and records the table for the manifest.
    pub fn add_table(&mut self, table: &SweepTable) -> io::Result<()> {
        let file = if self.format.csv() {
            let path = self.csv_path(&table.name);
            table.write_csv(fs::File::create(&path)?).map_err(io::Error::other)?;
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned());
            self.files.push(path);
            name
        } else {
            None
        };
        let failures = table
            .rows
            .iter()
            .filter_map(|r| match &r.status {
                PointStatus::Failed { kind, message } => Some(json!({ "index": r.index, "kind": kind, "message": message })),
                _ => None,
            })
            .collect();
        let entry = TableEntry {
            name: &table.name,
            file,
            axes: &table.axes,
            columns: &table.columns,
            points: table.rows.len(),
            failures,
            excluded: table.rows.iter().filter(|r| matches!(r.status, PointStatus::Excluded { .. })).count(),
            rows: self.format.json().then_some(table.rows.as_slice()),
        };
        self.tables.push(serde_json::to_value(entry).expect("table serializes"));
        Ok(())
    }

    pub fn add_wigner(&mut self, label: &str, grid: &WignerGrid) -> io::Result<()> {
        let file = if self.format.csv() {
            let path = self.csv_path(&format!("{}-{label}", self.command));
            grid.write_csv(fs::File::create(&path)?).map_err(io::Error::other)?;
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned());
            self.files.push(path);
            name
        } else {
            None
        };
        let mut value = json!({
            "label": label,
            "file": file,
            "points": grid.re_axis.len(),
            "extent": grid.re_axis.last(),
            "normalization": grid.normalization,
            "warnings": grid.warnings,
        });
        if self.format.json() {
            value["re_axis"] = json!(grid.re_axis);
            value["im_axis"] = json!(grid.im_axis);
            value["values"] = json!(grid.values);
        }
        self.extras.push((format!("wigner:{label}"), value));
        Ok(())
    }

    /// Extra manifest entry (e.g. a steady-state record).
    pub fn add_value(&mut self, key: &str, value: Value) {
        self.extras.push((key.into(), value));
    }

    /// Writes `<command>_<hash>.json` and returns its path.
    pub fn finish(mut self, config: &ConfigFile, full_scale: bool, summary: Value) -> io::Result<PathBuf> {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut manifest = json!({
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "command": self.command,
            "design_hash": self.hash,
            "code_version": env!("CARGO_PKG_VERSION"),
            "created_unix": created,
            "full_scale": full_scale,
            "format": self.format,
            "config": config,
            "tables": self.tables,
            "summary": summary,
        });
        for (k, v) in self.extras.drain(..) {
            manifest[k] = v;
        }
        let path = self.manifest_path();
        let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.files.push(path.clone());
        Ok(path)
    }
}
