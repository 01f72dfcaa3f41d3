//! Output directory: CSV and JSON files plus the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writer that remembers every file it produced.
#[derive(Debug)]
pub struct OutputDir {
    pub dir: PathBuf,
    files: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, name: &str) -> PathBuf {
        let p = self.path(name);
        if !self.files.contains(&p) {
            self.files.push(p.clone());
        }
        p
    }

    pub fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> Result<PathBuf> {
        let p = self.record(name);
        let mut w =
            csv::Writer::from_path(&p).with_context(|| format!("creating {}", p.display()))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(p)
    }

    /// CSV with an explicit header, for rows that are plain number lists.
    pub fn csv_columns(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl Iterator<Item = Vec<f64>>,
    ) -> Result<PathBuf> {
        let p = self.record(name);
        let mut w =
            csv::Writer::from_path(&p).with_context(|| format!("creating {}", p.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(p)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let p = self.record(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<PathBuf> {
        let p = self.record(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    /// `manifest.json`: config and its hash, version, seed, tolerances and a
    /// digest of every output. Contains nothing run-dependent.
    pub fn manifest(
        &mut self,
        config: &ExperimentConfig,
        tolerances: serde_json::Value,
        degraded: bool,
    ) -> Result<PathBuf> {
        let config_text = serde_json::to_string(config)?;
        let mut outputs = Vec::new();
        for f in &self.files {
            let bytes = fs::read(f)?;
            let name = f
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            outputs.push(json!({ "file": name, "sha256": sha256_hex(&bytes) }));
        }
        let manifest = json!({
            "experiment": config.experiment.name(),
            "config_sha256": sha256_hex(config_text.as_bytes()),
            "config": config,
            "code_version": env!("CARGO_PKG_VERSION"),
            "seed": config.seed,
            "tolerances": tolerances,
            "degraded": degraded,
            "outputs": outputs,
        });
        let p = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&p, text)?;
        Ok(p)
    }
}

/// Reads named numeric columns back from a CSV file. Empty cells become NaN.
pub fn read_columns(path: &Path, names: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = r.headers()?.clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == *n)
                .with_context(|| format!("{} has no column {n}", path.display()))
        })
        .collect::<Result<_>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for rec in r.records() {
        let rec = rec?;
        for (c, &i) in idx.iter().enumerate() {
            let cell = rec.get(i).unwrap_or("");
            cols[c].push(if cell.is_empty() {
                f64::NAN
            } else {
                cell.parse()
                    .with_context(|| format!("bad number {cell:?}"))?
            });
        }
    }
    Ok(cols)
}
