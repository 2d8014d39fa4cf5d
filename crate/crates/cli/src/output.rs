//! Artifact writers: CSV with '#'-prefixed metadata lines, JSON reports, and
//! structured error records. CSVs are built in memory and written whole, so
//! failures never leave partial tables behind.

use anyhow::{Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub struct CsvBuilder {
    buf: String,
    columns: usize,
}

impl CsvBuilder {
    /// `meta` lines are emitted as `# key: value`; each column carries a
    /// `# column <name>: <definition>` line.
    pub fn new(meta: &[(&str, String)], columns: &[(&str, &str)]) -> Self {
        let mut buf = String::new();
        for (k, v) in meta {
            let _ = writeln!(buf, "# {k}: {v}");
        }
        for (name, def) in columns {
            let _ = writeln!(buf, "# column {name}: {def}");
        }
        let header: Vec<&str> = columns.iter().map(|(n, _)| *n).collect();
        let _ = writeln!(buf, "{}", header.join(","));
        Self { buf, columns: columns.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    pub fn contents(&self) -> &str {
        &self.buf
    }
}

/// Float formatting used in artifacts: shortest round-trip representation,
/// which is deterministic across runs and thread counts.
pub fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}

pub struct OutputDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating output dir {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write_text(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write_bytes(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write_json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).context("serializing JSON")?;
        self.write_text(name, &(text + "\n"))
    }

    /// Run manifest listing every artifact with the config hash and seed.
    pub fn finish(self, kind: &str, config_hash: &str, seed: u64) -> Result<()> {
        let manifest = serde_json::json!({
            "kind": kind,
            "config_hash": config_hash,
            "seed": seed,
            "artifacts": self.written,
        });
        let text = serde_json::to_string_pretty(&manifest).context("serializing run manifest")?;
        let path = self.dir.join("run.json");
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    /// Structured failure record; replaces all other outputs.
    pub fn write_error(dir: &Path, kind: &str, config_hash: &str, seed: u64, error: &str) {
        let record = serde_json::json!({
            "kind": kind,
            "config_hash": config_hash,
            "seed": seed,
            "error": error,
        });
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(
                dir.join("error.json"),
                serde_json::to_string_pretty(&record).unwrap_or_default() + "\n",
            );
        }
    }
}
