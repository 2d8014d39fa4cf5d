//! Experiment configuration files (TOML) and the config hash stamped into
//! every output artifact.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantsMode {
    PaperConstants,
    Empirical,
}

impl From<ConstantsMode> for gibbslab::learner::ConstantsMode {
    fn from(m: ConstantsMode) -> Self {
        match m {
            ConstantsMode::PaperConstants => gibbslab::learner::ConstantsMode::Paper,
            ConstantsMode::Empirical => gibbslab::learner::ConstantsMode::Empirical,
        }
    }
}

/// On-disk experiment description. Kind-specific knobs live in `params`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Optional; must match the subcommand when present.
    #[serde(default)]
    pub kind: Option<String>,
    /// Model file path, resolved relative to the config file.
    pub family: Option<PathBuf>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_delta")]
    pub delta_prime: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Option<ConstantsMode>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: toml::Table,
}

fn default_beta() -> f64 {
    1.0
}
fn default_eps() -> f64 {
    0.1
}
fn default_delta() -> f64 {
    0.05
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: ExperimentConfig = toml::from_str(&text).context("parsing config")?;
        if let (Some(dir), Some(fam)) = (path.parent(), cfg.family.as_ref()) {
            if fam.is_relative() {
                cfg.family = Some(dir.join(fam));
            }
        }
        Ok(cfg)
    }

    pub fn require_kind(&self, expected: &str) -> Result<()> {
        if let Some(k) = &self.kind {
            if k != expected {
                bail!("config kind '{k}' does not match subcommand '{expected}'");
            }
        }
        Ok(())
    }

    pub fn family_file(&self) -> Result<gibbslab::lattice::ModelFile> {
        let path = self.family.as_ref().context("config needs a `family` model file")?;
        gibbslab::lattice::ModelFile::load(path).map_err(|e| anyhow::anyhow!("loading model {}: {e}", path.display()))
    }

    /// Stable hash over the resolved configuration.
    pub fn hash(&self, kind: &str) -> String {
        let canon = serde_json::json!({
            "kind": kind,
            "family": self.family.as_ref().map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned())),
            "beta": self.beta,
            "eps": self.eps,
            "delta": self.delta,
            "delta_prime": self.delta_prime,
            "seed": self.seed,
            "mode": self.mode,
            "params": params_canonical(&self.params),
        });
        let mut hasher = Sha256::new();
        hasher.update(canon.to_string().as_bytes());
        let digest = hasher.finalize();
        hex_prefix(&digest, 16)
    }

    // ---- typed access to `params` -------------------------------------

    pub fn param_f64(&self, key: &str) -> Option<f64> {
        match self.params.get(key) {
            Some(toml::Value::Float(v)) => Some(*v),
            Some(toml::Value::Integer(v)) => Some(*v as f64),
            _ => None,
        }
    }

    pub fn param_usize(&self, key: &str) -> Option<usize> {
        match self.params.get(key) {
            Some(toml::Value::Integer(v)) if *v >= 0 => Some(*v as usize),
            _ => None,
        }
    }

    pub fn param_str(&self, key: &str) -> Option<&str> {
        match self.params.get(key) {
            Some(toml::Value::String(s)) => Some(s.as_str()),
            _ => None,
        }
    }

    pub fn param_f64_list(&self, key: &str) -> Option<Vec<f64>> {
        match self.params.get(key) {
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Float(f) => Some(*f),
                    toml::Value::Integer(i) => Some(*i as f64),
                    _ => None,
                })
                .collect(),
            _ => None,
        }
    }

    pub fn param_u64_list(&self, key: &str) -> Option<Vec<u64>> {
        match self.params.get(key) {
            Some(toml::Value::Array(a)) => a
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) if *i >= 0 => Some(*i as u64),
                    _ => None,
                })
                .collect(),
            _ => None,
        }
    }
}

fn params_canonical(t: &toml::Table) -> serde_json::Value {
    // BTreeMap ordering makes the hash independent of original key order.
    let map: std::collections::BTreeMap<String, String> =
        t.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
    serde_json::to_value(map).unwrap_or(serde_json::Value::Null)
}

fn hex_prefix(bytes: &[u8], len: usize) -> String {
    bytes.iter().take(len).map(|b| format!("{b:02x}")).collect()
}
