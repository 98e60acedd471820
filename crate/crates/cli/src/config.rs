//! `arxivroll.toml` tool settings and `model.toml` model settings.
//!
//! Precedence everywhere: command-line flags, then the file, then built-in
//! defaults.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use arxivroll::harness::ModelConfig;
use arxivroll::scpgen::FragmentConfig;
use serde::Deserialize;

pub const DEFAULT_CONFIG_FILE: &str = "arxivroll.toml";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolConfig {
    pub corpus_root: Option<PathBuf>,
    pub results_root: Option<PathBuf>,
    pub registry_path: Option<PathBuf>,
    pub rs_root: Option<PathBuf>,
    pub log_level: Option<String>,
    #[serde(default)]
    pub fragment: FragmentConfig,
    /// Defaults for every model file, same keys as `model.toml`.
    #[serde(default)]
    pub model: toml::Table,
}

impl ToolConfig {
    /// Loads `path`, or `arxivroll.toml` in the working directory when no
    /// path is given and that file exists. Relative paths inside the file
    /// are taken relative to the file.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let path = match path {
            Some(p) => p.to_path_buf(),
            None => {
                let p = PathBuf::from(DEFAULT_CONFIG_FILE);
                if !p.exists() {
                    return Ok(Self::default());
                }
                p
            }
        };
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: ToolConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.fragment
            .validate()
            .with_context(|| format!("config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        for p in [
            &mut cfg.corpus_root,
            &mut cfg.results_root,
            &mut cfg.registry_path,
            &mut cfg.rs_root,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn results_root(&self, flag: Option<&Path>) -> PathBuf {
        pick(flag, self.results_root.as_deref(), "results")
    }

    pub fn registry_path(&self, flag: Option<&Path>) -> PathBuf {
        pick(flag, self.registry_path.as_deref(), "registry.log")
    }

    pub fn rs_root(&self, flag: Option<&Path>) -> PathBuf {
        pick(flag, self.rs_root.as_deref(), "rs")
    }

    /// Reads a model file and lays it over the `[model]` defaults.
    pub fn model_config(&self, path: &Path) -> Result<ModelConfig> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading model config {}", path.display()))?;
        let file: toml::Table = toml::from_str(&text)
            .with_context(|| format!("parsing model config {}", path.display()))?;
        let mut merged = self.model.clone();
        merge(&mut merged, file);
        let cfg: ModelConfig = toml::Value::Table(merged)
            .try_into()
            .with_context(|| format!("model config {}", path.display()))?;
        Ok(cfg)
    }
}

fn pick(flag: Option<&Path>, file: Option<&Path>, default: &str) -> PathBuf {
    flag.or(file)
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(default))
}

/// Deep merge: tables merge key by key, anything else in `over` replaces.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
