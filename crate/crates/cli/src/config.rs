//! Flat TOML run manifests. Keys mirror the long flag names; a flag given on
//! the command line always wins over the file, and the file over defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;

pub const WORKERS_ENV: &str = "LORENTZ_BG_WORKERS";

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub rho: Option<f64>,
    pub n: Option<usize>,
    pub samples: Option<usize>,
    pub threshold: Option<f64>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub format: Option<String>,
    pub start: Option<String>,
    pub max_flight: Option<f64>,
    pub model: Option<String>,
    pub lattice: Option<String>,
    pub points: Option<usize>,
    pub xi_max: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}

/// First present value of flag, file, default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
