use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{Language, DEFAULT_FILTER_PATTERNS};
use crate::error::{Error, Result};
use crate::gbm::GbmParams;

/// Environment variable naming a default configuration file.
pub const CONFIG_ENV: &str = "METRIQ_CONFIG";

/// Run configuration. Every field is optional in the file; command-line
/// flags override whatever the file provides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub language: Option<Language>,
    pub corpus: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub filter_patterns: Option<Vec<String>>,
    pub q: Option<f64>,
    pub seed: Option<u64>,
    pub gbm: Option<GbmParams>,
    pub bins: Option<usize>,
    pub strict: Option<bool>,
    pub min_samples: Option<usize>,
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Loads `explicit`, else the file named by `METRIQ_CONFIG`, else defaults.
    pub fn load(explicit: Option<&Path>) -> Result<Self> {
        if let Some(p) = explicit {
            return Self::from_file(p);
        }
        match std::env::var_os(CONFIG_ENV) {
            Some(p) if !p.is_empty() => Self::from_file(PathBuf::from(p)),
            _ => Ok(Self::default()),
        }
    }

    pub fn q(&self) -> f64 {
        self.q.unwrap_or(0.2)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(42)
    }

    pub fn bins(&self) -> usize {
        self.bins.unwrap_or(20)
    }

    pub fn strict(&self) -> bool {
        self.strict.unwrap_or(false)
    }

    pub fn gbm(&self) -> GbmParams {
        GbmParams {
            seed: self.seed(),
            ..self.gbm.unwrap_or_default()
        }
    }

    pub fn filter_patterns(&self) -> Vec<String> {
        self.filter_patterns.clone().unwrap_or_else(|| {
            DEFAULT_FILTER_PATTERNS
                .iter()
                .map(|s| s.to_string())
                .collect()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.q();
        if !(q > 0.0 && q <= 0.5) {
            return Err(Error::Config(format!("q={q} must lie in (0, 0.5]")));
        }
        if self.bins() == 0 {
            return Err(Error::Config("bins must be >= 1".into()));
        }
        Ok(())
    }
}
