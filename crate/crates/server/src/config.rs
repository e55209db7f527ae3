//! Service configuration and the resources it loads.

use std::path::{Path, PathBuf};

use pulsechat_core::gateway::{ProviderSelection, Secret};
use thiserror::Error;

pub const DEFAULT_PORT: u16 = 8080;
pub const ENV_ADMIN_TOKEN: &str = "PULSECHAT_ADMIN_TOKEN";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("port must be in 1..=65535")]
    Port,
    #[error("elaboration word threshold must be at least 1")]
    Threshold,
    #[error("{what} path {path:?} does not exist")]
    MissingPath { what: &'static str, path: PathBuf },
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
}

/// How per-session random-pick seeds are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    /// Session `k` (in creation order) gets seed `n + k`, so runs repeat.
    Fixed(u64),
    Entropy,
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    pub data_dir: PathBuf,
    /// `None` uses the built-in file.
    pub registry_path: Option<PathBuf>,
    pub lexicon_path: Option<PathBuf>,
    pub prompts_path: Option<PathBuf>,
    pub provider: ProviderSelection,
    pub elaboration_word_threshold: usize,
    pub seed_mode: SeedMode,
    /// Bearer token for the admin endpoints. Empty disables them.
    pub admin_token: Secret,
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.port == 0 {
            return Err(ConfigError::Port);
        }
        if self.elaboration_word_threshold == 0 {
            return Err(ConfigError::Threshold);
        }
        let paths = [
            ("registry", &self.registry_path),
            ("lexicon", &self.lexicon_path),
            ("prompts", &self.prompts_path),
        ];
        for (what, path) in paths {
            if let Some(path) = path {
                require_exists(what, path)?;
            }
        }
        if let ProviderSelection::Scripted { script_file } = &self.provider {
            require_exists("script", Path::new(script_file))?;
        }
        Ok(())
    }
}

fn require_exists(what: &'static str, path: &Path) -> Result<(), ConfigError> {
    if path.exists() {
        Ok(())
    } else {
        Err(ConfigError::MissingPath {
            what,
            path: path.to_path_buf(),
        })
    }
}
