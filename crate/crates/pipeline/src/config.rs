//! The pipeline config file: TOML with a versioned schema.

use std::path::{Path, PathBuf};

use corpuskit_core::analytics::AnalyticsOptions;
use corpuskit_core::normalize::{SpamParams, DEFAULT_LIMIT_TOKENS};
use corpuskit_core::pii::RegistryConfig;
use corpuskit_crawler::CrawlConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::PipelineError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "CORPUSKIT_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageToggles {
    pub crawl: bool,
    pub clean: bool,
    pub anonymize: bool,
    pub langid: bool,
    pub analyze: bool,
}

impl Default for StageToggles {
    fn default() -> Self {
        Self {
            crawl: false,
            clean: true,
            anonymize: true,
            langid: true,
            analyze: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanConfig {
    pub spam: SpamParams,
    pub blocklist: Option<PathBuf>,
    pub limit_tokens: usize,
}

impl Default for CleanConfig {
    fn default() -> Self {
        Self {
            spam: SpamParams::default(),
            blocklist: None,
            limit_tokens: DEFAULT_LIMIT_TOKENS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LangIdConfig {
    /// Character n-gram profile file; the embedded model when unset.
    pub model: Option<PathBuf>,
    /// External classifier speaking the fastText `predict-prob` line
    /// protocol, e.g. `["fasttext", "predict-prob", "lid.176.bin", "-", "1"]`.
    /// Takes precedence over `model`.
    pub command: Option<Vec<String>>,
    /// Labels accepted from the external classifier; empty accepts all.
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema_version: u32,
    /// Raw corpus. Not needed when the crawl stage is on.
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub parallelism: usize,
    /// Records per work unit.
    pub chunk_size: usize,
    /// Seeds crawl retry jitter and any sampled diagnostics.
    pub seed: u64,
    /// Stream all record stages in one pass, skipping intermediate files.
    pub fused: bool,
    pub stages: StageToggles,
    pub crawl: CrawlConfig,
    pub clean: CleanConfig,
    pub pii: RegistryConfig,
    pub langid: LangIdConfig,
    pub analytics: AnalyticsOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            input: None,
            output_dir: PathBuf::from("out"),
            parallelism: 1,
            chunk_size: 1024,
            seed: 0,
            fused: false,
            stages: StageToggles::default(),
            crawl: CrawlConfig::default(),
            clean: CleanConfig::default(),
            pii: RegistryConfig::default(),
            langid: LangIdConfig::default(),
            analytics: AnalyticsOptions::default(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> PipelineError {
    PipelineError::ConfigInvalid(msg.into())
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() && !p.as_os_str().is_empty() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(invalid(format!(
                "schema_version {} is not supported (expected {CONFIG_SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            PipelineError::ConfigInvalid(m) => invalid(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase_paths(base);
        Ok(cfg)
    }

    pub fn rebase_paths(&mut self, base: &Path) {
        if let Some(p) = self.input.as_mut() {
            rebase(base, p);
        }
        rebase(base, &mut self.output_dir);
        if let Some(p) = self.clean.blocklist.as_mut() {
            rebase(base, p);
        }
        if let Some(p) = self.langid.model.as_mut() {
            rebase(base, p);
        }
        if let Some(p) = self.pii.bip39_wordlist.as_mut() {
            rebase(base, p);
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(invalid(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.parallelism < 1 {
            return Err(invalid("parallelism must be at least 1"));
        }
        if self.chunk_size < 1 {
            return Err(invalid("chunk_size must be at least 1"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(invalid("output_dir is empty"));
        }
        let needs_input = !self.stages.crawl
            && (self.stages.clean || self.stages.anonymize || self.stages.langid || self.stages.analyze);
        match &self.input {
            Some(p) if !p.is_file() => return Err(invalid(format!("input {} does not exist", p.display()))),
            None if needs_input => return Err(invalid("no input given and the crawl stage is off")),
            _ => {}
        }
        let must_exist = [
            ("clean.blocklist", self.clean.blocklist.as_ref()),
            ("langid.model", self.langid.model.as_ref()),
            ("pii.bip39_wordlist", self.pii.bip39_wordlist.as_ref()),
        ];
        for (key, path) in must_exist {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(invalid(format!("{key}: {} does not exist", p.display())));
                }
            }
        }
        if let Some(cmd) = &self.langid.command {
            if cmd.is_empty() || cmd[0].is_empty() {
                return Err(invalid("langid.command is empty"));
            }
        }
        self.clean.spam.validate().map_err(|e| invalid(format!("clean.spam: {e}")))?;
        if self.clean.limit_tokens == 0 {
            return Err(invalid("clean.limit_tokens must be at least 1"));
        }
        if self.stages.crawl {
            self.crawl.validate().map_err(|e| invalid(format!("crawl: {e}")))?;
        }
        if !(self.analytics.rate_threshold.is_finite() && self.analytics.rate_threshold >= 0.0) {
            return Err(invalid("analytics.rate_threshold must be a non-negative number"));
        }
        if self.analytics.power_law.xmin < 1 {
            return Err(invalid("analytics.power_law.xmin must be at least 1"));
        }
        Ok(())
    }

    /// SHA-256 over the settings that can change outputs. Parallelism,
    /// chunking, fused mode and the output directory are left out: they
    /// change how and where a run happens, not what it produces.
    pub fn config_hash(&self) -> String {
        let mut view = self.clone();
        view.parallelism = 1;
        view.chunk_size = 1;
        view.fused = false;
        view.output_dir = PathBuf::new();
        let canonical = serde_json::to_vec(&view).expect("config serializes");
        format!("{:x}", Sha256::digest(&canonical))
    }
}
