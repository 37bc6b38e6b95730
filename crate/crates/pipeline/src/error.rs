use std::fmt;

/// Process exit codes used by the command line.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG_INVALID: i32 = 2;
    pub const STAGE_FAILURE: i32 = 3;
    pub const PARTIAL_CRAWL: i32 = 4;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Crawl,
    Clean,
    Anonymize,
    Langid,
    Analyze,
    Report,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Crawl => "crawl",
            Stage::Clean => "clean",
            Stage::Anonymize => "anonymize",
            Stage::Langid => "langid",
            Stage::Analyze => "analyze",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("{stage} stage failed: {message}")]
    Stage { stage: Stage, message: String },
}

impl PipelineError {
    pub fn stage(stage: Stage, err: impl fmt::Display) -> Self {
        PipelineError::Stage {
            stage,
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::ConfigInvalid(_) => exit::CONFIG_INVALID,
            PipelineError::Stage { .. } => exit::STAGE_FAILURE,
        }
    }
}
