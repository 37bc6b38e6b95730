//! Runs the record stages as a pipeline driven by one config file, and
//! produces run manifests and reports.

pub mod config;
pub mod error;
pub mod manifest;
pub mod report;
pub mod run;
pub mod stages;

pub use config::{CleanConfig, LangIdConfig, PipelineConfig, StageToggles, CONFIG_ENV, CONFIG_SCHEMA_VERSION};
pub use error::{exit, PipelineError, Stage};
pub use manifest::{AnonymizationSummary, EntityCount, OutputFile, RunManifest, StageRun, Timings};
pub use report::{build_report, emit_report, Report};
pub use run::{
    analyze_file, report_from_dir, run, run_analyze, run_crawl, run_crawl_to, run_transform, run_with_transport,
    RunOutcome, CRAWL_LOG_FILE, RAW_FILE,
};
pub use stages::{Analysis, Processors, StageReports, StreamOutcome, Transform};
