//! Whole-pipeline orchestration.

use std::path::{Path, PathBuf};
use std::time::Instant;

use corpuskit_core::model::serialize_post;
use corpuskit_crawler::{crawl, CrawlConfig, CrawlOutput, HttpTransport, TokioClock, Transport};
use std::io::Write;

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Stage};
use crate::manifest::{
    AnonymizationSummary, OutputFile, RunManifest, StageRun, Timings, MANIFEST_FILE, MANIFEST_VERSION,
    TIMINGS_FILE,
};
use crate::report::{emit_report, Report};
use crate::stages::{stream, thread_pool, write_atomic, Analysis, Processors, StageReports, StreamOutcome, Transform};

pub const RAW_FILE: &str = "raw.jsonl";
pub const CRAWL_LOG_FILE: &str = "crawl_log.jsonl";

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub timings: Timings,
    pub analysis: Option<Analysis>,
    pub report: Option<Report>,
}

impl RunOutcome {
    /// Exit code for a successful run: partial crawls are flagged.
    pub fn exit_code(&self) -> i32 {
        if self.manifest.partial_crawl {
            crate::error::exit::PARTIAL_CRAWL
        } else {
            crate::error::exit::OK
        }
    }
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn io_err(stage: Stage, path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |e| PipelineError::stage(stage, format!("{}: {e}", path.display()))
}

/// Runs the crawl stage: writes `raw.jsonl` and `crawl_log.jsonl` into `dir`.
pub fn run_crawl(
    crawl_cfg: &CrawlConfig,
    transport: Option<&dyn Transport>,
    dir: &Path,
) -> Result<CrawlOutput, PipelineError> {
    run_crawl_to(crawl_cfg, transport, &dir.join(RAW_FILE), &dir.join(CRAWL_LOG_FILE))
}

/// Crawls into the given corpus and log files. The log is written even when
/// the crawl aborts.
pub fn run_crawl_to(
    crawl_cfg: &CrawlConfig,
    transport: Option<&dyn Transport>,
    raw: &Path,
    log_path: &Path,
) -> Result<CrawlOutput, PipelineError> {
    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(|e| PipelineError::stage(Stage::Crawl, e))?;
    let http;
    let transport: &dyn Transport = match transport {
        Some(t) => t,
        None => {
            http = HttpTransport::new(
                &crawl_cfg.base_url,
                &crawl_cfg.user_agent,
                crawl_cfg.request_timeout,
                crawl_cfg.bearer_token.clone(),
            )
            .map_err(|e| PipelineError::stage(Stage::Crawl, e))?;
            &http
        }
    };
    let result = rt.block_on(async {
        let clock = TokioClock::new();
        crawl(crawl_cfg, transport, &clock).await
    });
    match result {
        Ok(out) => {
            write_atomic(log_path, |w| out.log.write_jsonl(w)).map_err(io_err(Stage::Crawl, log_path))?;
            write_atomic(raw, |w| {
                for p in &out.corpus.posts {
                    w.write_all(serialize_post(p).as_bytes())?;
                    w.write_all(b"\n")?;
                }
                Ok(())
            })
            .map_err(io_err(Stage::Crawl, raw))?;
            Ok(out)
        }
        Err(abort) => {
            let _ = write_atomic(log_path, |w| abort.log.write_jsonl(w));
            Err(PipelineError::stage(Stage::Crawl, abort.error))
        }
    }
}

/// Runs one record stage from `input` to `output`.
pub fn run_transform(
    cfg: &PipelineConfig,
    t: Transform,
    input: &Path,
    output: &Path,
) -> Result<StreamOutcome, PipelineError> {
    cfg.validate_processing()?;
    let procs = Processors::from_config(cfg)?;
    let pool = thread_pool(cfg.parallelism)?;
    stream(&procs, &pool, cfg.chunk_size, input, &[t], Some(output), false)
        .map_err(|e| PipelineError::stage(t.stage(), e))
}

/// Computes the statistics of `input` without writing anything.
pub fn analyze_file(cfg: &PipelineConfig, input: &Path) -> Result<Analysis, PipelineError> {
    cfg.validate_processing()?;
    let procs = Processors::from_config(cfg)?;
    let pool = thread_pool(cfg.parallelism)?;
    let out = stream(&procs, &pool, cfg.chunk_size, input, &[], None, true)
        .map_err(|e| PipelineError::stage(Stage::Analyze, e))?;
    Ok(out.analysis.expect("analysis requested"))
}

/// Analyses `input` and writes `stats.json` and plot CSVs into `dir`.
pub fn run_analyze(cfg: &PipelineConfig, input: &Path, dir: &Path) -> Result<Analysis, PipelineError> {
    let analysis = analyze_file(cfg, input)?;
    std::fs::create_dir_all(dir).map_err(io_err(Stage::Analyze, dir))?;
    analysis.write(dir).map_err(io_err(Stage::Analyze, dir))?;
    Ok(analysis)
}

impl PipelineConfig {
    /// Checks that only matter for record processing.
    fn validate_processing(&self) -> Result<(), PipelineError> {
        if self.parallelism < 1 {
            return Err(PipelineError::ConfigInvalid("parallelism must be at least 1".into()));
        }
        if self.chunk_size < 1 {
            return Err(PipelineError::ConfigInvalid("chunk_size must be at least 1".into()));
        }
        self.clean
            .spam
            .validate()
            .map_err(|e| PipelineError::ConfigInvalid(format!("clean.spam: {e}")))
    }
}

/// Runs every enabled stage in the fixed order crawl, clean, anonymize,
/// langid, analyze, then writes the manifest, timings and report.
pub fn run(cfg: &PipelineConfig) -> Result<RunOutcome, PipelineError> {
    run_with_transport(cfg, None)
}

/// [`run`] with the crawl going through `transport` instead of HTTP.
pub fn run_with_transport(
    cfg: &PipelineConfig,
    transport: Option<&dyn Transport>,
) -> Result<RunOutcome, PipelineError> {
    cfg.validate()?;
    let started = Instant::now();
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| PipelineError::ConfigInvalid(format!("{}: {e}", dir.display())))?;
    let procs = Processors::from_config(cfg)?;
    let pool = thread_pool(cfg.parallelism)?;
    let mut timings = Timings {
        parallelism: cfg.parallelism,
        ..Timings::default()
    };
    let mut stages: Vec<StageRun> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();

    let mut crawl_summary = None;
    let (mut current, input_label): (PathBuf, Option<String>) = if cfg.stages.crawl {
        let t = Instant::now();
        let mut crawl_cfg = cfg.crawl.clone();
        crawl_cfg.seed = cfg.seed;
        let out = run_crawl(&crawl_cfg, transport, &dir)?;
        timings.stages.insert(Stage::Crawl.to_string(), t.elapsed().as_secs_f64());
        stages.push(StageRun {
            stage: Stage::Crawl,
            input: Some(crawl_cfg.base_url.clone()),
            output: Some(RAW_FILE.into()),
            records_in: out.summary.discovered,
            records_out: out.corpus.posts.len() as u64,
        });
        outputs.extend([RAW_FILE.to_string(), CRAWL_LOG_FILE.to_string()]);
        crawl_summary = Some(out.summary);
        (dir.join(RAW_FILE), Some(RAW_FILE.to_string()))
    } else {
        let input = cfg.input.clone().expect("validated");
        let label = input.display().to_string();
        (input, Some(label))
    };
    let mut current_label = input_label.clone();

    let transforms: Vec<Transform> = [
        (cfg.stages.clean, Transform::Clean),
        (cfg.stages.anonymize, Transform::Anonymize),
        (cfg.stages.langid, Transform::Langid),
    ]
    .into_iter()
    .filter_map(|(on, t)| on.then_some(t))
    .collect();

    let mut reports = StageReports::default();
    let mut analysis = None;
    if cfg.fused && !transforms.is_empty() {
        let t = Instant::now();
        let last = *transforms.last().unwrap();
        let out_path = dir.join(last.output_name());
        let out = stream(&procs, &pool, cfg.chunk_size, &current, &transforms, Some(&out_path), cfg.stages.analyze)
            .map_err(|e| PipelineError::stage(last.stage(), e))?;
        timings.stages.insert("fused".into(), t.elapsed().as_secs_f64());
        for (i, tr) in transforms.iter().enumerate() {
            let is_last = i + 1 == transforms.len();
            stages.push(StageRun {
                stage: tr.stage(),
                input: if i == 0 { current_label.clone() } else { None },
                output: is_last.then(|| last.output_name().to_string()),
                records_in: out.records_in,
                records_out: out.records_out,
            });
        }
        reports = out.reports;
        analysis = out.analysis;
        current = out_path;
        current_label = Some(last.output_name().to_string());
        outputs.push(last.output_name().to_string());
        if cfg.stages.analyze {
            stages.push(StageRun {
                stage: Stage::Analyze,
                input: current_label.clone(),
                output: Some("stats.json".into()),
                records_in: out.records_out,
                records_out: out.records_out,
            });
        }
    } else {
        for tr in &transforms {
            let t = Instant::now();
            let out_path = dir.join(tr.output_name());
            let out = stream(&procs, &pool, cfg.chunk_size, &current, &[*tr], Some(&out_path), false)
                .map_err(|e| PipelineError::stage(tr.stage(), e))?;
            timings.stages.insert(tr.stage().to_string(), t.elapsed().as_secs_f64());
            stages.push(StageRun {
                stage: tr.stage(),
                input: current_label.clone(),
                output: Some(tr.output_name().to_string()),
                records_in: out.records_in,
                records_out: out.records_out,
            });
            reports.merge(&out.reports);
            current = out_path;
            current_label = Some(tr.output_name().to_string());
            outputs.push(tr.output_name().to_string());
        }
        if cfg.stages.analyze {
            let t = Instant::now();
            let out = stream(&procs, &pool, cfg.chunk_size, &current, &[], None, true)
                .map_err(|e| PipelineError::stage(Stage::Analyze, e))?;
            timings.stages.insert(Stage::Analyze.to_string(), t.elapsed().as_secs_f64());
            stages.push(StageRun {
                stage: Stage::Analyze,
                input: current_label.clone(),
                output: Some("stats.json".into()),
                records_in: out.records_in,
                records_out: out.records_out,
            });
            analysis = out.analysis;
        }
    }

    for s in &stages {
        if s.stage != Stage::Crawl && s.records_in != s.records_out {
            return Err(PipelineError::stage(
                s.stage,
                format!("record count changed from {} to {}", s.records_in, s.records_out),
            ));
        }
    }

    if let Some(a) = &analysis {
        let files = a.write(&dir).map_err(io_err(Stage::Analyze, &dir))?;
        outputs.extend(files.iter().map(|p| file_name(p)));
    }

    let describe = |name: &str| OutputFile::describe(&dir, name).map_err(io_err(Stage::Report, &dir));
    // the last record file written, or the input when no stage rewrote it
    let dataset = OutputFile::describe(current.parent().unwrap_or(Path::new(".")), &file_name(&current))
        .map_err(io_err(Stage::Report, &current))?;
    let output_files = outputs.iter().map(|n| describe(n)).collect::<Result<Vec<_>, _>>()?;

    let clean = cfg.stages.clean.then(|| reports.clean.clone());
    let mask = cfg.stages.anonymize.then(|| reports.mask.clone());
    let manifest = RunManifest {
        manifest_version: MANIFEST_VERSION,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.config_hash(),
        fused: cfg.fused,
        input: input_label,
        stages,
        crawl: crawl_summary,
        partial_crawl: crawl_summary.is_some_and(|s| s.skipped() > 0),
        anonymization: AnonymizationSummary::from_reports(clean.as_ref(), mask.as_ref()),
        clean,
        mask,
        langid: cfg.stages.langid.then_some(reports.tags),
        dataset: Some(dataset),
        outputs: output_files,
    };
    let report = match &analysis {
        Some(a) => Some(emit_report(&manifest, a, &dir).map_err(io_err(Stage::Report, &dir))?),
        None => None,
    };
    manifest.write(&dir.join(MANIFEST_FILE)).map_err(io_err(Stage::Report, &dir))?;
    timings.total_seconds = started.elapsed().as_secs_f64();
    timings.write(&dir.join(TIMINGS_FILE)).map_err(io_err(Stage::Report, &dir))?;
    Ok(RunOutcome {
        manifest,
        timings,
        analysis,
        report,
    })
}

/// Rebuilds the report of a finished run from its directory.
pub fn report_from_dir(dir: &Path) -> Result<Report, PipelineError> {
    let manifest = RunManifest::load(&dir.join(MANIFEST_FILE)).map_err(|e| PipelineError::stage(Stage::Report, e))?;
    let analysis = Analysis::load(&dir.join("stats.json")).map_err(|e| PipelineError::stage(Stage::Report, e))?;
    emit_report(&manifest, &analysis, dir).map_err(io_err(Stage::Report, dir))
}
