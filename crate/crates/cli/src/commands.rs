use std::io::Write;
use std::path::{Path, PathBuf};

use corpuskit_crawler::CrawlConfig;
use corpuskit_pipeline::stages::write_atomic;
use corpuskit_pipeline::{
    analyze_file, exit, report_from_dir, run, run_crawl_to, run_transform, PipelineConfig, PipelineError, Stage,
    StageToggles, Transform, CRAWL_LOG_FILE,
};
use serde::Serialize;
use tracing::{info, warn};

use crate::args::{
    AnalyzeArgs, AnonymizeArgs, CleanArgs, CrawlArgs, CrawlFlags, Format, LangidArgs, Processing, ReportArgs,
    RunArgs, StageArg,
};

type Outcome = Result<i32, PipelineError>;

/// The config file when one is given, else defaults.
pub fn base_config(path: Option<&Path>) -> Result<PipelineConfig, PipelineError> {
    match path {
        Some(p) => PipelineConfig::load(p),
        None => Ok(PipelineConfig::default()),
    }
}

fn apply_processing(cfg: &mut PipelineConfig, p: &Processing) {
    if let Some(n) = p.parallelism {
        cfg.parallelism = n;
    }
    if let Some(n) = p.chunk_size {
        cfg.chunk_size = n;
    }
}

pub fn apply_crawl(c: &mut CrawlConfig, f: &CrawlFlags) {
    if let Some(v) = &f.base_url {
        c.base_url = v.clone();
    }
    if let Some(v) = f.batch {
        c.batch_size = v;
    }
    if let Some(v) = f.delay {
        c.inter_batch_delay = v;
    }
    if !f.feeds.is_empty() {
        c.feeds = f.feeds.clone();
    }
    if let Some(v) = f.pagination {
        c.pagination = v.into();
    }
    if let Some(v) = f.max_retries {
        c.max_retries = v;
    }
    if let Some(v) = f.retry_base {
        c.retry_base = v;
    }
    if let Some(v) = f.timeout {
        c.request_timeout = v;
    }
    if let Some(v) = &f.bearer_token {
        c.bearer_token = Some(v.clone());
    }
    if f.window_start.is_some() {
        c.window_start = f.window_start;
    }
    if f.window_end.is_some() {
        c.window_end = f.window_end;
    }
}

fn set_stage(t: &mut StageToggles, s: StageArg, on: bool) {
    match s {
        StageArg::Crawl => t.crawl = on,
        StageArg::Clean => t.clean = on,
        StageArg::Anonymize => t.anonymize = on,
        StageArg::Langid => t.langid = on,
        StageArg::Analyze => t.analyze = on,
    }
}

/// Validates a config for a single record stage reading `input`.
fn single_stage(mut cfg: PipelineConfig, input: &Path) -> Result<PipelineConfig, PipelineError> {
    cfg.input = Some(input.to_path_buf());
    cfg.stages.crawl = false;
    cfg.validate()?;
    Ok(cfg)
}

fn ensure_parent(path: &Path, stage: Stage) -> Result<(), PipelineError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| PipelineError::stage(stage, format!("{}: {e}", dir.display())))
        }
        _ => Ok(()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T, stage: Stage) -> Result<(), PipelineError> {
    ensure_parent(path, stage)?;
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
    .map_err(|e| PipelineError::stage(stage, format!("{}: {e}", path.display())))
}

pub fn crawl(cfg: PipelineConfig, args: &CrawlArgs) -> Outcome {
    let mut c = cfg.crawl;
    apply_crawl(&mut c, &args.crawl);
    c.seed = args.seed.unwrap_or(cfg.seed);
    c.validate().map_err(|e| PipelineError::ConfigInvalid(format!("crawl: {e}")))?;
    let log = args.log.clone().unwrap_or_else(|| {
        args.out.parent().map_or_else(|| PathBuf::from(CRAWL_LOG_FILE), |d| d.join(CRAWL_LOG_FILE))
    });
    ensure_parent(&args.out, Stage::Crawl)?;
    ensure_parent(&log, Stage::Crawl)?;
    info!(base_url = %c.base_url, batch = c.batch_size, delay = ?c.inter_batch_delay, "crawling");
    let out = run_crawl_to(&c, None, &args.out, &log)?;
    let s = out.summary;
    info!(
        fetched = s.fetched,
        not_found = s.not_found,
        failed = s.failed,
        malformed = s.malformed,
        out_of_window = s.out_of_window,
        requests = s.requests,
        retries = s.retries,
        "crawl finished"
    );
    if s.skipped() > 0 {
        warn!(skipped = s.skipped(), log = %log.display(), "partial crawl");
        return Ok(exit::PARTIAL_CRAWL);
    }
    Ok(exit::OK)
}

fn transform<R: Serialize>(
    cfg: PipelineConfig,
    t: Transform,
    input: &Path,
    out: &Path,
    report: Option<&Path>,
    pick: impl Fn(&corpuskit_pipeline::StageReports) -> &R,
) -> Outcome {
    let cfg = single_stage(cfg, input)?;
    ensure_parent(out, t.stage())?;
    let result = run_transform(&cfg, t, input, out)?;
    info!(stage = %t.stage(), records = result.records_out, out = %out.display(), "done");
    if let Some(path) = report {
        write_json(path, pick(&result.reports), t.stage())?;
    }
    Ok(exit::OK)
}

pub fn clean(mut cfg: PipelineConfig, args: &CleanArgs) -> Outcome {
    apply_processing(&mut cfg, &args.processing);
    if let Some(p) = &args.blocklist {
        cfg.clean.blocklist = Some(p.clone());
    }
    if let Some(n) = args.limit_tokens {
        cfg.clean.limit_tokens = n;
    }
    transform(cfg, Transform::Clean, &args.input, &args.out, args.report.as_deref(), |r| &r.clean)
}

pub fn anonymize(mut cfg: PipelineConfig, args: &AnonymizeArgs) -> Outcome {
    apply_processing(&mut cfg, &args.processing);
    if let Some(p) = &args.wordlist {
        cfg.pii.bip39_wordlist = Some(p.clone());
    }
    for t in &args.disable {
        if !cfg.pii.disabled_types.contains(t) {
            cfg.pii.disabled_types.push(*t);
        }
    }
    transform(cfg, Transform::Anonymize, &args.input, &args.out, args.report.as_deref(), |r| &r.mask)
}

pub fn langid(mut cfg: PipelineConfig, args: &LangidArgs) -> Outcome {
    apply_processing(&mut cfg, &args.processing);
    if let Some(p) = &args.model {
        cfg.langid.model = Some(p.clone());
        cfg.langid.command = None;
    }
    transform(cfg, Transform::Langid, &args.input, &args.out, args.report.as_deref(), |r| &r.tags)
}

pub fn analyze(mut cfg: PipelineConfig, args: &AnalyzeArgs) -> Outcome {
    apply_processing(&mut cfg, &args.processing);
    if let Some(d) = &args.self_domain {
        cfg.analytics.self_domain = d.clone();
    }
    if let Some(r) = args.rate_threshold {
        cfg.analytics.rate_threshold = r;
    }
    if let Some(x) = args.xmin {
        cfg.analytics.power_law.xmin = x;
    }
    let cfg = single_stage(cfg, &args.input)?;
    let analysis = analyze_file(&cfg, &args.input)?;
    ensure_parent(&args.out, Stage::Analyze)?;
    let files = analysis
        .write_to(&args.out, args.plots.as_deref())
        .map_err(|e| PipelineError::stage(Stage::Analyze, e))?;
    info!(posts = analysis.stats.summary.total_posts, files = files.len(), "stats written");
    Ok(exit::OK)
}

pub fn run_all(mut cfg: PipelineConfig, args: &RunArgs) -> Outcome {
    apply_processing(&mut cfg, &args.processing);
    apply_crawl(&mut cfg.crawl, &args.crawl);
    if let Some(p) = &args.input {
        cfg.input = Some(p.clone());
    }
    if let Some(d) = &args.out_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.fused {
        cfg.fused = true;
    }
    if let Some(p) = &args.blocklist {
        cfg.clean.blocklist = Some(p.clone());
    }
    if let Some(p) = &args.model {
        cfg.langid.model = Some(p.clone());
        cfg.langid.command = None;
    }
    for s in &args.enable {
        set_stage(&mut cfg.stages, *s, true);
    }
    for s in &args.skip {
        set_stage(&mut cfg.stages, *s, false);
    }
    let out = run(&cfg)?;
    for s in &out.manifest.stages {
        info!(stage = %s.stage, records_in = s.records_in, records_out = s.records_out, "stage");
    }
    let a = &out.manifest.anonymization;
    info!(
        fields = a.text_fields_processed,
        with_pii = a.fields_with_pii_detected,
        masked = a.total_entities_masked,
        total_seconds = out.timings.total_seconds,
        dir = %cfg.output_dir.display(),
        "run finished"
    );
    if out.manifest.partial_crawl {
        warn!("partial crawl: some posts were skipped");
    }
    Ok(out.exit_code())
}

pub fn report(cfg: PipelineConfig, args: &ReportArgs) -> Outcome {
    let dir = args.run_dir.clone().unwrap_or(cfg.output_dir);
    let report = report_from_dir(&dir)?;
    let rendered = match args.format {
        Format::Text => report.to_text(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report).map_err(|e| PipelineError::stage(Stage::Report, e))?;
            s.push('\n');
            s
        }
    };
    std::io::stdout()
        .write_all(rendered.as_bytes())
        .map_err(|e| PipelineError::stage(Stage::Report, e))?;
    Ok(exit::OK)
}
