//! Record stages over line-delimited files.
//!
//! Input is read in fixed-size chunks; each chunk is processed on the
//! thread pool and written back in input order, so output bytes do not
//! depend on the number of threads.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use corpuskit_core::analytics::{write_plot_csvs, AnalyticsOptions, CorpusStats, StatsAcc};
use corpuskit_core::langid::{tag_record_in_place, Classifier, CommandClassifier, NgramModel, TagReport};
use corpuskit_core::model::{open_lines, parse_post_at, serialize_post, RawLine};
use corpuskit_core::normalize::{Blocklist, CleanReport, DuplicateCluster, DuplicateCounter, Sanitizer};
use corpuskit_core::pii::{Anonymizer, MaskReport, Registry};
use corpuskit_core::PostRecord;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{PipelineError, Stage};

/// Records analysed together before their accumulators are merged.
const STATS_SHARD: usize = 64;

/// A stage that rewrites records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Clean,
    Anonymize,
    Langid,
}

impl Transform {
    pub fn stage(self) -> Stage {
        match self {
            Transform::Clean => Stage::Clean,
            Transform::Anonymize => Stage::Anonymize,
            Transform::Langid => Stage::Langid,
        }
    }

    /// Output file name inside the run directory.
    pub fn output_name(self) -> &'static str {
        match self {
            Transform::Clean => "clean.jsonl",
            Transform::Anonymize => "masked.jsonl",
            Transform::Langid => "tagged.jsonl",
        }
    }
}

enum LangClassifier {
    Embedded,
    Loaded(NgramModel),
    Command(CommandClassifier),
}

impl LangClassifier {
    fn get(&self) -> &dyn Classifier {
        match self {
            LangClassifier::Embedded => NgramModel::embedded(),
            LangClassifier::Loaded(m) => m,
            LangClassifier::Command(c) => c,
        }
    }
}

/// Everything the record stages need, built once per run.
pub struct Processors {
    pub sanitizer: Sanitizer,
    pub anonymizer: Anonymizer,
    classifier: LangClassifier,
    pub analytics: AnalyticsOptions,
}

impl Processors {
    pub fn from_config(cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        let invalid = |m: String| PipelineError::ConfigInvalid(m);
        let blocklist = match &cfg.clean.blocklist {
            Some(p) => Blocklist::load(p).map_err(|e| invalid(format!("clean.blocklist: {e}")))?,
            None => Blocklist::empty(),
        };
        let registry = Registry::from_config(&cfg.pii).map_err(|e| invalid(format!("pii: {e}")))?;
        let classifier = match (&cfg.langid.command, &cfg.langid.model) {
            (Some(cmd), _) if cfg.stages.langid => LangClassifier::Command(
                CommandClassifier::spawn(&cmd[0], &cmd[1..], cfg.langid.labels.clone())
                    .map_err(|e| invalid(format!("langid.command: {e}")))?,
            ),
            (_, Some(path)) if cfg.stages.langid => LangClassifier::Loaded(
                NgramModel::load(path).map_err(|e| invalid(format!("langid.model: {e}")))?,
            ),
            _ => LangClassifier::Embedded,
        };
        Ok(Self {
            sanitizer: Sanitizer::new(cfg.clean.spam, blocklist, cfg.clean.limit_tokens),
            anonymizer: Anonymizer::new(registry),
            classifier,
            analytics: cfg.analytics.clone(),
        })
    }

    pub fn classifier(&self) -> &dyn Classifier {
        self.classifier.get()
    }

    fn apply(&self, t: Transform, record: &mut PostRecord, reports: &mut StageReports) -> Result<(), String> {
        match t {
            Transform::Clean => reports.clean.merge(&self.sanitizer.clean_record_in_place(record)),
            Transform::Anonymize => reports.mask.merge(&self.anonymizer.anonymize_record_in_place(record)),
            Transform::Langid => {
                let r = tag_record_in_place(record, self.classifier()).map_err(|e| e.to_string())?;
                reports.tags.merge(&r);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageReports {
    pub clean: CleanReport,
    pub mask: MaskReport,
    pub tags: TagReport,
}

impl StageReports {
    pub fn merge(&mut self, other: &StageReports) {
        self.clean.merge(&other.clean);
        self.mask.merge(&other.mask);
        self.tags.merge(&other.tags);
    }
}

/// `stats.json`: the corpus statistics plus template-duplicate clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub stats: CorpusStats,
    pub template_duplicates: Vec<DuplicateCluster>,
}

impl Analysis {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Writes `stats.json` and the plot CSVs into `dir`; returns the files.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        self.write_to(&dir.join("stats.json"), Some(dir))
    }

    /// Writes the stats document to `stats`, and the plot CSVs into `plots`
    /// when given.
    pub fn write_to(&self, stats: &Path, plots: Option<&Path>) -> std::io::Result<Vec<PathBuf>> {
        write_atomic(stats, |w| {
            serde_json::to_writer_pretty(&mut *w, self)?;
            w.write_all(b"\n")
        })?;
        let mut files = vec![stats.to_path_buf()];
        if let Some(dir) = plots {
            std::fs::create_dir_all(dir)?;
            files.extend(write_plot_csvs(&self.stats, dir)?);
        }
        Ok(files)
    }
}

#[derive(Default)]
struct StatsState {
    acc: StatsAcc,
    dups: DuplicateCounter,
}

/// Result of streaming one file.
pub struct StreamOutcome {
    pub records_in: u64,
    pub records_out: u64,
    pub reports: StageReports,
    pub analysis: Option<Analysis>,
}

/// Writes through a temporary file renamed into place on success, so a
/// failed stage never leaves a truncated output behind.
pub fn write_atomic(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> std::io::Result<()> {
    let tmp = tmp_path(path);
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        f(&mut w)?;
        w.flush()?;
        w.into_inner().map_err(|e| e.into_error())?.sync_all()
    })();
    match result {
        Ok(()) => std::fs::rename(&tmp, path),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

fn read_chunk(
    lines: &mut impl Iterator<Item = std::io::Result<RawLine>>,
    n: usize,
) -> Result<Vec<RawLine>, String> {
    let mut chunk = Vec::with_capacity(n);
    for line in lines.by_ref().take(n) {
        chunk.push(line.map_err(|e| e.to_string())?);
    }
    Ok(chunk)
}

/// Reads `input`, applies `transforms` to every record in order, writes
/// the result to `output` when given and analyses it when `analyze` is set.
pub fn stream(
    procs: &Processors,
    pool: &ThreadPool,
    chunk_size: usize,
    input: &Path,
    transforms: &[Transform],
    output: Option<&Path>,
    analyze: bool,
) -> Result<StreamOutcome, String> {
    let mut lines = open_lines(input).map_err(|e| format!("{}: {e}", input.display()))?;
    let mut seen: HashSet<String> = HashSet::new();
    let mut reports = StageReports::default();
    let mut stats = analyze.then(StatsState::default);
    let mut ordinal = 0u64;

    let mut body = |w: Option<&mut BufWriter<File>>| -> Result<(), String> {
        let mut w = w;
        loop {
            let chunk = read_chunk(&mut lines, chunk_size)?;
            if chunk.is_empty() {
                return Ok(());
            }
            let processed: Vec<Result<(PostRecord, StageReports), String>> = pool.install(|| {
                chunk
                    .par_iter()
                    .map(|line| {
                        let mut record = parse_post_at(&line.text, line.number).map_err(|e| e.to_string())?;
                        let mut r = StageReports::default();
                        for &t in transforms {
                            procs
                                .apply(t, &mut record, &mut r)
                                .map_err(|e| format!("line {}: {e}", line.number))?;
                        }
                        Ok((record, r))
                    })
                    .collect()
            });
            let mut records = Vec::with_capacity(processed.len());
            for (item, line) in processed.into_iter().zip(&chunk) {
                let (record, r) = item?;
                if !seen.insert(record.post_id.clone()) {
                    return Err(format!("line {}: duplicate post_id {:?}", line.number, record.post_id));
                }
                reports.merge(&r);
                records.push(record);
            }
            if let Some(w) = w.as_deref_mut() {
                let lines: Vec<String> = pool.install(|| records.par_iter().map(serialize_post).collect());
                for l in lines {
                    w.write_all(l.as_bytes()).map_err(|e| e.to_string())?;
                    w.write_all(b"\n").map_err(|e| e.to_string())?;
                }
            }
            if let Some(st) = stats.as_mut() {
                let base = ordinal;
                let opts = &procs.analytics;
                let shards: Vec<StatsState> = pool.install(|| {
                    records
                        .par_chunks(STATS_SHARD)
                        .enumerate()
                        .map(|(i, shard)| {
                            let mut s = StatsState::default();
                            for (j, p) in shard.iter().enumerate() {
                                s.acc.add(p, opts);
                                let ord = base + (i * STATS_SHARD + j) as u64;
                                s.dups.add(ord, &p.post_id, &p.content);
                            }
                            s
                        })
                        .collect()
                });
                for s in shards {
                    st.acc.merge(s.acc);
                    st.dups.merge(s.dups);
                }
            }
            ordinal += records.len() as u64;
        }
    };

    match output {
        Some(path) => {
            let mut failure = None;
            write_atomic(path, |w| {
                body(Some(w)).map_err(|e| {
                    failure = Some(e.clone());
                    std::io::Error::other(e)
                })
            })
            .map_err(|e| failure.take().unwrap_or_else(|| format!("{}: {e}", path.display())))?;
        }
        None => body(None)?,
    }

    let records = seen.len() as u64;
    let analysis = stats.map(|st| Analysis {
        stats: st.acc.finish(&procs.analytics),
        template_duplicates: st.dups.report(),
    });
    Ok(StreamOutcome {
        records_in: records,
        records_out: records,
        reports,
        analysis,
    })
}

/// Builds the worker pool for a run.
pub fn thread_pool(parallelism: usize) -> Result<ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| PipelineError::ConfigInvalid(format!("parallelism: {e}")))
}
