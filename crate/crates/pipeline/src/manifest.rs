use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use corpuskit_core::langid::TagReport;
use corpuskit_core::normalize::{CleanReport, Outcome};
use corpuskit_core::pii::{EntityType, MaskReport};
use corpuskit_crawler::CrawlSummary;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Stage;
use crate::stages::write_atomic;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRun {
    pub stage: Stage,
    /// File names relative to the run directory, or the input path as
    /// configured.
    pub input: Option<String>,
    pub output: Option<String>,
    pub records_in: u64,
    pub records_out: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

impl OutputFile {
    pub fn describe(dir: &Path, name: &str) -> io::Result<Self> {
        let mut f = File::open(dir.join(name))?;
        let mut hasher = Sha256::new();
        let mut buf = vec![0u8; 1 << 16];
        let mut bytes = 0u64;
        loop {
            let n = f.read(&mut buf)?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
            bytes += n as u64;
        }
        Ok(Self {
            name: name.to_string(),
            bytes,
            sha256: format!("{:x}", hasher.finalize()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityCount {
    pub entity_type: EntityType,
    pub count: u64,
}

/// Field-level screening and masking outcomes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnonymizationSummary {
    pub text_fields_processed: u64,
    pub fields_with_pii_detected: u64,
    pub total_entities_masked: u64,
    pub removed_spam: u64,
    pub removed_blocklist: u64,
    pub removed_too_long: u64,
    /// Every entity type, most frequent first.
    pub entities: Vec<EntityCount>,
}

impl AnonymizationSummary {
    pub fn from_reports(clean: Option<&CleanReport>, mask: Option<&MaskReport>) -> Self {
        let fields = clean
            .map(|c| c.fields_processed)
            .or(mask.map(|m| m.fields_processed))
            .unwrap_or(0);
        let removed = |o| clean.map_or(0, |c| c.count(o));
        let mut entities: Vec<EntityCount> = EntityType::ALL
            .iter()
            .map(|&t| EntityCount {
                entity_type: t,
                count: mask.map_or(0, |m| m.count(t)),
            })
            .collect();
        // stable: ties keep the canonical type order
        entities.sort_by(|a, b| b.count.cmp(&a.count));
        Self {
            text_fields_processed: fields,
            fields_with_pii_detected: mask.map_or(0, |m| m.fields_with_detection),
            total_entities_masked: mask.map_or(0, |m| m.entities_masked),
            removed_spam: removed(Outcome::RemovedSpam),
            removed_blocklist: removed(Outcome::RemovedBlocklist),
            removed_too_long: removed(Outcome::RemovedTooLong),
            entities,
        }
    }

    pub fn count(&self, t: EntityType) -> u64 {
        self.entities.iter().find(|e| e.entity_type == t).map_or(0, |e| e.count)
    }
}

/// What a run did, without timings: identical inputs and config give an
/// identical manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub toolkit_version: String,
    pub config_hash: String,
    pub fused: bool,
    pub input: Option<String>,
    pub stages: Vec<StageRun>,
    pub crawl: Option<CrawlSummary>,
    /// The crawl finished but skipped posts.
    pub partial_crawl: bool,
    pub clean: Option<CleanReport>,
    pub mask: Option<MaskReport>,
    pub langid: Option<TagReport>,
    pub anonymization: AnonymizationSummary,
    /// The final record file.
    pub dataset: Option<OutputFile>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        write_pretty(path, self)
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageRun> {
        self.stages.iter().find(|s| s.stage == stage)
    }
}

/// Wall-clock seconds per stage; kept apart from the manifest so that the
/// manifest stays reproducible.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub parallelism: usize,
    pub stages: BTreeMap<String, f64>,
    pub total_seconds: f64,
}

impl Timings {
    pub fn write(&self, path: &Path) -> io::Result<()> {
        write_pretty(path, self)
    }
}

pub(crate) fn write_pretty<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}
