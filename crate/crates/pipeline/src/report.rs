//! Release-statistics and anonymization report, as JSON and as text.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::manifest::{write_pretty, AnonymizationSummary, RunManifest};
use crate::stages::{write_atomic, Analysis};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DateRange {
    pub first: String,
    pub last: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominantLanguage {
    pub lang: String,
    /// Fraction of language-tagged posts.
    pub share: f64,
}

/// Corpus-level totals, keyed by their display labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleaseStatistics {
    #[serde(rename = "Total Posts")]
    pub total_posts: u64,
    #[serde(rename = "Total Comments")]
    pub total_comments: u64,
    #[serde(rename = "Unique Communities")]
    pub unique_communities: u64,
    #[serde(rename = "Unique Authors")]
    pub unique_authors: u64,
    #[serde(rename = "Date Range")]
    pub date_range: Option<DateRange>,
    #[serde(rename = "Avg Comments / Post")]
    pub avg_comments_per_post: f64,
    #[serde(rename = "Avg Post Length (chars)")]
    pub avg_post_length_chars: f64,
    #[serde(rename = "Dominant Language")]
    pub dominant_language: Option<DominantLanguage>,
    /// Bytes of the final record file.
    #[serde(rename = "Dataset Size on Disk")]
    pub dataset_size_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityRow {
    #[serde(rename = "Entity type")]
    pub entity_type: String,
    #[serde(rename = "Count")]
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnonymizationTable {
    #[serde(rename = "Text fields processed")]
    pub text_fields_processed: u64,
    #[serde(rename = "Fields with PII detected")]
    pub fields_with_pii_detected: u64,
    #[serde(rename = "Total entities masked")]
    pub total_entities_masked: u64,
    #[serde(rename = "Removed (spam)")]
    pub removed_spam: u64,
    #[serde(rename = "Removed (blocklist)")]
    pub removed_blocklist: u64,
    #[serde(rename = "Removed (too long)")]
    pub removed_too_long: u64,
    #[serde(rename = "Entities")]
    pub entities: Vec<EntityRow>,
}

impl From<&AnonymizationSummary> for AnonymizationTable {
    fn from(s: &AnonymizationSummary) -> Self {
        Self {
            text_fields_processed: s.text_fields_processed,
            fields_with_pii_detected: s.fields_with_pii_detected,
            total_entities_masked: s.total_entities_masked,
            removed_spam: s.removed_spam,
            removed_blocklist: s.removed_blocklist,
            removed_too_long: s.removed_too_long,
            entities: s
                .entities
                .iter()
                .map(|e| EntityRow {
                    entity_type: e.entity_type.as_str().to_string(),
                    count: e.count,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub report_version: u32,
    pub empty: bool,
    pub config_hash: String,
    pub partial_crawl: bool,
    pub release_statistics: ReleaseStatistics,
    pub anonymization_summary: AnonymizationTable,
}

/// Builds the report from a finished run. An empty corpus gives zeros and
/// `empty: true`.
pub fn build_report(manifest: &RunManifest, analysis: &Analysis) -> Report {
    let s = &analysis.stats.summary;
    let date_range = match (&s.first_post, &s.last_post) {
        (Some(first), Some(last)) => Some(DateRange {
            first: first.clone(),
            last: last.clone(),
        }),
        _ => None,
    };
    let dominant_language = analysis.stats.languages.dominant.as_ref().map(|d| DominantLanguage {
        lang: d.lang.clone(),
        share: d.share,
    });
    Report {
        report_version: REPORT_VERSION,
        empty: analysis.stats.empty,
        config_hash: manifest.config_hash.clone(),
        partial_crawl: manifest.partial_crawl,
        release_statistics: ReleaseStatistics {
            total_posts: s.total_posts,
            total_comments: s.total_comments,
            unique_communities: s.unique_communities,
            unique_authors: s.unique_authors,
            date_range,
            avg_comments_per_post: s.avg_comments_per_post,
            avg_post_length_chars: s.avg_post_length_chars,
            dominant_language,
            dataset_size_bytes: manifest.dataset.as_ref().map_or(0, |d| d.bytes),
        },
        anonymization_summary: AnonymizationTable::from(&manifest.anonymization),
    }
}

fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn human_bytes(n: u64) -> String {
    const UNITS: [&str; 5] = ["B", "KB", "MB", "GB", "TB"];
    let mut v = n as f64;
    let mut unit = 0;
    while v >= 1000.0 && unit < UNITS.len() - 1 {
        v /= 1000.0;
        unit += 1;
    }
    if unit == 0 {
        format!("{n} B")
    } else {
        format!("{v:.1} {}", UNITS[unit])
    }
}

fn table(out: &mut String, title: &str, header: (&str, &str), rows: &[(String, String)]) {
    let w = rows.iter().map(|r| r.0.chars().count()).chain([header.0.len()]).max().unwrap_or(0);
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "  {:<w$}  {}", header.0, header.1);
    for (k, v) in rows {
        let _ = writeln!(out, "  {k:<w$}  {v}");
    }
}

impl Report {
    /// Plain-text rendering of both tables.
    pub fn to_text(&self) -> String {
        let r = &self.release_statistics;
        let date = |s: &str| s.get(..10).unwrap_or(s).to_string();
        let rows = vec![
            ("Total Posts".into(), thousands(r.total_posts)),
            ("Total Comments".into(), thousands(r.total_comments)),
            ("Unique Communities".into(), thousands(r.unique_communities)),
            ("Unique Authors".into(), thousands(r.unique_authors)),
            (
                "Date Range".into(),
                r.date_range
                    .as_ref()
                    .map_or("-".into(), |d| format!("{} to {}", date(&d.first), date(&d.last))),
            ),
            ("Avg Comments / Post".into(), format!("{:.2}", r.avg_comments_per_post)),
            ("Avg Post Length (chars)".into(), thousands(r.avg_post_length_chars.round() as u64)),
            (
                "Dominant Language".into(),
                r.dominant_language
                    .as_ref()
                    .map_or("-".into(), |d| format!("{} ({:.1}%)", d.lang, d.share * 100.0)),
            ),
            ("Dataset Size on Disk".into(), human_bytes(r.dataset_size_bytes)),
        ];
        let mut out = String::new();
        if self.empty {
            out.push_str("(empty corpus)\n\n");
        }
        if self.partial_crawl {
            out.push_str("(partial crawl: some posts were skipped)\n\n");
        }
        table(&mut out, "Dataset statistics", ("Metric", "Value"), &rows);
        out.push('\n');
        let a = &self.anonymization_summary;
        let rows = vec![
            ("Text fields processed".into(), thousands(a.text_fields_processed)),
            ("Fields with PII detected".into(), thousands(a.fields_with_pii_detected)),
            ("Total entities masked".into(), thousands(a.total_entities_masked)),
            ("Removed (spam)".into(), thousands(a.removed_spam)),
            ("Removed (blocklist)".into(), thousands(a.removed_blocklist)),
            ("Removed (too long)".into(), thousands(a.removed_too_long)),
        ];
        table(&mut out, "Anonymization summary", ("Metric", "Value"), &rows);
        out.push('\n');
        let rows: Vec<(String, String)> = a
            .entities
            .iter()
            .map(|e| (e.entity_type.clone(), thousands(e.count)))
            .collect();
        table(&mut out, "Entities masked by type", ("Entity type", "Count"), &rows);
        out
    }

    /// Writes `report.json` and `report.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        let json = dir.join("report.json");
        write_pretty(&json, self)?;
        let text = dir.join("report.txt");
        let rendered = self.to_text();
        write_atomic(&text, |w| w.write_all(rendered.as_bytes()))?;
        Ok(vec![json, text])
    }
}

/// Builds the report and writes it next to the run outputs.
pub fn emit_report(manifest: &RunManifest, analysis: &Analysis, dir: &Path) -> std::io::Result<Report> {
    let report = build_report(manifest, analysis);
    report.write(dir)?;
    Ok(report)
}
