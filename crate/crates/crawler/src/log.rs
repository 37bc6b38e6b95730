use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::feed::Feed;

/// One crawl event. Times are milliseconds since the crawl started.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum CrawlEvent {
    Batch { batch: u64, at_ms: u64, size: usize },
    Request { batch: u64, at_ms: u64, path: String, attempt: u32 },
    Response { at_ms: u64, path: String, status: Option<u16>, error: Option<String> },
    Page { feed: Feed, token: Option<String>, ids: usize, has_more: bool },
    Retry { path: String, attempt: u32, backoff_ms: u64, reason: String },
    NotFound { post_id: String },
    Failed { post_id: String, reason: String },
    Malformed { path: String, reason: String },
    OutOfWindow { post_id: String, created_at: String },
    Done { summary: CrawlSummary },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrawlSummary {
    pub requests: u64,
    pub batches: u64,
    pub retries: u64,
    pub pages: u64,
    pub discovered: u64,
    pub fetched: u64,
    pub not_found: u64,
    pub failed: u64,
    pub malformed: u64,
    pub out_of_window: u64,
}

impl CrawlSummary {
    /// Posts that were discovered but are missing from the corpus for a
    /// reason other than the time window.
    pub fn skipped(&self) -> u64 {
        self.not_found + self.failed + self.malformed
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CrawlLog {
    pub events: Vec<CrawlEvent>,
}

impl CrawlLog {
    pub fn push(&mut self, e: CrawlEvent) {
        tracing::debug!(event = ?e);
        self.events.push(e);
    }

    /// Start times of each batch, in order.
    pub fn batch_starts_ms(&self) -> Vec<u64> {
        self.events
            .iter()
            .filter_map(|e| match e {
                CrawlEvent::Batch { at_ms, .. } => Some(*at_ms),
                _ => None,
            })
            .collect()
    }

    pub fn count(&self, pred: impl Fn(&CrawlEvent) -> bool) -> usize {
        self.events.iter().filter(|e| pred(e)).count()
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }
}
