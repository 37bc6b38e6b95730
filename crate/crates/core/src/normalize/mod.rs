//! Field-level cleaning: entity decoding, whitespace collapse, coarse
//! screening with typed sentinels, and template hashing.

mod blocklist;
mod spam;
mod template;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::PostRecord;

pub use blocklist::{apply_blocklist, Blocklist, BlocklistError};
pub use spam::{detect_spam, SpamParams, SpamParamsError};
pub use template::{
    duplicate_report, template_hash, DuplicateCluster, DuplicateCounter, TemplateHash,
    TEMPLATE_PREFIX_CHARS,
};

pub const SENTINEL_SPAM: &str = "<REMOVED-SPAM>";
pub const SENTINEL_BLOCKLIST: &str = "<REMOVED-BLOCKLIST>";
pub const SENTINEL_TOO_LONG: &str = "<REMOVED-TOO-LONG>";

/// Default whitespace-token ceiling for a single field.
pub const DEFAULT_LIMIT_TOKENS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Clean,
    RemovedSpam,
    RemovedBlocklist,
    RemovedTooLong,
}

impl Outcome {
    pub fn sentinel(self) -> Option<&'static str> {
        match self {
            Outcome::Clean => None,
            Outcome::RemovedSpam => Some(SENTINEL_SPAM),
            Outcome::RemovedBlocklist => Some(SENTINEL_BLOCKLIST),
            Outcome::RemovedTooLong => Some(SENTINEL_TOO_LONG),
        }
    }

    /// Maps an exact sentinel string back to its outcome.
    pub fn from_sentinel(text: &str) -> Option<Outcome> {
        match text {
            SENTINEL_SPAM => Some(Outcome::RemovedSpam),
            SENTINEL_BLOCKLIST => Some(Outcome::RemovedBlocklist),
            SENTINEL_TOO_LONG => Some(Outcome::RemovedTooLong),
            _ => None,
        }
    }
}

/// True when a stored field is one of the removal sentinels. Downstream
/// stages skip such fields.
pub fn is_sentinel(text: &str) -> bool {
    Outcome::from_sentinel(text).is_some()
}

/// Outcome of sanitizing one text field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldResult {
    pub outcome: Outcome,
    /// Cleaned text; present iff the outcome is [`Outcome::Clean`].
    pub text: Option<String>,
    pub reason: Option<String>,
}

impl FieldResult {
    fn removed(outcome: Outcome, reason: impl Into<String>) -> Self {
        Self {
            outcome,
            text: None,
            reason: Some(reason.into()),
        }
    }

    /// The string stored back into the record.
    pub fn render(&self) -> &str {
        match self.outcome.sentinel() {
            Some(s) => s,
            None => self.text.as_deref().unwrap_or_default(),
        }
    }

    pub fn into_rendered(self) -> String {
        match self.outcome.sentinel() {
            Some(s) => s.to_string(),
            None => self.text.unwrap_or_default(),
        }
    }

    /// Clean text that nonetheless contains a sentinel literal.
    pub fn has_sentinel_collision(&self) -> bool {
        self.text
            .as_deref()
            .is_some_and(|t| t.contains("<REMOVED-") && contains_sentinel(t))
    }
}

impl fmt::Display for FieldResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.render())
    }
}

fn contains_sentinel(t: &str) -> bool {
    [SENTINEL_SPAM, SENTINEL_BLOCKLIST, SENTINEL_TOO_LONG]
        .iter()
        .any(|s| t.contains(s))
}

/// Decodes HTML/XML character references until none remain, collapses
/// runs of Unicode whitespace to one space and trims the ends.
///
/// Decoding runs to a fixpoint so doubly escaped input (`&amp;amp;`) ends up
/// fully decoded and the function is idempotent.
pub fn normalize_text(raw: &str) -> String {
    let mut text = std::borrow::Cow::Borrowed(raw);
    while text.contains('&') {
        let decoded = html_escape::decode_html_entities(text.as_ref());
        if decoded == text.as_ref() {
            break;
        }
        text = std::borrow::Cow::Owned(decoded.into_owned());
    }
    collapse_whitespace(&text)
}

fn collapse_whitespace(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for tok in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(tok);
    }
    out
}

/// True iff the text has more than `limit_tokens` whitespace tokens.
pub fn exceeds_length(text: &str, limit_tokens: usize) -> bool {
    text.split_whitespace().nth(limit_tokens).is_some()
}

/// Applies normalization then the spam, blocklist and length checks in that
/// order; the first hit wins.
#[derive(Debug, Clone)]
pub struct Sanitizer {
    pub params: SpamParams,
    pub blocklist: Blocklist,
    pub limit_tokens: usize,
}

impl Default for Sanitizer {
    fn default() -> Self {
        Self {
            params: SpamParams::default(),
            blocklist: Blocklist::empty(),
            limit_tokens: DEFAULT_LIMIT_TOKENS,
        }
    }
}

impl Sanitizer {
    pub fn new(params: SpamParams, blocklist: Blocklist, limit_tokens: usize) -> Self {
        Self {
            params,
            blocklist,
            limit_tokens,
        }
    }

    pub fn sanitize(&self, raw: &str) -> FieldResult {
        sanitize_field(raw, &self.params, &self.blocklist, self.limit_tokens)
    }

    /// Sanitizes title, body and every comment body in place. Records are
    /// never dropped; removed fields hold their sentinel.
    pub fn clean_record_in_place(&self, record: &mut PostRecord) -> CleanReport {
        let mut report = CleanReport::default();
        let mut apply = |field: &mut String| {
            let result = self.sanitize(field);
            report.fields_processed += 1;
            if result.outcome != Outcome::Clean {
                *report.removed.entry(result.outcome).or_default() += 1;
            }
            *field = result.into_rendered();
        };
        apply(&mut record.title);
        apply(&mut record.content);
        record.for_each_comment_mut(|c| apply(&mut c.content));
        report
    }

    pub fn clean_record(&self, record: &PostRecord) -> (PostRecord, CleanReport) {
        let mut out = record.clone();
        let report = self.clean_record_in_place(&mut out);
        (out, report)
    }
}

/// Field counts from cleaning. Merging is associative.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanReport {
    pub fields_processed: u64,
    /// Removed fields by outcome.
    pub removed: BTreeMap<Outcome, u64>,
}

impl CleanReport {
    pub fn merge(&mut self, other: &CleanReport) {
        self.fields_processed += other.fields_processed;
        for (o, n) in &other.removed {
            *self.removed.entry(*o).or_default() += n;
        }
    }

    pub fn count(&self, outcome: Outcome) -> u64 {
        self.removed.get(&outcome).copied().unwrap_or(0)
    }
}

pub fn sanitize_field(
    raw: &str,
    params: &SpamParams,
    blocklist: &Blocklist,
    limit_tokens: usize,
) -> FieldResult {
    let text = normalize_text(raw);
    if let Some(outcome) = Outcome::from_sentinel(&text) {
        return FieldResult::removed(outcome, "already removed");
    }
    if detect_spam(&text, params) {
        return FieldResult::removed(Outcome::RemovedSpam, "repeated tokens or phrases");
    }
    if let Some(phrase) = blocklist.first_match(&text) {
        return FieldResult::removed(
            Outcome::RemovedBlocklist,
            format!("blocklist phrase {phrase:?}"),
        );
    }
    if exceeds_length(&text, limit_tokens) {
        return FieldResult::removed(
            Outcome::RemovedTooLong,
            format!("more than {limit_tokens} tokens"),
        );
    }
    let reason = contains_sentinel(&text).then(|| "input contains a sentinel literal".to_string());
    FieldResult {
        outcome: Outcome::Clean,
        text: Some(text),
        reason,
    }
}
