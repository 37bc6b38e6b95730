//! Post and comment records and their line-delimited JSON encoding.
//!
//! One record per line. On input `comments` may be a nested array or a
//! string holding a JSON-encoded array; output always uses the nested form.
//! Fields not named here are kept in `extras` and written back unchanged.

mod io;
mod time;

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use io::{open_lines, read_corpus, write_corpus, LineReader, RawLine};
pub use time::{format_timestamp, parse_timestamp};

/// JSON nesting allowed in one line. Each comment level costs two levels
/// (object + `replies` array), so this admits reply chains ~500 deep.
pub const MAX_JSON_NESTING: usize = 1024;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum RecordError {
    #[error("line {line}: malformed record: {message}")]
    MalformedSyntax { line: usize, message: String },
    #[error("line {line}: schema violation at `{path}`: {message}")]
    SchemaViolation {
        line: usize,
        path: String,
        message: String,
    },
    #[error("line {line}: duplicate post_id {post_id:?}")]
    DuplicatePostId { line: usize, post_id: String },
    #[error("{0}")]
    Io(String),
}

impl RecordError {
    pub fn line(&self) -> Option<usize> {
        match self {
            Self::MalformedSyntax { line, .. }
            | Self::SchemaViolation { line, .. }
            | Self::DuplicatePostId { line, .. } => Some(*line),
            Self::Io(_) => None,
        }
    }

    fn with_line(self, n: usize) -> Self {
        match self {
            Self::MalformedSyntax { message, .. } => Self::MalformedSyntax { line: n, message },
            Self::SchemaViolation { path, message, .. } => Self::SchemaViolation {
                line: n,
                path,
                message,
            },
            Self::DuplicatePostId { post_id, .. } => Self::DuplicatePostId { line: n, post_id },
            other => other,
        }
    }
}

impl From<std::io::Error> for RecordError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

/// One post with its metadata and embedded comment tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: String,
    pub title: String,
    pub content: String,
    #[serde(default)]
    pub url: Option<String>,
    pub upvotes: u64,
    pub downvotes: u64,
    /// Platform counter. Analytics use the parsed tree instead.
    pub comment_count: u64,
    #[serde(with = "time")]
    pub created_at: DateTime<Utc>,
    pub submolt_id: String,
    pub submolt_name: String,
    pub author_id: String,
    pub author_name: String,
    #[serde(default)]
    pub lang: Option<String>,
    #[serde(default)]
    pub lang_score: Option<f64>,
    #[serde(deserialize_with = "comments_nested_or_encoded")]
    pub comments: Vec<CommentNode>,
    #[serde(flatten)]
    pub extras: BTreeMap<String, Value>,
}

/// A comment; replies nest recursively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommentNode {
    pub id: String,
    pub content: String,
    #[serde(default)]
    pub parent_id: Option<String>,
    pub upvotes: u64,
    pub downvotes: u64,
    #[serde(with = "time")]
    pub created_at: DateTime<Utc>,
    pub author_id: String,
    pub author_name: String,
    #[serde(default)]
    pub lang: Option<String>,
    #[serde(default)]
    pub lang_score: Option<f64>,
    #[serde(default)]
    pub replies: Vec<CommentNode>,
    #[serde(flatten)]
    pub extras: BTreeMap<String, Value>,
}

/// Where a corpus came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub window_start: Option<DateTime<Utc>>,
    pub window_end: Option<DateTime<Utc>>,
    #[serde(default)]
    pub feeds: Vec<String>,
}

/// An ordered set of posts plus source metadata.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub posts: Vec<PostRecord>,
    pub meta: CorpusMeta,
}

impl Corpus {
    pub fn new(posts: Vec<PostRecord>) -> Self {
        Self {
            posts,
            meta: CorpusMeta::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }
}

impl PostRecord {
    /// Number of comment nodes at any depth.
    pub fn node_count(&self) -> usize {
        self.flatten_comments().len()
    }

    /// Pre-order traversal paired with depth (top-level comments are 0).
    pub fn flatten_comments(&self) -> Vec<(&CommentNode, usize)> {
        flatten_comments(&self.comments)
    }

    /// Checks the structural invariants that serde cannot express.
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.post_id.is_empty() {
            return Err(schema("post_id", "must be non-empty"));
        }
        check_score("lang_score", self.lang_score)?;
        for (i, c) in self.comments.iter().enumerate() {
            validate_node(c, &format!("comments[{i}]"))?;
        }
        Ok(())
    }

    /// Visits every comment node mutably, parents before children.
    pub fn for_each_comment_mut(&mut self, mut f: impl FnMut(&mut CommentNode)) {
        fn walk(nodes: &mut [CommentNode], f: &mut dyn FnMut(&mut CommentNode)) {
            for n in nodes {
                f(n);
                walk(&mut n.replies, f);
            }
        }
        walk(&mut self.comments, &mut f);
    }
}

/// Pre-order traversal of a comment forest with depths.
pub fn flatten_comments(roots: &[CommentNode]) -> Vec<(&CommentNode, usize)> {
    let mut out = Vec::new();
    let mut stack: Vec<(&CommentNode, usize)> = roots.iter().rev().map(|c| (c, 0)).collect();
    while let Some((node, depth)) = stack.pop() {
        out.push((node, depth));
        stack.extend(node.replies.iter().rev().map(|c| (c, depth + 1)));
    }
    out
}

fn validate_node(node: &CommentNode, path: &str) -> Result<(), RecordError> {
    check_score(&format!("{path}.lang_score"), node.lang_score)?;
    for (i, child) in node.replies.iter().enumerate() {
        let child_path = format!("{path}.replies[{i}]");
        if let Some(pid) = &child.parent_id {
            if *pid != node.id {
                return Err(schema(
                    &format!("{child_path}.parent_id"),
                    &format!(
                        "comment {:?} has parent_id {:?} but is nested under {:?}",
                        child.id, pid, node.id
                    ),
                ));
            }
        }
        validate_node(child, &child_path)?;
    }
    Ok(())
}

fn check_score(path: &str, score: Option<f64>) -> Result<(), RecordError> {
    match score {
        Some(s) if !(0.0..=1.0).contains(&s) => {
            Err(schema(path, &format!("score {s} outside [0, 1]")))
        }
        _ => Ok(()),
    }
}

fn schema(path: &str, message: &str) -> RecordError {
    RecordError::SchemaViolation {
        line: 0,
        path: path.to_string(),
        message: message.to_string(),
    }
}

/// Parses one interchange line. Errors report line 0; see [`parse_post_at`].
pub fn parse_post(line: &str) -> Result<PostRecord, RecordError> {
    parse_post_at(line, 0)
}

/// Parses one interchange line, tagging errors with `line_no`.
pub fn parse_post_at(line: &str, line_no: usize) -> Result<PostRecord, RecordError> {
    parse_inner(line).map_err(|e| e.with_line(line_no))
}

fn parse_inner(line: &str) -> Result<PostRecord, RecordError> {
    check_nesting(line)?;
    let mut de = serde_json::Deserializer::from_str(line);
    de.disable_recursion_limit();
    let record: PostRecord = serde_path_to_error::deserialize(&mut de).map_err(classify)?;
    de.end().map_err(|e| RecordError::MalformedSyntax {
        line: 0,
        message: e.to_string(),
    })?;
    record.validate()?;
    Ok(record)
}

fn classify(err: serde_path_to_error::Error<serde_json::Error>) -> RecordError {
    let path = err.path().to_string();
    let inner = err.into_inner();
    match inner.classify() {
        serde_json::error::Category::Data => RecordError::SchemaViolation {
            line: 0,
            path,
            message: inner.to_string(),
        },
        _ => RecordError::MalformedSyntax {
            line: 0,
            message: inner.to_string(),
        },
    }
}

/// Rejects input nested deeper than [`MAX_JSON_NESTING`] before the
/// recursive deserializer sees it.
fn check_nesting(text: &str) -> Result<(), RecordError> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for &b in text.as_bytes() {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' | b'[' => {
                depth += 1;
                if depth > MAX_JSON_NESTING {
                    return Err(schema(
                        "comments",
                        &format!("nesting deeper than {MAX_JSON_NESTING} levels"),
                    ));
                }
            }
            b'}' | b']' => depth = depth.saturating_sub(1),
            _ => {}
        }
    }
    Ok(())
}

/// Serializes a record as a single line (no trailing newline).
pub fn serialize_post(record: &PostRecord) -> String {
    serde_json::to_string(record).expect("record serialization is infallible")
}

fn comments_nested_or_encoded<'de, D>(deserializer: D) -> Result<Vec<CommentNode>, D::Error>
where
    D: Deserializer<'de>,
{
    struct CommentsVisitor;

    impl<'de> Visitor<'de> for CommentsVisitor {
        type Value = Vec<CommentNode>;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an array of comments or a JSON-encoded array of comments")
        }

        fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
            let mut out = Vec::with_capacity(seq.size_hint().unwrap_or(0));
            while let Some(node) = seq.next_element()? {
                out.push(node);
            }
            Ok(out)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
            check_nesting(v).map_err(|e| E::custom(e.to_string()))?;
            let mut de = serde_json::Deserializer::from_str(v);
            de.disable_recursion_limit();
            let nodes = Vec::<CommentNode>::deserialize(&mut de)
                .map_err(|e| E::custom(format!("encoded comments: {e}")))?;
            de.end()
                .map_err(|e| E::custom(format!("encoded comments: {e}")))?;
            Ok(nodes)
        }

        fn visit_unit<E: de::Error>(self) -> Result<Self::Value, E> {
            Ok(Vec::new())
        }

        fn visit_none<E: de::Error>(self) -> Result<Self::Value, E> {
            Ok(Vec::new())
        }
    }

    deserializer.deserialize_any(CommentsVisitor)
}
