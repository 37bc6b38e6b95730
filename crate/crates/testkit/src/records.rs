//! Random posts with arbitrary comment trees.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, TimeZone, Utc};
use corpuskit_core::pii::EntityType;
use corpuskit_core::{CommentNode, PostRecord};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use crate::planted::FieldBuilder;
use crate::prose;
use crate::secrets;

/// Knobs for [`random_record`].
#[derive(Debug, Clone)]
pub struct RecordShape {
    /// Deepest allowed comment depth (top level is 0).
    pub max_depth: usize,
    pub max_comments: usize,
    /// Chance that a text field carries a planted secret.
    pub pii_rate: f64,
    /// Chance of a deep reply chain reaching `max_depth`.
    pub chain_rate: f64,
}

impl Default for RecordShape {
    fn default() -> Self {
        Self {
            max_depth: 31,
            max_comments: 40,
            pii_rate: 0.2,
            chain_rate: 0.1,
        }
    }
}

const SNIPPETS: &[&str] = &[
    "café déjà vu",
    "naïve façade",
    "日本語のテキスト",
    "emoji 🦀🚀 ok",
    "Ελληνικά γράμματα",
    "русский текст",
    "tabs\tand  spaces",
    "quote \" and backslash \\",
    "<b>markup</b> &amp; entity",
    "",
];

fn base_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2026, 1, 27, 0, 0, 0).unwrap()
}

/// Random text mixing prose, odd characters and occasional secrets.
pub fn random_text<R: Rng>(rng: &mut R, pii_rate: f64) -> String {
    let mut b = FieldBuilder::default();
    if rng.gen_bool(0.05) {
        return String::new();
    }
    b.push_text(&prose::window(rng, 1, 30));
    if rng.gen_bool(0.3) {
        b.push_text(SNIPPETS.choose(rng).unwrap());
    }
    while rng.gen_bool(pii_rate) {
        let kind = *EntityType::ALL.choose(rng).unwrap();
        let value = secrets::generate(kind, rng);
        b.push_plant(kind, &value);
        b.push_text(&prose::window(rng, 0, 8));
    }
    b.finish().text
}

fn random_extras<R: Rng>(rng: &mut R) -> BTreeMap<String, Value> {
    let mut extras = BTreeMap::new();
    if rng.gen_bool(0.3) {
        extras.insert("flair".into(), json!(["x", "meta", "🦀"].choose(rng).unwrap()));
    }
    if rng.gen_bool(0.2) {
        extras.insert(
            "awards".into(),
            json!({"count": rng.gen_range(0..5), "kinds": ["gold", "silver"], "ratio": rng.gen::<f64>()}),
        );
    }
    if rng.gen_bool(0.1) {
        extras.insert("is_pinned".into(), json!(rng.gen::<bool>()));
    }
    extras
}

fn random_time<R: Rng>(rng: &mut R, after: DateTime<Utc>) -> DateTime<Utc> {
    // a few comments predate their post, as platform clocks sometimes do
    let secs = rng.gen_range(-120..86_400 * 3);
    let millis = if rng.gen_bool(0.3) { rng.gen_range(0..1000) } else { 0 };
    after + Duration::seconds(secs) + Duration::milliseconds(millis)
}

struct Arena {
    nodes: Vec<(CommentNode, Option<usize>, usize)>, // node, parent index, depth
}

impl Arena {
    fn into_forest(self) -> Vec<CommentNode> {
        let n = self.nodes.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for (i, (_, parent, _)) in self.nodes.iter().enumerate() {
            match parent {
                Some(p) => children[*p].push(i),
                None => roots.push(i),
            }
        }
        let mut slots: Vec<Option<CommentNode>> = self.nodes.into_iter().map(|(c, _, _)| Some(c)).collect();
        // children always have larger indices, so build from the back
        let mut built: Vec<Option<CommentNode>> = vec![None; n];
        for i in (0..n).rev() {
            let mut node = slots[i].take().unwrap();
            node.replies = children[i].iter().map(|&c| built[c].take().unwrap()).collect();
            built[i] = Some(node);
        }
        roots.into_iter().map(|r| built[r].take().unwrap()).collect()
    }
}

fn comment<R: Rng>(rng: &mut R, id: String, parent_id: Option<String>, post_time: DateTime<Utc>, shape: &RecordShape) -> CommentNode {
    CommentNode {
        id,
        content: random_text(rng, shape.pii_rate),
        parent_id,
        upvotes: rng.gen_range(0..500),
        downvotes: rng.gen_range(0..50),
        created_at: random_time(rng, post_time),
        author_id: format!("agent-{}", rng.gen_range(0..200)),
        author_name: format!("Agent{}", rng.gen_range(0..200)),
        lang: rng.gen_bool(0.3).then(|| ["en", "es", "und"].choose(rng).unwrap().to_string()),
        lang_score: rng.gen_bool(0.3).then(|| rng.gen::<f64>()),
        replies: Vec::new(),
        extras: random_extras(rng),
    }
}

/// A random post numbered `n`. Ids are unique per `n`.
pub fn random_record<R: Rng>(rng: &mut R, n: usize, shape: &RecordShape) -> PostRecord {
    let created_at = base_time() + Duration::seconds(rng.gen_range(0..86_400 * 11));
    let mut arena = Arena { nodes: Vec::new() };
    let count = rng.gen_range(0..=shape.max_comments);
    for i in 0..count {
        let parent = if arena.nodes.is_empty() || rng.gen_bool(0.35) {
            None
        } else {
            let p = rng.gen_range(0..arena.nodes.len());
            (arena.nodes[p].2 < shape.max_depth).then_some(p)
        };
        let depth = parent.map_or(0, |p| arena.nodes[p].2 + 1);
        let parent_id = parent.map(|p| arena.nodes[p].0.id.clone());
        let node = comment(rng, format!("c{n}-{i}"), parent_id, created_at, shape);
        arena.nodes.push((node, parent, depth));
    }
    if rng.gen_bool(shape.chain_rate) {
        let mut parent: Option<usize> = None;
        for d in 0..=shape.max_depth {
            let parent_id = parent.map(|p| arena.nodes[p].0.id.clone());
            let node = comment(rng, format!("c{n}-chain{d}"), parent_id, created_at, shape);
            arena.nodes.push((node, parent, d));
            parent = Some(arena.nodes.len() - 1);
        }
    }
    let comments = arena.into_forest();
    let submolt = rng.gen_range(0..25);
    let author = rng.gen_range(0..60);
    PostRecord {
        post_id: format!("post-{n:06}"),
        title: prose::window(rng, 2, 10),
        content: random_text(rng, shape.pii_rate),
        url: rng.gen_bool(0.2).then(|| format!("https://example{}.org/item/{n}", rng.gen_range(0..5))),
        upvotes: rng.gen_range(0..10_000),
        downvotes: rng.gen_range(0..100),
        comment_count: rng.gen_range(0..100),
        created_at,
        submolt_id: format!("sub-{submolt}"),
        submolt_name: format!("community{submolt}"),
        author_id: format!("agent-{author}"),
        author_name: format!("Agent{author}"),
        lang: rng.gen_bool(0.3).then(|| "en".to_string()),
        lang_score: rng.gen_bool(0.3).then(|| rng.gen::<f64>()),
        comments,
        extras: random_extras(rng),
    }
}

/// A post whose single reply chain bottoms out at depth `depth`.
pub fn chain_record(post_id: &str, depth: usize) -> PostRecord {
    let t = base_time();
    let mut node: Option<CommentNode> = None;
    for d in (0..=depth).rev() {
        let replies = node.take().into_iter().collect();
        node = Some(CommentNode {
            id: format!("{post_id}-d{d}"),
            content: format!("reply at depth {d}"),
            parent_id: (d > 0).then(|| format!("{post_id}-d{}", d - 1)),
            upvotes: 0,
            downvotes: 0,
            created_at: t + Duration::seconds(60 * (d as i64 + 1)),
            author_id: format!("agent-{}", d % 3),
            author_name: format!("Agent{}", d % 3),
            lang: None,
            lang_score: None,
            replies,
            extras: BTreeMap::new(),
        });
    }
    PostRecord {
        post_id: post_id.to_string(),
        title: "a long thread".into(),
        content: "the thread starts here".into(),
        url: None,
        upvotes: 1,
        downvotes: 0,
        comment_count: depth as u64 + 1,
        created_at: t,
        submolt_id: "sub-deep".into(),
        submolt_name: "deep".into(),
        author_id: "agent-root".into(),
        author_name: "Root".into(),
        lang: None,
        lang_score: None,
        comments: node.into_iter().collect(),
        extras: BTreeMap::new(),
    }
}
