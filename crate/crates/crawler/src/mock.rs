//! In-repo mock of the forum API: `GET /feed/{feed}` and `GET /post/{id}`.
//!
//! Serves a fixed set of posts, injects faults per path, simulates latency
//! and records how many requests were in flight and when each one started.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use chrono::{DateTime, TimeZone, Utc};
use corpuskit_core::model::serialize_post;
use corpuskit_core::{CommentNode, PostRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use crate::feed::Feed;

/// Posts and the order each feed lists them in.
#[derive(Debug, Clone, Default)]
pub struct MockData {
    posts: BTreeMap<String, PostRecord>,
    feeds: BTreeMap<Feed, Vec<String>>,
}

impl MockData {
    /// Feeds are derived from the posts: `top` by score, `new` by recency,
    /// `discussed` by comment count.
    pub fn from_posts(posts: Vec<PostRecord>) -> Self {
        let mut top: Vec<&PostRecord> = posts.iter().collect();
        top.sort_by(|a, b| {
            let score = |p: &PostRecord| p.upvotes as i64 - p.downvotes as i64;
            score(b).cmp(&score(a)).then_with(|| a.post_id.cmp(&b.post_id))
        });
        let mut new = posts.iter().collect::<Vec<_>>();
        new.sort_by(|a, b| b.created_at.cmp(&a.created_at).then_with(|| a.post_id.cmp(&b.post_id)));
        let mut discussed = posts.iter().collect::<Vec<_>>();
        discussed.sort_by(|a, b| b.comment_count.cmp(&a.comment_count).then_with(|| a.post_id.cmp(&b.post_id)));
        let ids = |v: Vec<&PostRecord>| v.into_iter().map(|p| p.post_id.clone()).collect();
        let feeds = BTreeMap::from([
            (Feed::Top, ids(top)),
            (Feed::New, ids(new)),
            (Feed::Discussed, ids(discussed)),
        ]);
        Self {
            posts: posts.into_iter().map(|p| (p.post_id.clone(), p)).collect(),
            feeds,
        }
    }

    /// Overrides one feed's listing. Ids need not exist as posts.
    pub fn with_feed(mut self, feed: Feed, ids: Vec<String>) -> Self {
        self.feeds.insert(feed, ids);
        self
    }

    pub fn insert_post(&mut self, post: PostRecord) {
        self.posts.insert(post.post_id.clone(), post);
    }

    pub fn posts(&self) -> impl Iterator<Item = &PostRecord> {
        self.posts.values()
    }

    pub fn feed(&self, feed: Feed) -> &[String] {
        self.feeds.get(&feed).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Deterministic synthetic forum with `n` posts.
    pub fn synthetic(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let posts = (0..n).map(|i| synthetic_post(&mut rng, i)).collect();
        Self::from_posts(posts)
    }
}

const WORDS: &[&str] = &[
    "agent", "memory", "context", "tool", "loop", "prompt", "model", "shell", "token", "plan", "error",
    "retry", "queue", "graph", "daemon", "cache", "signal", "market", "poem", "river", "night", "build",
];
const SUBMOLTS: &[&str] = &["general", "agents", "philosophy", "crypto", "builds", "poetry"];

fn sentence<R: Rng>(rng: &mut R, min: usize, max: usize) -> String {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn synthetic_post<R: Rng>(rng: &mut R, i: usize) -> PostRecord {
    let base: DateTime<Utc> = Utc.with_ymd_and_hms(2026, 1, 28, 0, 0, 0).unwrap();
    let created_at = base + chrono::Duration::seconds(rng.gen_range(0..14 * 86_400));
    let post_id = format!("p{i:05}");
    let mut comments: Vec<CommentNode> = Vec::new();
    let n_comments = rng.gen_range(0..6);
    for c in 0..n_comments {
        let author = rng.gen_range(0..40);
        let node = CommentNode {
            id: format!("{post_id}-c{c}"),
            content: sentence(rng, 3, 20),
            parent_id: None,
            upvotes: rng.gen_range(0..20),
            downvotes: rng.gen_range(0..3),
            created_at: created_at + chrono::Duration::seconds(rng.gen_range(1..7200)),
            author_id: format!("a{author}"),
            author_name: format!("agent{author}"),
            lang: None,
            lang_score: None,
            replies: Vec::new(),
            extras: BTreeMap::new(),
        };
        match comments.last_mut() {
            Some(prev) if rng.gen_bool(0.3) => {
                let mut node = node;
                node.parent_id = Some(prev.id.clone());
                prev.replies.push(node);
            }
            _ => comments.push(node),
        }
    }
    let author = rng.gen_range(0..40);
    let submolt = rng.gen_range(0..SUBMOLTS.len());
    PostRecord {
        post_id: post_id.clone(),
        title: sentence(rng, 2, 8),
        content: sentence(rng, 5, 60),
        url: None,
        upvotes: rng.gen_range(0..200),
        downvotes: rng.gen_range(0..10),
        comment_count: n_comments as u64,
        created_at,
        submolt_id: format!("s{submolt}"),
        submolt_name: SUBMOLTS[submolt].to_string(),
        author_id: format!("a{author}"),
        author_name: format!("agent{author}"),
        lang: None,
        lang_score: None,
        comments,
        extras: BTreeMap::new(),
    }
}

/// Behaviour injected for one request path (e.g. `/post/p00001`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fault {
    /// 503 for the first `n` requests, normal afterwards.
    FailTimes(u32),
    /// Always this status with an error body.
    Status(u16),
    /// 200 with a body that is not valid JSON.
    Malformed,
}

#[derive(Debug, Clone)]
pub struct MockOptions {
    pub page_size: usize,
    pub latency: Duration,
    /// Every page after the first hands back the first page's cursor.
    pub cursor_loop: bool,
    /// Requests without `Authorization: Bearer <token>` get 401.
    pub bearer: Option<String>,
    pub faults: HashMap<String, Fault>,
}

impl Default for MockOptions {
    fn default() -> Self {
        Self {
            page_size: 25,
            latency: Duration::ZERO,
            cursor_loop: false,
            bearer: None,
            faults: HashMap::new(),
        }
    }
}

/// What the server saw. Times come from tokio's clock, so they are virtual
/// under paused time.
#[derive(Debug, Clone, Default)]
pub struct Observed {
    pub max_in_flight: usize,
    pub starts: Vec<(Duration, String)>,
    pub hits: HashMap<String, u32>,
}

#[derive(Debug)]
struct Recorder {
    origin: tokio::time::Instant,
    in_flight: usize,
    seen: Observed,
}

struct Shared {
    data: MockData,
    opts: MockOptions,
    rec: Mutex<Recorder>,
}

/// Cheap to clone; clones share data and recordings.
#[derive(Clone)]
pub struct MockServer {
    shared: Arc<Shared>,
}

struct InFlight<'a>(&'a Mutex<Recorder>);

impl Drop for InFlight<'_> {
    fn drop(&mut self) {
        self.0.lock().unwrap().in_flight -= 1;
    }
}

#[derive(Deserialize)]
struct PageQuery {
    cursor: Option<String>,
    offset: Option<String>,
}

fn error(status: StatusCode, message: &str) -> Response {
    (status, axum::Json(json!({ "error": message }))).into_response()
}

fn json_body(body: String) -> Response {
    ([("content-type", "application/json")], body).into_response()
}

impl MockServer {
    pub fn new(data: MockData, opts: MockOptions) -> Self {
        Self {
            shared: Arc::new(Shared {
                data,
                opts,
                rec: Mutex::new(Recorder {
                    origin: tokio::time::Instant::now(),
                    in_flight: 0,
                    seen: Observed::default(),
                }),
            }),
        }
    }

    pub fn router(&self) -> Router {
        Router::new()
            .route("/feed/{feed}", get(feed_handler))
            .route("/post/{id}", get(post_handler))
            .with_state(self.clone())
    }

    pub fn observed(&self) -> Observed {
        self.shared.rec.lock().unwrap().seen.clone()
    }

    pub fn data(&self) -> &MockData {
        &self.shared.data
    }

    /// Serves until the listener fails.
    pub async fn serve(self, listener: tokio::net::TcpListener) -> std::io::Result<()> {
        axum::serve(listener, self.router()).await
    }

    /// Shared prologue: bookkeeping, auth, latency and faults. Returns a
    /// response when the request should not reach the handler body.
    async fn enter(&self, path: &str, headers: &HeaderMap) -> (InFlight<'_>, Option<Response>) {
        let hit = {
            let mut rec = self.shared.rec.lock().unwrap();
            rec.in_flight += 1;
            rec.seen.max_in_flight = rec.seen.max_in_flight.max(rec.in_flight);
            let at = rec.origin.elapsed();
            rec.seen.starts.push((at, path.to_string()));
            let hit = rec.seen.hits.entry(path.to_string()).or_default();
            *hit += 1;
            *hit
        };
        let guard = InFlight(&self.shared.rec);
        if !self.shared.opts.latency.is_zero() {
            tokio::time::sleep(self.shared.opts.latency).await;
        }
        if let Some(token) = &self.shared.opts.bearer {
            let ok = headers
                .get("authorization")
                .and_then(|v| v.to_str().ok())
                .is_some_and(|v| v == format!("Bearer {token}"));
            if !ok {
                return (guard, Some(error(StatusCode::UNAUTHORIZED, "missing or wrong bearer token")));
            }
        }
        let early = match self.shared.opts.faults.get(path) {
            Some(Fault::FailTimes(n)) if hit <= *n => {
                Some(error(StatusCode::SERVICE_UNAVAILABLE, "temporarily unavailable"))
            }
            Some(Fault::Status(s)) => {
                let status = StatusCode::from_u16(*s).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
                Some(error(status, "injected failure"))
            }
            Some(Fault::Malformed) => Some(json_body("{\"post_id\": \"trunc".into())),
            _ => None,
        };
        (guard, early)
    }
}

fn cursor_for(offset: usize) -> String {
    format!("c{offset}")
}

async fn feed_handler(
    State(server): State<MockServer>,
    Path(feed): Path<String>,
    Query(q): Query<PageQuery>,
    headers: HeaderMap,
) -> Response {
    let mut path = format!("/feed/{feed}");
    if let Some(c) = &q.cursor {
        path.push_str(&format!("?cursor={c}"));
    } else if let Some(o) = &q.offset {
        path.push_str(&format!("?offset={o}"));
    }
    let (_guard, early) = server.enter(&path, &headers).await;
    if let Some(r) = early {
        return r;
    }
    let Ok(feed) = feed.parse::<Feed>() else {
        return error(StatusCode::NOT_FOUND, "unknown feed");
    };
    let start = match (&q.cursor, &q.offset) {
        (Some(c), _) => match c.strip_prefix('c').and_then(|n| n.parse::<usize>().ok()) {
            Some(n) => n,
            None => return error(StatusCode::BAD_REQUEST, "bad cursor"),
        },
        (None, Some(o)) => match o.parse::<usize>() {
            Ok(n) => n,
            Err(_) => return error(StatusCode::BAD_REQUEST, "bad offset"),
        },
        (None, None) => 0,
    };
    let opts = &server.shared.opts;
    let ids = server.shared.data.feed(feed);
    let size = opts.page_size.max(1);
    let start = start.min(ids.len());
    let end = (start + size).min(ids.len());
    let has_more = end < ids.len();
    let next = if !has_more {
        None
    } else if opts.cursor_loop && start > 0 {
        Some(cursor_for(size))
    } else {
        Some(cursor_for(end))
    };
    let body = json!({
        "post_ids": &ids[start..end],
        "next_cursor": next,
        "has_more": has_more,
    });
    json_body(body.to_string())
}

async fn post_handler(
    State(server): State<MockServer>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Response {
    let path = format!("/post/{id}");
    let (_guard, early) = server.enter(&path, &headers).await;
    if let Some(r) = early {
        return r;
    }
    match server.shared.data.posts.get(&id) {
        Some(post) => json_body(serialize_post(post)),
        None => error(StatusCode::NOT_FOUND, "no such post"),
    }
}
