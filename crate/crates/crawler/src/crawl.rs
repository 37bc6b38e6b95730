//! Batch scheduler, feed pagination and post fetching.
//!
//! Every request goes through one dispatcher. A batch holds at most
//! `batch_size` requests, all started together; the next batch starts no
//! sooner than `inter_batch_delay` after the previous start and only once the
//! previous batch has completed. Failed requests are re-queued with
//! exponential backoff and ride in a later batch, so retries never break the
//! rate contract.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::time::Duration;

use corpuskit_core::model::{format_timestamp, parse_post, CorpusMeta};
use corpuskit_core::{Corpus, PostRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clock::Clock;
use crate::config::{ConfigError, CrawlConfig};
use crate::feed::{Feed, FeedPage};
use crate::log::{CrawlEvent, CrawlLog, CrawlSummary};
use crate::transport::{HttpResponse, Transport, TransportError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CrawlError {
    #[error("invalid crawl config: {0}")]
    Config(#[from] ConfigError),
    #[error("feed {feed} returned cursor {cursor:?} a second time")]
    CursorLoop { feed: Feed, cursor: String },
    #[error("feed {feed}: malformed page: {reason}")]
    MalformedPage { feed: Feed, reason: String },
    #[error("GET {path} failed after retries: {reason}")]
    Network { path: String, reason: String },
    #[error("GET {path} returned HTTP {status}")]
    Status { path: String, status: u16 },
}

/// Why a single post is missing from the output.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FetchError {
    #[error("post {0} not found")]
    NotFound(String),
    #[error("post {post_id}: {reason}")]
    Network { post_id: String, reason: String },
    #[error("post {post_id}: HTTP {status}")]
    Status { post_id: String, status: u16 },
    #[error("post {post_id}: malformed page: {reason}")]
    Malformed { post_id: String, reason: String },
    #[error("post {post_id} created at {created_at} is outside the crawl window")]
    OutOfWindow { post_id: String, created_at: String },
}

/// A crawl that stopped early, with the log up to that point.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error}")]
pub struct CrawlAbort {
    pub error: CrawlError,
    pub log: CrawlLog,
}

#[derive(Debug, Clone)]
pub struct CrawlOutput {
    /// Sorted by (created_at, post_id).
    pub corpus: Corpus,
    pub log: CrawlLog,
    pub summary: CrawlSummary,
}

#[derive(Debug, Clone)]
enum Job {
    Page { feed: Feed, token: Option<String>, attempt: u32 },
    Post { id: String, attempt: u32 },
}

impl Job {
    fn is_page(&self) -> bool {
        matches!(self, Job::Page { .. })
    }
}

#[derive(Debug, Default)]
struct FeedState {
    ids: Vec<String>,
    seen_ids: HashSet<String>,
    seen_tokens: HashSet<String>,
}

#[derive(Debug, Default)]
struct RunState {
    feeds: BTreeMap<Feed, FeedState>,
    discovered: HashSet<String>,
    posts: Vec<PostRecord>,
    failures: HashMap<String, FetchError>,
}

enum Reply {
    Ok(HttpResponse),
    Retryable(String),
    Fatal(HttpResponse),
}

fn classify(result: Result<HttpResponse, TransportError>) -> Reply {
    match result {
        Err(e) => Reply::Retryable(e.0),
        Ok(r) if r.status == 200 => Reply::Ok(r),
        Ok(r) if r.status == 429 || r.status >= 500 => Reply::Retryable(format!("HTTP {}", r.status)),
        Ok(r) => Reply::Fatal(r),
    }
}

fn millis(d: Duration) -> u64 {
    d.as_millis() as u64
}

/// Runs feeds and post fetches against one transport under the rate
/// contract. One crawler performs one run.
pub struct Crawler<'a> {
    cfg: &'a CrawlConfig,
    transport: &'a dyn Transport,
    clock: &'a dyn Clock,
    rng: ChaCha8Rng,
    last_batch: Option<Duration>,
    log: CrawlLog,
    summary: CrawlSummary,
    seq: u64,
}

impl<'a> Crawler<'a> {
    pub fn new(
        cfg: &'a CrawlConfig,
        transport: &'a dyn Transport,
        clock: &'a dyn Clock,
    ) -> Result<Self, CrawlError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            transport,
            clock,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            last_batch: None,
            log: CrawlLog::default(),
            summary: CrawlSummary::default(),
            seq: 0,
        })
    }

    /// Paginates every configured feed and fetches every discovered post.
    pub async fn crawl(mut self) -> Result<CrawlOutput, CrawlAbort> {
        let feeds = self.cfg.feeds.clone();
        let state = match self.run(&feeds, Vec::new(), true).await {
            Ok(s) => s,
            Err(error) => return Err(CrawlAbort { error, log: self.log }),
        };
        let mut posts = state.posts;
        posts.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.post_id.cmp(&b.post_id)));
        self.summary.fetched = posts.len() as u64;
        self.log.push(CrawlEvent::Done { summary: self.summary });
        let meta = CorpusMeta {
            window_start: self.cfg.window_start,
            window_end: self.cfg.window_end,
            feeds: feeds.iter().map(|f| f.to_string()).collect(),
        };
        Ok(CrawlOutput {
            corpus: Corpus { posts, meta },
            log: self.log,
            summary: self.summary,
        })
    }

    /// All ids of one feed in page order, first occurrence kept.
    pub async fn paginate_feed(mut self, feed: Feed) -> Result<Vec<String>, CrawlError> {
        let mut state = self.run(&[feed], Vec::new(), false).await?;
        Ok(state.feeds.remove(&feed).map(|f| f.ids).unwrap_or_default())
    }

    /// Fetches one post, retrying transient failures.
    pub async fn fetch_post(mut self, post_id: &str) -> Result<PostRecord, FetchError> {
        let mut state = self
            .run(&[], vec![post_id.to_string()], true)
            .await
            .map_err(|e| FetchError::Network {
                post_id: post_id.to_string(),
                reason: e.to_string(),
            })?;
        if let Some(err) = state.failures.remove(post_id) {
            return Err(err);
        }
        state.posts.pop().ok_or_else(|| FetchError::NotFound(post_id.to_string()))
    }

    pub fn log(&self) -> &CrawlLog {
        &self.log
    }

    async fn run(
        &mut self,
        feeds: &[Feed],
        initial_posts: Vec<String>,
        fetch_posts: bool,
    ) -> Result<RunState, CrawlError> {
        let mut state = RunState::default();
        let mut ready: VecDeque<Job> = VecDeque::new();
        let mut delayed: Vec<(Duration, u64, Job)> = Vec::new();
        for &feed in feeds {
            state.feeds.entry(feed).or_default();
            ready.push_back(Job::Page { feed, token: None, attempt: 0 });
        }
        for id in initial_posts {
            if state.discovered.insert(id.clone()) {
                ready.push_back(Job::Post { id, attempt: 0 });
            }
        }

        while !ready.is_empty() || !delayed.is_empty() {
            let slot = match self.last_batch {
                Some(last) => (last + self.cfg.inter_batch_delay).max(self.clock.elapsed()),
                None => self.clock.elapsed(),
            };
            let start = if ready.is_empty() {
                let next_retry = delayed.iter().map(|d| d.0).min().expect("non-empty");
                slot.max(next_retry)
            } else {
                slot
            };
            self.clock.sleep_until(start).await;

            let now = self.clock.elapsed();
            delayed.sort_by_key(|d| (d.0, d.1));
            let (due, later): (Vec<_>, Vec<_>) = delayed.into_iter().partition(|d| d.0 <= now);
            delayed = later;
            ready.extend(due.into_iter().map(|d| d.2));
            if ready.is_empty() {
                continue;
            }

            // feed pages first: they unlock more work
            let mut batch = Vec::with_capacity(self.cfg.batch_size);
            while batch.len() < self.cfg.batch_size {
                let Some(pos) = ready.iter().position(Job::is_page).or((!ready.is_empty()).then_some(0)) else {
                    break;
                };
                batch.push(ready.remove(pos).expect("index in range"));
            }

            let paths: Vec<(String, u32)> = batch
                .iter()
                .map(|job| match job {
                    Job::Page { feed, token, attempt } => {
                        (self.cfg.pagination.path(*feed, token.as_deref()), *attempt)
                    }
                    Job::Post { id, attempt } => (format!("/post/{}", encode_segment(id)), *attempt),
                })
                .collect();
            let replies = self.dispatch(&paths).await;

            for ((job, (path, _)), reply) in batch.into_iter().zip(paths).zip(replies) {
                match job {
                    Job::Page { feed, token, attempt } => match classify(reply) {
                        Reply::Ok(resp) => {
                            let page = FeedPage::parse(feed, token, self.cfg.pagination, &resp.body)
                                .map_err(|reason| CrawlError::MalformedPage { feed, reason })?;
                            self.summary.pages += 1;
                            self.log.push(CrawlEvent::Page {
                                feed,
                                token: page.page_token.clone(),
                                ids: page.post_ids.len(),
                                has_more: page.has_more,
                            });
                            let fs = state.feeds.entry(feed).or_default();
                            for id in page.post_ids {
                                if fs.seen_ids.insert(id.clone()) {
                                    fs.ids.push(id.clone());
                                }
                                if state.discovered.insert(id.clone()) {
                                    self.summary.discovered += 1;
                                    if fetch_posts {
                                        ready.push_back(Job::Post { id, attempt: 0 });
                                    }
                                }
                            }
                            if let Some(next) = page.next_token {
                                if !fs.seen_tokens.insert(next.clone()) {
                                    return Err(CrawlError::CursorLoop { feed, cursor: next });
                                }
                                ready.push_back(Job::Page { feed, token: Some(next), attempt: 0 });
                            }
                        }
                        Reply::Retryable(reason) => {
                            if attempt >= self.cfg.max_retries {
                                return Err(CrawlError::Network { path, reason });
                            }
                            let job = Job::Page { feed, token, attempt: attempt + 1 };
                            self.schedule_retry(&mut delayed, job, &path, attempt, reason);
                        }
                        Reply::Fatal(resp) => {
                            return Err(CrawlError::Status { path, status: resp.status });
                        }
                    },
                    Job::Post { id, attempt } => match classify(reply) {
                        Reply::Ok(resp) => self.accept_post(&mut state, &id, &path, &resp.body),
                        Reply::Fatal(resp) if resp.status == 404 || resp.status == 410 => {
                            self.summary.not_found += 1;
                            self.log.push(CrawlEvent::NotFound { post_id: id.clone() });
                            state.failures.insert(id.clone(), FetchError::NotFound(id));
                        }
                        Reply::Fatal(resp) => {
                            self.summary.failed += 1;
                            let reason = format!("HTTP {}", resp.status);
                            self.log.push(CrawlEvent::Failed { post_id: id.clone(), reason });
                            state
                                .failures
                                .insert(id.clone(), FetchError::Status { post_id: id, status: resp.status });
                        }
                        Reply::Retryable(reason) => {
                            if attempt >= self.cfg.max_retries {
                                self.summary.failed += 1;
                                self.log.push(CrawlEvent::Failed {
                                    post_id: id.clone(),
                                    reason: reason.clone(),
                                });
                                state.failures.insert(id.clone(), FetchError::Network { post_id: id, reason });
                            } else {
                                let job = Job::Post { id, attempt: attempt + 1 };
                                self.schedule_retry(&mut delayed, job, &path, attempt, reason);
                            }
                        }
                    },
                }
            }
        }
        Ok(state)
    }

    fn accept_post(&mut self, state: &mut RunState, id: &str, path: &str, body: &str) {
        let malformed = |reason: String| FetchError::Malformed {
            post_id: id.to_string(),
            reason,
        };
        let result = parse_post(body)
            .map_err(|e| malformed(e.to_string()))
            .and_then(|p| {
                if p.post_id == id {
                    Ok(p)
                } else {
                    Err(malformed(format!("page describes post {:?}", p.post_id)))
                }
            });
        match result {
            Ok(post) if self.cfg.in_window(post.created_at) => state.posts.push(post),
            Ok(post) => {
                let created_at = format_timestamp(&post.created_at);
                self.summary.out_of_window += 1;
                self.log.push(CrawlEvent::OutOfWindow {
                    post_id: id.to_string(),
                    created_at: created_at.clone(),
                });
                state.failures.insert(
                    id.to_string(),
                    FetchError::OutOfWindow { post_id: id.to_string(), created_at },
                );
            }
            Err(err) => {
                self.summary.malformed += 1;
                self.log.push(CrawlEvent::Malformed {
                    path: path.to_string(),
                    reason: err.to_string(),
                });
                state.failures.insert(id.to_string(), err);
            }
        }
    }

    fn schedule_retry(
        &mut self,
        delayed: &mut Vec<(Duration, u64, Job)>,
        job: Job,
        path: &str,
        failed_attempt: u32,
        reason: String,
    ) {
        let factor = 2f64.powi(failed_attempt.min(20) as i32) * self.rng.gen_range(0.8..=1.2);
        let backoff = self.cfg.retry_base.mul_f64(factor);
        self.summary.retries += 1;
        self.log.push(CrawlEvent::Retry {
            path: path.to_string(),
            attempt: failed_attempt + 1,
            backoff_ms: millis(backoff),
            reason,
        });
        self.seq += 1;
        delayed.push((self.clock.elapsed() + backoff, self.seq, job));
    }

    /// Starts every request of a batch at once and waits for all of them.
    async fn dispatch(&mut self, paths: &[(String, u32)]) -> Vec<Result<HttpResponse, TransportError>> {
        let at = self.clock.elapsed();
        self.last_batch = Some(at);
        self.summary.batches += 1;
        self.summary.requests += paths.len() as u64;
        let batch = self.summary.batches;
        self.log.push(CrawlEvent::Batch { batch, at_ms: millis(at), size: paths.len() });
        for (path, attempt) in paths {
            self.log.push(CrawlEvent::Request {
                batch,
                at_ms: millis(at),
                path: path.clone(),
                attempt: *attempt,
            });
        }
        let transport = self.transport;
        let clock = self.clock;
        let results = futures::future::join_all(paths.iter().map(|(p, _)| async move {
            let r = transport.get(p).await;
            (r, clock.elapsed())
        }))
        .await;
        let mut out = Vec::with_capacity(results.len());
        for ((path, _), (r, done)) in paths.iter().zip(results) {
            let (status, error) = match &r {
                Ok(resp) => (Some(resp.status), None),
                Err(e) => (None, Some(e.0.clone())),
            };
            self.log.push(CrawlEvent::Response { at_ms: millis(done), path: path.clone(), status, error });
            out.push(r);
        }
        out
    }
}

fn encode_segment(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for b in s.bytes() {
        if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

/// Convenience wrapper around [`Crawler::crawl`].
pub async fn crawl(
    cfg: &CrawlConfig,
    transport: &dyn Transport,
    clock: &dyn Clock,
) -> Result<CrawlOutput, CrawlAbort> {
    let crawler = Crawler::new(cfg, transport, clock).map_err(|error| CrawlAbort {
        error,
        log: CrawlLog::default(),
    })?;
    crawler.crawl().await
}
