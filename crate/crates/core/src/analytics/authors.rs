use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::powerlaw::{fit_power_law, PowerLawFit, PowerLawOptions};
use crate::model::PostRecord;

/// Default posts-per-hour threshold for flagging prolific authors.
pub const DEFAULT_RATE_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorRank {
    pub author_id: String,
    pub author_name: String,
    pub posts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorStats {
    pub unique_authors: u64,
    /// Sorted by post count descending, then author id.
    pub rank_frequency: Vec<AuthorRank>,
    pub fit: Option<PowerLawFit>,
    /// Why `fit` is absent.
    pub fit_error: Option<String>,
    pub rate_threshold_per_hour: f64,
    pub authors_over_rate: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorActivity {
    pub name: String,
    pub posts: u64,
    pub first: DateTime<Utc>,
    pub last: DateTime<Utc>,
}

impl AuthorActivity {
    /// Posts divided by the first-to-last span in hours, with the span
    /// clamped to at least one hour.
    pub fn posts_per_hour(&self) -> f64 {
        let hours = (self.last - self.first).num_milliseconds() as f64 / 3_600_000.0;
        self.posts as f64 / hours.max(1.0)
    }
}

/// Mergeable partial state for [`AuthorStats`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuthorAcc {
    pub authors: BTreeMap<String, AuthorActivity>,
}

impl AuthorAcc {
    pub fn add(&mut self, post: &PostRecord) {
        let entry = self
            .authors
            .entry(post.author_id.clone())
            .or_insert_with(|| AuthorActivity {
                name: post.author_name.clone(),
                posts: 0,
                first: post.created_at,
                last: post.created_at,
            });
        entry.posts += 1;
        entry.first = entry.first.min(post.created_at);
        entry.last = entry.last.max(post.created_at);
        // smallest name wins so the result does not depend on input order
        if post.author_name < entry.name {
            entry.name = post.author_name.clone();
        }
    }

    pub fn merge(&mut self, other: AuthorAcc) {
        for (id, a) in other.authors {
            match self.authors.get_mut(&id) {
                None => {
                    self.authors.insert(id, a);
                }
                Some(e) => {
                    e.posts += a.posts;
                    e.first = e.first.min(a.first);
                    e.last = e.last.max(a.last);
                    if a.name < e.name {
                        e.name = a.name;
                    }
                }
            }
        }
    }

    pub fn finish(&self, rate_threshold: f64, fit_opts: &PowerLawOptions) -> AuthorStats {
        let mut table: Vec<AuthorRank> = self
            .authors
            .iter()
            .map(|(id, a)| AuthorRank {
                author_id: id.clone(),
                author_name: a.name.clone(),
                posts: a.posts,
            })
            .collect();
        table.sort_by(|a, b| b.posts.cmp(&a.posts).then_with(|| a.author_id.cmp(&b.author_id)));
        let counts: Vec<u64> = table.iter().map(|r| r.posts).collect();
        let (fit, fit_error) = match fit_power_law(&counts, fit_opts) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        AuthorStats {
            unique_authors: table.len() as u64,
            rank_frequency: table,
            fit,
            fit_error,
            rate_threshold_per_hour: rate_threshold,
            authors_over_rate: self
                .authors
                .values()
                .filter(|a| a.posts_per_hour() > rate_threshold)
                .count() as u64,
        }
    }
}

pub fn author_stats<'a>(
    posts: impl IntoIterator<Item = &'a PostRecord>,
    rate_threshold: f64,
    fit_opts: &PowerLawOptions,
) -> AuthorStats {
    let mut acc = AuthorAcc::default();
    for p in posts {
        acc.add(p);
    }
    acc.finish(rate_threshold, fit_opts)
}
