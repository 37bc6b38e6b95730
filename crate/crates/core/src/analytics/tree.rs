use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::median_of_sorted_i64;
use crate::model::PostRecord;
use crate::normalize::is_sentinel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub comment_count: u64,
    pub depth_histogram: BTreeMap<usize, u64>,
    /// `None` for a corpus without comments.
    pub max_depth: Option<usize>,
    /// Mean character length of non-empty, non-sentinel comments by depth.
    pub mean_length_by_depth: BTreeMap<usize, f64>,
    pub mean_comment_length: Option<f64>,
    /// Distinct comment authors.
    pub unique_commenters: u64,
    /// Posts with at least one comment.
    pub posts_with_comments: u64,
    pub ttfc_median_s: Option<f64>,
    pub ttfc_mean_s: Option<f64>,
    /// Comments dated before their post (clamped to zero).
    pub ttfc_anomalies: u64,
}

/// Time to first comment in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ttfc {
    pub millis: i64,
    /// Number of comments in the post dated before the post itself.
    pub anomalies: u64,
}

impl Ttfc {
    pub fn seconds(&self) -> f64 {
        self.millis as f64 / 1000.0
    }
}

/// Earliest comment (any depth) minus post creation. Negative deltas count
/// as anomalies and clamp to zero. `None` without comments.
pub fn time_to_first_comment(post: &PostRecord) -> Option<Ttfc> {
    let mut best: Option<i64> = None;
    let mut anomalies = 0;
    for (c, _) in post.flatten_comments() {
        let delta = (c.created_at - post.created_at).num_milliseconds();
        if delta < 0 {
            anomalies += 1;
        }
        let d = delta.max(0);
        best = Some(best.map_or(d, |b: i64| b.min(d)));
    }
    best.map(|millis| Ttfc { millis, anomalies })
}

/// Mergeable partial state for [`TreeStats`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TreeAcc {
    pub depth_histogram: BTreeMap<usize, u64>,
    /// depth -> (sum of lengths, number of measured comments)
    pub lengths: BTreeMap<usize, (u64, u64)>,
    pub commenters: std::collections::BTreeSet<String>,
    pub ttfc_millis: Vec<i64>,
    pub ttfc_anomalies: u64,
}

impl TreeAcc {
    pub fn add(&mut self, post: &PostRecord) {
        for (c, depth) in post.flatten_comments() {
            *self.depth_histogram.entry(depth).or_default() += 1;
            if !c.content.is_empty() && !is_sentinel(&c.content) {
                let e = self.lengths.entry(depth).or_default();
                e.0 += c.content.chars().count() as u64;
                e.1 += 1;
            }
            if !self.commenters.contains(&c.author_id) {
                self.commenters.insert(c.author_id.clone());
            }
        }
        if let Some(t) = time_to_first_comment(post) {
            self.ttfc_millis.push(t.millis);
            self.ttfc_anomalies += t.anomalies;
        }
    }

    pub fn merge(&mut self, other: TreeAcc) {
        for (d, n) in other.depth_histogram {
            *self.depth_histogram.entry(d).or_default() += n;
        }
        for (d, (s, n)) in other.lengths {
            let e = self.lengths.entry(d).or_default();
            e.0 += s;
            e.1 += n;
        }
        self.commenters.extend(other.commenters);
        self.ttfc_millis.extend(other.ttfc_millis);
        self.ttfc_anomalies += other.ttfc_anomalies;
    }

    pub fn finish(&self) -> TreeStats {
        let mut ttfc = self.ttfc_millis.clone();
        ttfc.sort_unstable();
        let (total_len, measured) = self
            .lengths
            .values()
            .fold((0u64, 0u64), |(s, n), &(a, b)| (s + a, n + b));
        let sum: i128 = ttfc.iter().map(|&m| m as i128).sum();
        TreeStats {
            comment_count: self.depth_histogram.values().sum(),
            max_depth: self.depth_histogram.keys().next_back().copied(),
            depth_histogram: self.depth_histogram.clone(),
            mean_length_by_depth: self
                .lengths
                .iter()
                .map(|(&d, &(s, n))| (d, s as f64 / n as f64))
                .collect(),
            mean_comment_length: (measured > 0).then(|| total_len as f64 / measured as f64),
            unique_commenters: self.commenters.len() as u64,
            posts_with_comments: ttfc.len() as u64,
            ttfc_median_s: median_of_sorted_i64(&ttfc).map(|m| m / 1000.0),
            ttfc_mean_s: (!ttfc.is_empty()).then(|| sum as f64 / ttfc.len() as f64 / 1000.0),
            ttfc_anomalies: self.ttfc_anomalies,
        }
    }
}

/// Tree statistics for a whole corpus.
pub fn tree_stats<'a>(posts: impl IntoIterator<Item = &'a PostRecord>) -> TreeStats {
    let mut acc = TreeAcc::default();
    for p in posts {
        acc.add(p);
    }
    acc.finish()
}
