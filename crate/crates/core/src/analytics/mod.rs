//! Corpus statistics: lexical measures, comment-tree shape, authorship
//! concentration, linked domains and per-community engagement.
//!
//! Every block has an accumulator with `add` and an associative,
//! commutative `merge`, so any partition of the corpus yields the same
//! final numbers. Real-valued aggregates are computed at `finish` time from
//! exact integer sums or from sorted value lists.

pub mod authors;
pub mod community;
pub mod lexical;
pub mod powerlaw;
pub mod tree;
pub mod urls;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use authors::{author_stats, AuthorAcc, AuthorRank, AuthorStats, DEFAULT_RATE_THRESHOLD};
pub use community::{community_stats, CommunityAcc, CommunityStats, SubmoltStats};
pub use lexical::{
    count_sentences, count_syllables, flesch_kincaid, tokenize, LexicalAcc, LexicalOptions,
    LexicalStats,
};
pub use powerlaw::{
    fit_power_law, hurwitz_zeta, zeta_inverse_cdf, Estimator, PowerLawError, PowerLawFit,
    PowerLawOptions, ZetaSampler,
};
pub use tree::{time_to_first_comment, tree_stats, TreeAcc, TreeStats, Ttfc};
pub use urls::{extract_urls, url_domain, url_stats, UrlAcc, UrlStats, DEFAULT_SELF_DOMAIN};

use crate::model::{format_timestamp, PostRecord};
use crate::normalize::is_sentinel;

/// Version of the stats JSON layout.
pub const STATS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("text has no words")]
    NoWords,
}

pub(crate) fn median_of_sorted(v: &[f64]) -> Option<f64> {
    let n = v.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2]),
        _ => Some((v[n / 2 - 1] + v[n / 2]) / 2.0),
    }
}

pub(crate) fn median_of_sorted_i64(v: &[i64]) -> Option<f64> {
    let n = v.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2] as f64),
        _ => Some((v[n / 2 - 1] as f64 + v[n / 2] as f64) / 2.0),
    }
}

/// Mean of ascending values, summed in that order so the result is
/// independent of how the values were gathered.
pub(crate) fn mean_of_sorted(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Median of a value -> multiplicity histogram.
pub(crate) fn median_from_histogram(h: &BTreeMap<u64, u64>) -> Option<f64> {
    let n: u64 = h.values().sum();
    if n == 0 {
        return None;
    }
    let nth = |k: u64| -> u64 {
        let mut seen = 0;
        for (&v, &c) in h {
            seen += c;
            if seen > k {
                return v;
            }
        }
        unreachable!("k < n")
    };
    Some(if n % 2 == 1 {
        nth(n / 2) as f64
    } else {
        (nth(n / 2 - 1) as f64 + nth(n / 2) as f64) / 2.0
    })
}

/// Knobs for [`compute_stats`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalyticsOptions {
    pub self_domain: String,
    pub rate_threshold: f64,
    pub power_law: PowerLawOptions,
    pub lexical: LexicalOptions,
}

impl Default for AnalyticsOptions {
    fn default() -> Self {
        Self {
            self_domain: DEFAULT_SELF_DOMAIN.to_string(),
            rate_threshold: DEFAULT_RATE_THRESHOLD,
            power_law: PowerLawOptions::default(),
            lexical: LexicalOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageShare {
    pub lang: String,
    pub count: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageStats {
    /// Post-level tags.
    pub posts: BTreeMap<String, u64>,
    pub comments: BTreeMap<String, u64>,
    pub untagged_posts: u64,
    /// Most frequent post language among tagged posts; ties go to the
    /// alphabetically first code.
    pub dominant: Option<LanguageShare>,
}

/// Release-level totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub total_posts: u64,
    pub total_comments: u64,
    pub unique_communities: u64,
    /// Distinct post authors.
    pub unique_authors: u64,
    pub unique_commenters: u64,
    pub first_post: Option<String>,
    pub last_post: Option<String>,
    pub avg_comments_per_post: f64,
    /// Mean body length over non-empty, non-sentinel bodies.
    pub avg_post_length_chars: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub schema_version: u32,
    pub empty: bool,
    pub summary: CorpusSummary,
    pub lexical: Option<LexicalStats>,
    pub lexical_error: Option<String>,
    pub tree: TreeStats,
    pub authors: AuthorStats,
    pub urls: UrlStats,
    pub communities: CommunityStats,
    pub languages: LanguageStats,
}

/// All accumulators together.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatsAcc {
    pub lexical: LexicalAcc,
    pub tree: TreeAcc,
    pub authors: AuthorAcc,
    pub urls: UrlAcc,
    pub community: CommunityAcc,
    pub post_langs: BTreeMap<String, u64>,
    pub comment_langs: BTreeMap<String, u64>,
    pub untagged_posts: u64,
    pub first: Option<DateTime<Utc>>,
    pub last: Option<DateTime<Utc>>,
}

impl StatsAcc {
    pub fn add(&mut self, post: &PostRecord, opts: &AnalyticsOptions) {
        if !post.content.trim().is_empty() && !is_sentinel(&post.content) {
            self.lexical.add(&post.content, &opts.lexical);
        }
        self.tree.add(post);
        self.authors.add(post);
        self.urls.add(post);
        self.community.add(post);
        match &post.lang {
            Some(l) => *self.post_langs.entry(l.clone()).or_default() += 1,
            None => self.untagged_posts += 1,
        }
        for (c, _) in post.flatten_comments() {
            if let Some(l) = &c.lang {
                *self.comment_langs.entry(l.clone()).or_default() += 1;
            }
        }
        self.first = Some(self.first.map_or(post.created_at, |f| f.min(post.created_at)));
        self.last = Some(self.last.map_or(post.created_at, |l| l.max(post.created_at)));
    }

    pub fn merge(&mut self, other: StatsAcc) {
        self.lexical.merge(other.lexical);
        self.tree.merge(other.tree);
        self.authors.merge(other.authors);
        self.urls.merge(other.urls);
        self.community.merge(other.community);
        for (k, v) in other.post_langs {
            *self.post_langs.entry(k).or_default() += v;
        }
        for (k, v) in other.comment_langs {
            *self.comment_langs.entry(k).or_default() += v;
        }
        self.untagged_posts += other.untagged_posts;
        self.first = match (self.first, other.first) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.last = match (self.last, other.last) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }

    pub fn finish(&self, opts: &AnalyticsOptions) -> CorpusStats {
        let (lexical, lexical_error) = match self.lexical.finish() {
            Ok(l) => (Some(l), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let tree = self.tree.finish();
        let communities = self.community.finish();
        let authors = self.authors.finish(opts.rate_threshold, &opts.power_law);
        let urls = self.urls.finish(&opts.self_domain);
        let tagged: u64 = self.post_langs.values().sum();
        let dominant = self
            .post_langs
            .iter()
            .fold(None::<(&String, u64)>, |best, (l, &n)| match best {
                Some((_, b)) if b >= n => best,
                _ => Some((l, n)),
            })
            .map(|(l, n)| LanguageShare {
                lang: l.clone(),
                count: n,
                share: n as f64 / tagged as f64,
            });
        let total_posts = communities.total_posts;
        let (len_sum, measured) = self
            .community
            .submolts
            .values()
            .fold((0u64, 0u64), |(s, m), c| (s + c.length_sum, m + c.measured));
        let summary = CorpusSummary {
            total_posts,
            total_comments: tree.comment_count,
            unique_communities: self.community.submolts.len() as u64,
            unique_authors: authors.unique_authors,
            unique_commenters: tree.unique_commenters,
            first_post: self.first.map(|t| format_timestamp(&t)),
            last_post: self.last.map(|t| format_timestamp(&t)),
            avg_comments_per_post: if total_posts == 0 {
                0.0
            } else {
                tree.comment_count as f64 / total_posts as f64
            },
            avg_post_length_chars: if measured == 0 {
                0.0
            } else {
                len_sum as f64 / measured as f64
            },
        };
        CorpusStats {
            schema_version: STATS_SCHEMA_VERSION,
            empty: total_posts == 0,
            summary,
            lexical,
            lexical_error,
            tree,
            authors,
            urls,
            communities,
            languages: LanguageStats {
                posts: self.post_langs.clone(),
                comments: self.comment_langs.clone(),
                untagged_posts: self.untagged_posts,
                dominant,
            },
        }
    }
}

/// Statistics for a sequence of posts.
pub fn compute_stats<'a>(
    posts: impl IntoIterator<Item = &'a PostRecord>,
    opts: &AnalyticsOptions,
) -> CorpusStats {
    let mut acc = StatsAcc::default();
    for p in posts {
        acc.add(p, opts);
    }
    acc.finish(opts)
}

/// Lexical statistics over posts with non-empty, non-sentinel content.
pub fn lexical_stats<'a>(
    posts: impl IntoIterator<Item = &'a PostRecord>,
    opts: &LexicalOptions,
) -> Result<LexicalStats, AnalyticsError> {
    let mut acc = LexicalAcc::default();
    for p in posts {
        if !p.content.trim().is_empty() && !is_sentinel(&p.content) {
            acc.add(&p.content, opts);
        }
    }
    acc.finish()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn depth_histogram_csv(stats: &TreeStats) -> String {
    let mut out = String::from("depth,comments,mean_length\n");
    for (d, n) in &stats.depth_histogram {
        let mean = stats
            .mean_length_by_depth
            .get(d)
            .map(|m| m.to_string())
            .unwrap_or_default();
        let _ = writeln!(out, "{d},{n},{mean}");
    }
    out
}

pub fn rank_frequency_csv(stats: &AuthorStats) -> String {
    let mut out = String::from("rank,author_id,author_name,posts\n");
    for (i, r) in stats.rank_frequency.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            i + 1,
            csv_field(&r.author_id),
            csv_field(&r.author_name),
            r.posts
        );
    }
    out
}

pub fn domain_counts_csv(stats: &UrlStats) -> String {
    let mut out = String::from("domain,count\n");
    for (d, n) in stats.ranked_domains() {
        let _ = writeln!(out, "{},{n}", csv_field(d));
    }
    out
}

/// Writes the three plot-ready CSV files into `dir`.
pub fn write_plot_csvs(stats: &CorpusStats, dir: &Path) -> std::io::Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let files = [
        ("depth_histogram.csv", depth_histogram_csv(&stats.tree)),
        ("rank_frequency.csv", rank_frequency_csv(&stats.authors)),
        ("domain_counts.csv", domain_counts_csv(&stats.urls)),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path)?;
        f.write_all(body.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// Distinct values helper used by callers that only need counts.
pub fn distinct<'a>(items: impl IntoIterator<Item = &'a str>) -> usize {
    items.into_iter().collect::<BTreeSet<_>>().len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_post;

    fn post(id: &str, submolt: &str, author: &str, at: &str, content: &str, comments: &str) -> PostRecord {
        parse_post(&format!(
            r#"{{"post_id":"{id}","title":"t","content":"{content}","url":null,"upvotes":0,"downvotes":0,"comment_count":0,"created_at":"{at}","submolt_id":"{submolt}","submolt_name":"{submolt}","author_id":"{author}","author_name":"{author}","comments":[{comments}]}}"#
        ))
        .unwrap()
    }

    fn c(id: &str, parent: Option<&str>, at: &str, content: &str, replies: &str) -> String {
        let parent = parent.map_or("null".into(), |p| format!("\"{p}\""));
        format!(
            r#"{{"id":"{id}","parent_id":{parent},"content":"{content}","author_id":"x{id}","author_name":"n","upvotes":0,"downvotes":0,"created_at":"{at}","replies":[{replies}]}}"#
        )
    }

    #[test]
    fn depth_histogram_example() {
        let comments = [
            c("a", None, "2026-01-28T10:00:34Z", "hey", &c("b", Some("a"), "2026-01-28T10:01:00Z", "yo!", "")),
            c("d", None, "2026-01-28T10:00:10Z", "four", ""),
        ]
        .join(",");
        let p = post("p", "s", "u", "2026-01-28T10:00:00Z", "body", &comments);
        let t = tree_stats([&p]);
        assert_eq!(t.depth_histogram, BTreeMap::from([(0, 2), (1, 1)]));
        assert_eq!(t.max_depth, Some(1));
        assert_eq!(t.comment_count, 3);
        assert_eq!(t.mean_length_by_depth[&0], 3.5);
        assert_eq!(t.ttfc_median_s, Some(10.0));
        assert_eq!(time_to_first_comment(&p).unwrap().seconds(), 10.0);

        let empty = tree_stats(std::iter::empty::<&PostRecord>());
        assert!(empty.depth_histogram.is_empty());
        assert_eq!(empty.comment_count, 0);
        assert_eq!(empty.max_depth, None);
    }

    #[test]
    fn ttfc_clamps_negative() {
        let p = post(
            "p",
            "s",
            "u",
            "2026-01-28T10:00:00Z",
            "b",
            &c("a", None, "2026-01-28T09:59:00Z", "early", ""),
        );
        let t = time_to_first_comment(&p).unwrap();
        assert_eq!(t.millis, 0);
        assert_eq!(t.anomalies, 1);
        let none = post("q", "s", "u", "2026-01-28T10:00:00Z", "b", "");
        assert!(time_to_first_comment(&none).is_none());
    }

    #[test]
    fn author_ranks_and_rates() {
        let mut posts = Vec::new();
        for (i, (author, n)) in [("a", 5), ("b", 3), ("c", 1)].into_iter().enumerate() {
            for k in 0..n {
                posts.push(post(
                    &format!("p{i}{k}"),
                    "s",
                    author,
                    &format!("2026-01-28T{:02}:00:00Z", k * 3),
                    "x",
                    "",
                ));
            }
        }
        let s = author_stats(&posts, 10.0, &PowerLawOptions::default());
        let order: Vec<_> = s.rank_frequency.iter().map(|r| (r.author_id.as_str(), r.posts)).collect();
        assert_eq!(order, [("a", 5), ("b", 3), ("c", 1)]);
        assert!(s.fit.is_none() && s.fit_error.is_some());

        // 20 posts within 30 minutes: span clamps to 1 h, rate 20
        let burst: Vec<_> = (0..20)
            .map(|k| post(&format!("b{k}"), "s", "z", &format!("2026-01-28T10:{:02}:00Z", k + 10), "x", ""))
            .collect();
        let s = author_stats(&burst, 10.0, &PowerLawOptions::default());
        assert_eq!(s.authors_over_rate, 1);
        assert_eq!(s.rank_frequency.len(), 1);
        assert!(s.fit_error.unwrap().contains("at least 50"));
    }

    #[test]
    fn url_examples() {
        let a = post("a", "s", "u", "2026-01-28T10:00:00Z", "see https://github.com/x and https://github.com/y", "");
        let b = post("b", "s", "u", "2026-01-28T10:00:00Z", "HTTPS://WWW.Moltbook.COM/p/1", "");
        let none = post("c", "s", "u", "2026-01-28T10:00:00Z", "nothing here", "");
        let s = url_stats([&a, &b, &none], "www.moltbook.com");
        assert_eq!(s.domain_counts["github.com"], 2);
        assert_eq!(s.self_link_count, 1);
        assert!((s.posts_with_url_fraction - 2.0 / 3.0).abs() < 1e-15);
        let empty = url_stats([&none], "www.moltbook.com");
        assert_eq!(empty.posts_with_url_fraction, 0.0);
        assert!(empty.domain_counts.is_empty());
    }

    #[test]
    fn community_example() {
        let comments = |n: usize| {
            (0..n)
                .map(|i| c(&format!("c{i}"), None, "2026-01-28T10:00:00Z", "x", ""))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut posts = vec![
            post("a1", "alpha", "u", "2026-01-28T10:00:00Z", "x", &comments(10)),
            post("a2", "alpha", "u", "2026-01-28T10:00:00Z", "x", &comments(10)),
            post("a3", "alpha", "u", "2026-01-28T10:00:00Z", "x", &comments(10)),
            post("b1", "beta", "u", "2026-01-28T10:00:00Z", "x", &comments(2)),
        ];
        let s = community_stats(&posts);
        let cpp: Vec<f64> = s.submolts.iter().map(|x| x.comments_per_post).collect();
        assert_eq!(cpp, [10.0, 2.0]);
        assert_eq!(s.median_comments_per_post, Some(6.0));
        posts.push(post("g1", "gamma", "u", "2026-01-28T10:00:00Z", "x", ""));
        let s = community_stats(&posts);
        assert_eq!(s.submolts.last().unwrap().comments_per_post, 0.0);
    }

    #[test]
    fn merge_matches_single_pass() {
        let opts = AnalyticsOptions::default();
        let posts: Vec<_> = (0..30)
            .map(|i| {
                post(
                    &format!("p{i}"),
                    &format!("s{}", i % 4),
                    &format!("u{}", i % 7),
                    &format!("2026-01-{:02}T10:00:00Z", 1 + i % 28),
                    &format!("word{} shared text https://h{}.io/x. Another sentence!", i % 5, i % 3),
                    &c(&format!("c{i}"), None, "2026-02-01T00:00:00Z", "reply", ""),
                )
            })
            .collect();
        let whole = compute_stats(&posts, &opts);
        for split in [1, 7, 29] {
            let mut left = StatsAcc::default();
            let mut right = StatsAcc::default();
            for p in &posts[..split] {
                left.add(p, &opts);
            }
            for p in &posts[split..] {
                right.add(p, &opts);
            }
            right.merge(left);
            assert_eq!(right.finish(&opts), whole);
        }
    }

    #[test]
    fn dominant_language() {
        let mut p = post("p", "s", "u", "2026-01-28T10:00:00Z", "x", "");
        p.lang = Some("en".into());
        let s = compute_stats([&p, &p.clone()], &AnalyticsOptions::default());
        let d = s.languages.dominant.unwrap();
        assert_eq!((d.lang.as_str(), d.share), ("en", 1.0));
    }

    #[test]
    fn medians() {
        assert_eq!(median_of_sorted(&[]), None);
        assert_eq!(median_of_sorted(&[1.0, 2.0, 10.0]), Some(2.0));
        assert_eq!(median_of_sorted(&[1.0, 2.0, 3.0, 10.0]), Some(2.5));
        let h = BTreeMap::from([(1u64, 2u64), (5, 1), (9, 1)]);
        assert_eq!(median_from_histogram(&h), Some(3.0));
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_field("plain"), "plain");
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
