use std::collections::BTreeMap;

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use url::Url;

use crate::model::PostRecord;
use crate::normalize::is_sentinel;

/// Domain that counts as a self-link by default.
pub const DEFAULT_SELF_DOMAIN: &str = "www.moltbook.com";

static URL_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r#"(?i)\bhttps?://[^\s<>"'`]+"#).unwrap());

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrlStats {
    pub posts: u64,
    pub posts_with_url: u64,
    pub posts_with_url_fraction: f64,
    pub total_urls: u64,
    pub domain_counts: BTreeMap<String, u64>,
    pub self_domain: String,
    pub self_link_count: u64,
}

impl UrlStats {
    /// Domains by count descending, then name.
    pub fn ranked_domains(&self) -> Vec<(&str, u64)> {
        let mut v: Vec<(&str, u64)> =
            self.domain_counts.iter().map(|(d, &n)| (d.as_str(), n)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        v
    }
}

/// Scheme-anchored http(s) URLs in `text`, with trailing sentence
/// punctuation and unbalanced closing brackets trimmed.
pub fn extract_urls(text: &str) -> Vec<&str> {
    URL_RE
        .find_iter(text)
        .map(|m| {
            let mut s = m.as_str();
            loop {
                let trimmed = s.trim_end_matches(['.', ',', ';', ':', '!', '?']);
                let trimmed = match trimmed.chars().last() {
                    Some(c @ (')' | ']' | '}')) => {
                        let open = match c {
                            ')' => '(',
                            ']' => '[',
                            _ => '{',
                        };
                        if trimmed.matches(c).count() > trimmed.matches(open).count() {
                            &trimmed[..trimmed.len() - 1]
                        } else {
                            trimmed
                        }
                    }
                    _ => trimmed,
                };
                if trimmed == s {
                    break;
                }
                s = trimmed;
            }
            s
        })
        .collect()
}

/// Lowercased host without port, if the URL parses.
pub fn url_domain(raw: &str) -> Option<String> {
    let u = Url::parse(raw).ok()?;
    if !matches!(u.scheme(), "http" | "https") {
        return None;
    }
    u.host_str().map(|h| h.trim_end_matches('.').to_ascii_lowercase())
}

/// Mergeable partial state for [`UrlStats`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UrlAcc {
    pub posts: u64,
    pub posts_with_url: u64,
    pub total_urls: u64,
    pub domains: BTreeMap<String, u64>,
}

impl UrlAcc {
    pub fn add(&mut self, post: &PostRecord) {
        self.posts += 1;
        let mut found = 0u64;
        let mut note = |raw: &str, domains: &mut BTreeMap<String, u64>| {
            if let Some(d) = url_domain(raw) {
                *domains.entry(d).or_default() += 1;
                found += 1;
            }
        };
        if !is_sentinel(&post.content) {
            for u in extract_urls(&post.content) {
                note(u, &mut self.domains);
            }
        }
        if let Some(u) = post.url.as_deref().map(str::trim).filter(|u| !u.is_empty()) {
            note(u, &mut self.domains);
        }
        if found > 0 {
            self.posts_with_url += 1;
        }
        self.total_urls += found;
    }

    pub fn merge(&mut self, other: UrlAcc) {
        self.posts += other.posts;
        self.posts_with_url += other.posts_with_url;
        self.total_urls += other.total_urls;
        for (d, n) in other.domains {
            *self.domains.entry(d).or_default() += n;
        }
    }

    pub fn finish(&self, self_domain: &str) -> UrlStats {
        let self_domain = self_domain.to_ascii_lowercase();
        UrlStats {
            posts: self.posts,
            posts_with_url: self.posts_with_url,
            posts_with_url_fraction: if self.posts == 0 {
                0.0
            } else {
                self.posts_with_url as f64 / self.posts as f64
            },
            total_urls: self.total_urls,
            self_link_count: self.domains.get(&self_domain).copied().unwrap_or(0),
            domain_counts: self.domains.clone(),
            self_domain,
        }
    }
}

pub fn url_stats<'a>(posts: impl IntoIterator<Item = &'a PostRecord>, self_domain: &str) -> UrlStats {
    let mut acc = UrlAcc::default();
    for p in posts {
        acc.add(p);
    }
    acc.finish(self_domain)
}
