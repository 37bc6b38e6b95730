use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::median_of_sorted;
use crate::model::PostRecord;
use crate::normalize::is_sentinel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmoltStats {
    pub submolt_id: String,
    pub submolt_name: String,
    pub posts: u64,
    pub comments: u64,
    pub comments_per_post: f64,
    /// Mean character length over non-empty, non-sentinel bodies.
    pub mean_post_length: f64,
    pub post_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityStats {
    pub total_posts: u64,
    pub total_comments: u64,
    /// Sorted by post count descending, then id.
    pub submolts: Vec<SubmoltStats>,
    pub median_comments_per_post: Option<f64>,
    pub median_posts_per_submolt: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubmoltAcc {
    pub name: String,
    pub posts: u64,
    pub comments: u64,
    pub length_sum: u64,
    pub measured: u64,
}

/// Mergeable partial state for [`CommunityStats`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommunityAcc {
    pub submolts: BTreeMap<String, SubmoltAcc>,
}

impl CommunityAcc {
    pub fn add(&mut self, post: &PostRecord) {
        let e = self
            .submolts
            .entry(post.submolt_id.clone())
            .or_insert_with(|| SubmoltAcc {
                name: post.submolt_name.clone(),
                ..Default::default()
            });
        if post.submolt_name < e.name {
            e.name = post.submolt_name.clone();
        }
        e.posts += 1;
        e.comments += post.node_count() as u64;
        if !post.content.is_empty() && !is_sentinel(&post.content) {
            e.length_sum += post.content.chars().count() as u64;
            e.measured += 1;
        }
    }

    pub fn merge(&mut self, other: CommunityAcc) {
        for (id, s) in other.submolts {
            match self.submolts.get_mut(&id) {
                None => {
                    self.submolts.insert(id, s);
                }
                Some(e) => {
                    if s.name < e.name {
                        e.name = s.name;
                    }
                    e.posts += s.posts;
                    e.comments += s.comments;
                    e.length_sum += s.length_sum;
                    e.measured += s.measured;
                }
            }
        }
    }

    pub fn finish(&self) -> CommunityStats {
        let total_posts: u64 = self.submolts.values().map(|s| s.posts).sum();
        let total_comments: u64 = self.submolts.values().map(|s| s.comments).sum();
        let mut submolts: Vec<SubmoltStats> = self
            .submolts
            .iter()
            .map(|(id, s)| SubmoltStats {
                submolt_id: id.clone(),
                submolt_name: s.name.clone(),
                posts: s.posts,
                comments: s.comments,
                comments_per_post: s.comments as f64 / s.posts as f64,
                mean_post_length: if s.measured == 0 {
                    0.0
                } else {
                    s.length_sum as f64 / s.measured as f64
                },
                post_share: s.posts as f64 / total_posts as f64,
            })
            .collect();
        submolts.sort_by(|a, b| b.posts.cmp(&a.posts).then_with(|| a.submolt_id.cmp(&b.submolt_id)));
        let mut cpp: Vec<f64> = submolts.iter().map(|s| s.comments_per_post).collect();
        cpp.sort_by(f64::total_cmp);
        let mut ppc: Vec<f64> = submolts.iter().map(|s| s.posts as f64).collect();
        ppc.sort_by(f64::total_cmp);
        CommunityStats {
            total_posts,
            total_comments,
            submolts,
            median_comments_per_post: median_of_sorted(&cpp),
            median_posts_per_submolt: median_of_sorted(&ppc),
        }
    }
}

pub fn community_stats<'a>(posts: impl IntoIterator<Item = &'a PostRecord>) -> CommunityStats {
    let mut acc = CommunityAcc::default();
    for p in posts {
        acc.add(p);
    }
    acc.finish()
}
