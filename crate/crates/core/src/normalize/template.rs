use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::is_sentinel;
use crate::model::PostRecord;

/// Number of leading code points that define a template.
pub const TEMPLATE_PREFIX_CHARS: usize = 200;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const SAMPLE_IDS: usize = 5;

/// FNV-1a-64 over the UTF-8 bytes of the first 200 code points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TemplateHash(pub u64);

impl fmt::Display for TemplateHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

pub fn template_hash(text: &str) -> TemplateHash {
    let end = text
        .char_indices()
        .nth(TEMPLATE_PREFIX_CHARS)
        .map_or(text.len(), |(i, _)| i);
    TemplateHash(fnv1a64(&text.as_bytes()[..end]))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuplicateCluster {
    pub hash: String,
    pub count: u64,
    /// Up to five ids, earliest in corpus order first.
    pub sample_post_ids: Vec<String>,
}

/// Mergeable hash → count map. Samples keep the lowest corpus ordinals, so
/// any sharding of the corpus produces the same report.
#[derive(Debug, Clone, Default)]
pub struct DuplicateCounter {
    clusters: HashMap<u64, (u64, Vec<(u64, String)>)>,
}

impl DuplicateCounter {
    /// Counts one post body. Empty and sentinel bodies are not templates.
    pub fn add(&mut self, ordinal: u64, post_id: &str, content: &str) {
        if content.is_empty() || is_sentinel(content) {
            return;
        }
        let entry = self.clusters.entry(template_hash(content).0).or_default();
        entry.0 += 1;
        push_sample(&mut entry.1, (ordinal, post_id.to_string()));
    }

    pub fn merge(&mut self, other: DuplicateCounter) {
        for (hash, (count, samples)) in other.clusters {
            let entry = self.clusters.entry(hash).or_default();
            entry.0 += count;
            for s in samples {
                push_sample(&mut entry.1, s);
            }
        }
    }

    /// Clusters with at least two members, largest first, ties by hash.
    pub fn report(&self) -> Vec<DuplicateCluster> {
        let mut out: Vec<(u64, u64, &Vec<(u64, String)>)> = self
            .clusters
            .iter()
            .filter(|(_, (c, _))| *c >= 2)
            .map(|(h, (c, s))| (*h, *c, s))
            .collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        out.into_iter()
            .map(|(h, count, samples)| DuplicateCluster {
                hash: TemplateHash(h).to_string(),
                count,
                sample_post_ids: samples.iter().map(|(_, id)| id.clone()).collect(),
            })
            .collect()
    }
}

fn push_sample(samples: &mut Vec<(u64, String)>, s: (u64, String)) {
    let pos = samples.partition_point(|x| x.0 < s.0);
    if pos < SAMPLE_IDS {
        samples.insert(pos, s);
        samples.truncate(SAMPLE_IDS);
    }
}

/// Template-duplicate clusters over post bodies.
pub fn duplicate_report<'a, I>(posts: I) -> Vec<DuplicateCluster>
where
    I: IntoIterator<Item = &'a PostRecord>,
{
    let mut counter = DuplicateCounter::default();
    for (i, p) in posts.into_iter().enumerate() {
        counter.add(i as u64, &p.post_id, &p.content);
    }
    counter.report()
}
