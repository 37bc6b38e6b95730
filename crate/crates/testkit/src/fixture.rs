//! The 100-record end-to-end fixture and its ground truth.
//!
//! Every number a report shows is recorded here while the fixture is built,
//! never recomputed from the generated records.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, TimeZone, Utc};
use corpuskit_core::pii::EntityType;
use corpuskit_core::{CommentNode, PostRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::planted::{FieldBuilder, PlantedField};
use crate::sentinels::{self, Flags};
use crate::{prose, secrets};

pub const FIXTURE_POSTS: usize = 100;

/// Entities planted across the fixture, by type.
pub const PLANTED: &[(EntityType, u64)] = &[
    (EntityType::Crypto, 7),
    (EntityType::PhoneNumber, 5),
    (EntityType::EmailAddress, 6),
    (EntityType::UsSsn, 3),
    (EntityType::Password, 4),
    (EntityType::ApiKey, 4),
    (EntityType::UsItin, 2),
    (EntityType::SeedPhrase, 2),
    (EntityType::CreditCard, 2),
    (EntityType::IbanCode, 2),
];

/// Plants that share a field with an earlier plant.
const DOUBLED: usize = 4;

const SUBMOLTS: &[(&str, &str, usize)] = &[
    ("s-general", "general", 30),
    ("s-intro", "introductions", 25),
    ("s-philo", "philosophy", 20),
    ("s-crypto", "crypto", 12),
    ("s-tools", "tooling", 8),
    ("s-meta", "meta", 5),
];

const SPANISH: &str = "En un lugar de la Mancha, de cuyo nombre no quiero acordarme, no ha mucho tiempo que vivía un hidalgo de los de lanza en astillero, adarga antigua, rocín flaco y galgo corredor. Una olla de algo más vaca que carnero, salpicón las más noches, duelos y quebrantos los sábados, lentejas los viernes, algún palomino de añadidura los domingos, consumían las tres partes de su hacienda.";
const GERMAN: &str = "In den alten Zeiten, wo das Wünschen noch geholfen hat, lebte ein König, dessen Töchter waren alle schön, aber die jüngste war so schön, daß die Sonne selber, die doch so vieles gesehen hat, sich verwunderte, sooft sie ihr ins Gesicht schien. Nahe bei dem Schlosse des Königs lag ein großer dunkler Wald, und in dem Walde unter einer alten Linde war ein Brunnen.";

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureTruth {
    pub total_posts: u64,
    pub total_comments: u64,
    pub unique_communities: u64,
    pub unique_authors: u64,
    pub unique_commenters: u64,
    pub first_post: DateTime<Utc>,
    pub last_post: DateTime<Utc>,
    pub avg_comments_per_post: f64,
    /// Over non-empty, non-sentinel post bodies after masking.
    pub avg_post_length_chars: f64,
    pub post_languages: BTreeMap<String, u64>,
    pub dominant_language: String,
    pub dominant_share: f64,
    pub fields_processed: u64,
    pub fields_with_pii: u64,
    pub entities: BTreeMap<EntityType, u64>,
    pub entities_masked: u64,
    pub removed_spam: u64,
    pub removed_blocklist: u64,
    pub removed_too_long: u64,
}

#[derive(Debug, Clone)]
pub struct PipelineFixture {
    pub posts: Vec<PostRecord>,
    pub blocklist: Vec<String>,
    pub truth: FixtureTruth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Title(usize),
    Content(usize),
    /// Post index, pre-order comment index.
    Comment(usize, usize),
}

fn masked(field: &PlantedField) -> String {
    let chars: Vec<char> = field.text.chars().collect();
    let mut out = String::new();
    let mut at = 0;
    for p in &field.plants {
        out.extend(&chars[at..p.start]);
        out.push_str(&p.kind.placeholder());
        at = p.end;
    }
    out.extend(&chars[at..]);
    out
}

fn foreign_window<R: Rng>(rng: &mut R, text: &str) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    let n = rng.gen_range(25..=words.len());
    let start = rng.gen_range(0..=words.len() - n);
    words[start..start + n].join(" ")
}

fn comment_tree<R: Rng>(rng: &mut R, post: usize, count: usize, t0: DateTime<Utc>) -> Vec<CommentNode> {
    let mut flat: Vec<(CommentNode, Option<usize>)> = Vec::new();
    for i in 0..count {
        let parent = (i > 0 && rng.gen_bool(0.4)).then(|| rng.gen_range(0..i));
        let node = CommentNode {
            id: format!("fx{post:03}-c{i}"),
            content: prose::window(rng, 5, 40),
            parent_id: parent.map(|p| flat[p].0.id.clone()),
            upvotes: rng.gen_range(0..40),
            downvotes: rng.gen_range(0..5),
            created_at: t0 + Duration::seconds(rng.gen_range(5..7200)),
            author_id: format!("commenter-{}", rng.gen_range(0..40)),
            author_name: format!("Commenter {}", rng.gen_range(0..3)),
            lang: None,
            lang_score: None,
            replies: Vec::new(),
            extras: BTreeMap::new(),
        };
        flat.push((node, parent));
    }
    let mut built: Vec<Option<CommentNode>> = vec![None; count];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); count];
    let mut roots = Vec::new();
    for (i, (_, p)) in flat.iter().enumerate() {
        match p {
            Some(p) => children[*p].push(i),
            None => roots.push(i),
        }
    }
    for i in (0..count).rev() {
        let mut node = flat[i].0.clone();
        node.replies = children[i].iter().map(|&c| built[c].take().unwrap()).collect();
        built[i] = Some(node);
    }
    roots.into_iter().map(|r| built[r].take().unwrap()).collect()
}

fn nth_comment(post: &mut PostRecord, n: usize) -> &mut CommentNode {
    fn walk<'a>(nodes: &'a mut [CommentNode], n: &mut usize) -> Option<&'a mut CommentNode> {
        for node in nodes {
            if *n == 0 {
                return Some(node);
            }
            *n -= 1;
            if let Some(found) = walk(&mut node.replies, n) {
                return Some(found);
            }
        }
        None
    }
    let mut k = n;
    walk(&mut post.comments, &mut k).expect("comment index in range")
}

fn slot_text(posts: &mut [PostRecord], slot: Slot) -> &mut String {
    match slot {
        Slot::Title(p) => &mut posts[p].title,
        Slot::Content(p) => &mut posts[p].content,
        Slot::Comment(p, c) => &mut nth_comment(&mut posts[p], c).content,
    }
}

/// Builds the fixture. The result is identical on every call.
pub fn pipeline_fixture() -> PipelineFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(0x00f1_c7e5);
    let t0 = Utc.with_ymd_and_hms(2026, 1, 27, 6, 0, 0).unwrap();

    let mut submolt_of: Vec<usize> = SUBMOLTS
        .iter()
        .enumerate()
        .flat_map(|(i, s)| std::iter::repeat(i).take(s.2))
        .collect();
    submolt_of.shuffle(&mut rng);

    // posts 7, 17, ..., 97 are not English: six Spanish, four German
    let language = |i: usize| match (i % 10, i / 10) {
        (7, k) if k < 6 => "es",
        (7, _) => "de",
        _ => "en",
    };

    let mut posts = Vec::with_capacity(FIXTURE_POSTS);
    for i in 0..FIXTURE_POSTS {
        let created_at = t0 + Duration::minutes(150 * i as i64) + Duration::seconds(rng.gen_range(0..60));
        let (title, content) = match language(i) {
            "es" => ("Una historia de la Mancha y de su hidalgo".to_string(), foreign_window(&mut rng, SPANISH)),
            "de" => ("Ein altes Märchen aus dem Wald".to_string(), foreign_window(&mut rng, GERMAN)),
            _ => (prose::window(&mut rng, 4, 10), prose::window(&mut rng, 20, 80)),
        };
        let count = (i * 7) % 6 + usize::from(i % 9 == 0) * 4;
        let (sid, sname, _) = SUBMOLTS[submolt_of[i]];
        let author = (i * i + 3 * i) % 23;
        let mut content = content;
        if i % 11 == 3 {
            content.push_str(&format!(" More at https://www.moltbook.com/post/{i} and https://github.com/agents/{i}"));
        }
        posts.push(PostRecord {
            post_id: format!("fx{i:03}"),
            title,
            content,
            url: None,
            upvotes: rng.gen_range(0..300),
            downvotes: rng.gen_range(0..10),
            comment_count: count as u64,
            created_at,
            submolt_id: sid.into(),
            submolt_name: sname.into(),
            author_id: format!("author-{author:02}"),
            author_name: format!("Author {author}"),
            lang: None,
            lang_score: None,
            comments: comment_tree(&mut rng, i, count, created_at),
            extras: BTreeMap::new(),
        });
    }

    // English slots only, so planted text never changes a post's language
    let mut slots: Vec<Slot> = Vec::new();
    for (i, p) in posts.iter().enumerate() {
        if language(i) == "en" {
            slots.push(Slot::Title(i));
            slots.push(Slot::Content(i));
        }
        for c in 0..p.node_count() {
            slots.push(Slot::Comment(i, c));
        }
    }
    slots.shuffle(&mut rng);
    let mut slots = slots.into_iter();

    let too_long_post = (0..FIXTURE_POSTS).find(|&i| language(i) == "en" && i > 40).unwrap();
    posts[too_long_post].content = sentinels::build(&mut rng, Flags::TooLong);
    let removal_flags = [Flags::Spam, Flags::Spam, Flags::Spam, Flags::Blocklist, Flags::Blocklist];
    let mut removal_slots = Vec::new();
    for flags in removal_flags {
        let slot = slots
            .by_ref()
            .find(|s| *s != Slot::Content(too_long_post))
            .unwrap();
        *slot_text(&mut posts, slot) = sentinels::build(&mut rng, flags);
        removal_slots.push(slot);
    }

    let mut kinds: Vec<EntityType> = PLANTED
        .iter()
        .flat_map(|&(k, n)| std::iter::repeat(k).take(n as usize))
        .collect();
    kinds.shuffle(&mut rng);
    let mut planted: BTreeMap<Slot, Vec<EntityType>> = BTreeMap::new();
    let mut used: Vec<Slot> = Vec::new();
    for (n, kind) in kinds.iter().enumerate() {
        let slot = if n >= kinds.len() - DOUBLED {
            used[n % used.len()]
        } else {
            let s = slots
                .by_ref()
                .find(|s| *s != Slot::Content(too_long_post))
                .unwrap();
            used.push(s);
            s
        };
        planted.entry(slot).or_default().push(*kind);
    }
    let mut masked_content: BTreeMap<usize, String> = BTreeMap::new();
    for (slot, kinds) in &planted {
        let mut b = FieldBuilder::default();
        b.push_text(&prose::window(&mut rng, 5, 20));
        for &kind in kinds {
            let value = secrets::generate(kind, &mut rng);
            b.push_plant(kind, &value);
            b.push_text(&prose::window(&mut rng, 2, 10));
        }
        let field = b.finish();
        if let Slot::Content(p) = slot {
            masked_content.insert(*p, masked(&field));
        }
        *slot_text(&mut posts, *slot) = field.text;
    }

    // ground truth, from the construction plan
    let total_comments: u64 = posts.iter().map(|p| p.node_count() as u64).sum();
    let sentinel_content: BTreeSet<usize> = removal_slots
        .iter()
        .filter_map(|s| match s {
            Slot::Content(p) => Some(*p),
            _ => None,
        })
        .chain([too_long_post])
        .collect();
    let (len_sum, measured) = posts
        .iter()
        .enumerate()
        .filter(|(i, _)| !sentinel_content.contains(i))
        .map(|(i, p)| masked_content.get(&i).unwrap_or(&p.content).chars().count() as u64)
        .fold((0, 0), |(s, n), l| (s + l, n + 1));
    let mut post_languages = BTreeMap::new();
    for i in 0..FIXTURE_POSTS {
        *post_languages.entry(language(i).to_string()).or_insert(0u64) += 1;
    }
    let entities: BTreeMap<EntityType, u64> = PLANTED.iter().copied().collect();
    let truth = FixtureTruth {
        total_posts: FIXTURE_POSTS as u64,
        total_comments,
        unique_communities: SUBMOLTS.len() as u64,
        unique_authors: (0..FIXTURE_POSTS).map(|i| (i * i + 3 * i) % 23).collect::<BTreeSet<_>>().len() as u64,
        unique_commenters: posts
            .iter()
            .flat_map(|p| p.flatten_comments().into_iter().map(|(c, _)| c.author_id.clone()))
            .collect::<BTreeSet<_>>()
            .len() as u64,
        first_post: posts.iter().map(|p| p.created_at).min().unwrap(),
        last_post: posts.iter().map(|p| p.created_at).max().unwrap(),
        avg_comments_per_post: total_comments as f64 / FIXTURE_POSTS as f64,
        avg_post_length_chars: len_sum as f64 / measured as f64,
        dominant_language: "en".into(),
        dominant_share: post_languages["en"] as f64 / FIXTURE_POSTS as f64,
        post_languages,
        fields_processed: 2 * FIXTURE_POSTS as u64 + total_comments,
        fields_with_pii: used.len() as u64,
        entities_masked: entities.values().sum(),
        entities,
        removed_spam: 3,
        removed_blocklist: 2,
        removed_too_long: 1,
    };
    PipelineFixture {
        posts,
        blocklist: sentinels::BLOCKLIST.iter().map(|s| s.to_string()).collect(),
        truth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_consistent() {
        let a = pipeline_fixture();
        let b = pipeline_fixture();
        assert_eq!(a.posts, b.posts);
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.posts.len(), 100);
        assert_eq!(a.truth.entities_masked, 37);
        assert_eq!(a.truth.fields_with_pii, 33);
        assert_eq!(a.truth.post_languages["en"], 90);
        for p in &a.posts {
            p.validate().unwrap();
        }
    }
}
