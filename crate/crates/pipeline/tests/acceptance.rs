//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always shown.
//! Exits non-zero when any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use corpuskit_core::analytics::{compute_stats, fit_power_law, AnalyticsOptions, PowerLawOptions};
use corpuskit_core::model::{format_timestamp, open_lines, parse_post, serialize_post, write_corpus};
use corpuskit_core::normalize::{Blocklist, Outcome, Sanitizer, SpamParams, DEFAULT_LIMIT_TOKENS};
use corpuskit_core::pii::{Anonymizer, EntityType, Registry};
use corpuskit_core::{CommentNode, PostRecord};
use corpuskit_crawler::{crawl, CrawlConfig, Feed, MockData, MockOptions, MockServer, RouterTransport, TokioClock};
use corpuskit_pipeline::{run, CleanConfig, PipelineConfig};
use corpuskit_testkit::sentinels::{self, Flags};
use corpuskit_testkit::{chain_record, pipeline_fixture, planted_fields, prose, random_record, secrets, RecordShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unicode_segmentation::UnicodeSegmentation;

/// Points at a local copy of the released masked dataset (JSONL, optionally
/// gzipped) to enable the observational check.
const DATASET_ENV: &str = "CORPUSKIT_RELEASED_DATASET";

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    check(elapsed <= Duration::from_secs(limit_s), || {
        format!("took {:.1} s, limit {limit_s} s", elapsed.as_secs_f64())
    })
}

// ---------------------------------------------------------------- 1

fn planted_recall_precision() -> Result<String, String> {
    const KINDS: [EntityType; 6] = [
        EntityType::ApiKey,
        EntityType::SeedPhrase,
        EntityType::Password,
        EntityType::EmailAddress,
        EntityType::CreditCard,
        EntityType::IbanCode,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let fields = planted_fields(&mut rng, 10_000, &KINDS, 500);
    let control = prose::fields(&mut rng, 10_000);
    // plant values are independently checksummed
    for f in &fields {
        for p in &f.plants {
            match p.kind {
                EntityType::CreditCard => {
                    let d: String = p.value.chars().filter(char::is_ascii_digit).collect();
                    let (body, check_digit) = d.split_at(d.len() - 1);
                    check(secrets::luhn_check_digit(body).to_string() == check_digit, || {
                        format!("generator produced a Luhn-invalid card {}", p.value)
                    })?;
                }
                EntityType::IbanCode => {
                    check(secrets::iban_remainder(&p.value.replace(' ', "")) == 1, || {
                        format!("generator produced a mod-97-invalid IBAN {}", p.value)
                    })?;
                }
                _ => {}
            }
        }
    }

    let started = Instant::now();
    let registry = Registry::builtin();
    let mut found: BTreeMap<EntityType, u64> = BTreeMap::new();
    let mut planted: BTreeMap<EntityType, u64> = BTreeMap::new();
    let mut misses = Vec::new();
    let mut false_positives = Vec::new();
    for f in &fields {
        let spans = registry.detect(&f.text);
        for p in &f.plants {
            *planted.entry(p.kind).or_default() += 1;
            if spans.iter().any(|s| s.entity_type == p.kind && s.start == p.start && s.end == p.end) {
                *found.entry(p.kind).or_default() += 1;
            } else if misses.len() < 3 {
                misses.push(format!("{} {:?} at {}..{}", p.kind, p.value, p.start, p.end));
            }
        }
        for s in &spans {
            let matched = f.plants.iter().any(|p| p.kind == s.entity_type && p.start == s.start && p.end == s.end);
            if KINDS.contains(&s.entity_type) && !matched && false_positives.len() < 3 {
                false_positives.push(format!("{} {:?}", s.entity_type, s.matched_text));
            }
        }
    }
    let mut control_hits: BTreeMap<EntityType, u64> = BTreeMap::new();
    for text in &control {
        for s in registry.detect(text) {
            *control_hits.entry(s.entity_type).or_default() += 1;
        }
    }
    let elapsed = started.elapsed();

    for k in KINDS {
        check(planted.get(&k) == Some(&500), || format!("{k}: planted {:?}, expected 500", planted.get(&k)))?;
        check(found.get(&k) == Some(&500), || {
            format!("{k}: recalled {}/500 with exact bounds; e.g. {misses:?}", found.get(&k).unwrap_or(&0))
        })?;
    }
    check(false_positives.is_empty(), || format!("unplanted detections: {false_positives:?}"))?;
    let hits = |t| control_hits.get(&t).copied().unwrap_or(0);
    check(hits(EntityType::ApiKey) == 0, || format!("control API_KEY detections: {}", hits(EntityType::ApiKey)))?;
    check(hits(EntityType::SeedPhrase) == 0, || {
        format!("control SEED_PHRASE detections: {}", hits(EntityType::SeedPhrase))
    })?;
    check(hits(EntityType::Password) <= 5, || {
        format!("control PASSWORD detections: {} > 5", hits(EntityType::Password))
    })?;
    within(elapsed, 30)?;
    Ok(format!(
        "6 x 500 planted recalled with exact spans; control: API_KEY 0, SEED_PHRASE 0, PASSWORD {}; {:.1} s",
        hits(EntityType::Password),
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 2

fn text_fields(r: &PostRecord) -> Vec<&str> {
    fn walk<'a>(nodes: &'a [CommentNode], out: &mut Vec<&'a str>) {
        for n in nodes {
            out.push(&n.content);
            walk(&n.replies, out);
        }
    }
    let mut out = vec![r.title.as_str(), r.content.as_str()];
    walk(&r.comments, &mut out);
    out
}

fn set_text_fields(r: &mut PostRecord, values: &[&str]) {
    fn walk(nodes: &mut [CommentNode], values: &mut std::slice::Iter<&str>) {
        for n in nodes {
            n.content = values.next().unwrap().to_string();
            walk(&mut n.replies, values);
        }
    }
    let mut it = values.iter();
    r.title = it.next().unwrap().to_string();
    r.content = it.next().unwrap().to_string();
    walk(&mut r.comments, &mut it);
}

fn masking_idempotence_locality() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let shape = RecordShape { max_comments: 12, pii_rate: 0.3, ..RecordShape::default() };
    let records: Vec<PostRecord> = (0..10_000).map(|i| random_record(&mut rng, i, &shape)).collect();
    let started = Instant::now();
    let anon = Anonymizer::default();
    let mut masked_fields = 0u64;
    for r in &records {
        let (once, _) = anon.anonymize_record(r);
        let (twice, _) = anon.anonymize_record(&once);
        check(serialize_post(&once) == serialize_post(&twice), || {
            format!("{}: second pass changed the record", r.post_id)
        })?;
        let before = text_fields(r);
        let after = text_fields(&once);
        for (orig, out) in before.iter().zip(&after) {
            let (expected, spans) = anon.anonymize_text(orig);
            check(*out == expected, || format!("{}: record and field masking disagree", r.post_id))?;
            // rebuild from the original, replacing only detected spans
            let chars: Vec<char> = orig.chars().collect();
            let mut rebuilt = String::new();
            let mut at = 0;
            let mut sorted = spans.clone();
            sorted.sort_by_key(|s| s.start);
            for s in &sorted {
                check(s.start >= at && s.end <= chars.len(), || format!("{}: overlapping spans", r.post_id))?;
                rebuilt.extend(&chars[at..s.start]);
                rebuilt.push_str(&s.entity_type.placeholder());
                at = s.end;
            }
            rebuilt.extend(&chars[at..]);
            check(rebuilt == *out, || format!("{}: change outside detected spans in {orig:?}", r.post_id))?;
            masked_fields += !spans.is_empty() as u64;
        }
        // everything that is not a text field is untouched
        let mut restored = once.clone();
        set_text_fields(&mut restored, &before);
        check(&restored == r, || format!("{}: non-text fields changed", r.post_id))?;
    }
    let elapsed = started.elapsed();
    within(elapsed, 60)?;
    check(masked_fields > 1000, || format!("only {masked_fields} fields had detections"))?;
    Ok(format!(
        "10,000 records idempotent, {masked_fields} masked fields changed only inside spans; {:.1} s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 3

fn sentinel_pipeline() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let fx = sentinels::sentinel_fixture(&mut rng);
    let sanitizer = Sanitizer::new(
        SpamParams::default(),
        Blocklist::from_phrases(sentinels::BLOCKLIST.iter().copied()),
        DEFAULT_LIMIT_TOKENS,
    );
    let mut by_outcome: BTreeMap<Outcome, u64> = BTreeMap::new();
    let mut multi_checked = 0;
    for (i, (field, flags)) in fx.fields.iter().zip(&fx.flags).enumerate() {
        let result = sanitizer.sanitize(field);
        let rendered = result.render();
        match flags.expected() {
            Some(sentinel) => check(rendered == sentinel, || {
                format!("field {i} ({flags:?}) rendered {:?}, expected {sentinel}", truncate(rendered))
            })?,
            None => check(result.outcome == Outcome::Clean && !corpuskit_core::normalize::is_sentinel(rendered), || {
                format!("field {i} wrongly removed as {:?}: {:?}", result.outcome, truncate(field))
            })?,
        }
        if flags.is_multi() {
            multi_checked += 1;
        }
        *by_outcome.entry(result.outcome).or_default() += 1;
    }
    let n = |o| by_outcome.get(&o).copied().unwrap_or(0);
    check(
        (n(Outcome::RemovedSpam), n(Outcome::RemovedBlocklist), n(Outcome::RemovedTooLong)) == (20, 10, 1),
        || format!("outcome counts {by_outcome:?}"),
    )?;
    check(multi_checked == 5, || format!("{multi_checked} multi-flag fields"))?;
    check(fx.flags.iter().filter(|f| **f == Flags::None).count() == 969, || "fixture shape".into())?;
    Ok("20 spam, 10 blocklist, 1 too-long byte-exact; spam>blocklist>too-long held on 5 multi-flag fields".into())
}

fn truncate(s: &str) -> String {
    s.chars().take(80).collect()
}

// ---------------------------------------------------------------- 4

fn max_depth(nodes: &[CommentNode], depth: usize) -> Option<usize> {
    nodes
        .iter()
        .map(|n| max_depth(&n.replies, depth + 1).unwrap_or(depth))
        .max()
}

fn round_trip() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let shape = RecordShape::default();
    let mut records: Vec<PostRecord> = (0..9_990).map(|i| random_record(&mut rng, i, &shape)).collect();
    records.extend((0..10).map(|i| chain_record(&format!("chain-{i}"), 31)));
    let mut deepest = 0;
    let mut with_extras = 0;
    for r in &records {
        let line = serialize_post(r);
        let back = parse_post(&line).map_err(|e| format!("{}: {e}", r.post_id))?;
        check(&back == r, || format!("{}: parse(serialize(r)) != r", r.post_id))?;
        check(serialize_post(&back) == line, || format!("{}: serialization not stable", r.post_id))?;
        deepest = deepest.max(max_depth(&r.comments, 0).unwrap_or(0));
        with_extras += !r.extras.is_empty() as u64;
    }
    check(deepest == 31, || format!("deepest generated comment at depth {deepest}"))?;
    Ok(format!("10,000 records identical after round trip; deepest comment depth {deepest}; {with_extras} with extras"))
}

// ---------------------------------------------------------------- 5

fn is_sentinel_text(s: &str) -> bool {
    matches!(s, "<REMOVED-SPAM>" | "<REMOVED-BLOCKLIST>" | "<REMOVED-TOO-LONG>")
}

fn strip_placeholders(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find("<PII:") {
        let tail = &rest[i + 5..];
        let len = tail.bytes().take_while(|b| b.is_ascii_uppercase() || *b == b'_').count();
        if len > 0 && tail.as_bytes().get(len) == Some(&b'>') {
            out.push_str(&rest[..i]);
            out.push(' ');
            rest = &tail[len + 1..];
        } else {
            out.push_str(&rest[..i + 5]);
            rest = tail;
        }
    }
    out.push_str(rest);
    out
}

fn syllables(word: &str) -> u32 {
    let letters: String = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    let vowel = |c: char| "aeiouy".contains(c);
    let chars: Vec<char> = letters.chars().collect();
    let groups = (0..chars.len())
        .filter(|&i| vowel(chars[i]) && (i == 0 || !vowel(chars[i - 1])))
        .count() as u32;
    let silent_e = letters.ends_with('e')
        && chars.len() >= 2
        && !vowel(chars[chars.len() - 2])
        && !(chars[chars.len() - 2] == 'l' && chars.len() >= 3 && !vowel(chars[chars.len() - 3]));
    let g = if groups > 1 && silent_e { groups - 1 } else { groups };
    g.max(1)
}

fn sentences(text: &str) -> u32 {
    // split into segments at terminator runs followed by whitespace or end
    let chars: Vec<char> = text.chars().collect();
    let term = |c: char| c == '.' || c == '!' || c == '?';
    let mut count = 0;
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if term(chars[i]) {
            let mut j = i;
            while j < chars.len() && term(chars[j]) {
                j += 1;
            }
            if j == chars.len() || chars[j].is_whitespace() {
                if chars[start..i].iter().any(|c| c.is_alphanumeric()) {
                    count += 1;
                    start = j;
                }
            }
            i = j;
        } else {
            i += 1;
        }
    }
    if chars[start..].iter().any(|c| c.is_alphanumeric()) {
        count += 1;
    }
    count
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

fn close(a: f64, b: f64) -> bool {
    a == b || ((a - b) / b).abs() <= 1e-9
}

fn oracle_equivalence() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let shape = RecordShape { max_comments: 20, ..RecordShape::default() };
    let posts: Vec<PostRecord> = (0..1_000).map(|i| random_record(&mut rng, i, &shape)).collect();
    let stats = compute_stats(&posts, &AnalyticsOptions::default());

    // tree: plain recursion
    let mut hist: BTreeMap<usize, u64> = BTreeMap::new();
    let mut lens: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    fn walk(nodes: &[CommentNode], d: usize, hist: &mut BTreeMap<usize, u64>, lens: &mut BTreeMap<usize, Vec<u64>>) {
        for n in nodes {
            *hist.entry(d).or_insert(0) += 1;
            if !n.content.is_empty() && !is_sentinel_text(&n.content) {
                lens.entry(d).or_default().push(n.content.chars().count() as u64);
            }
            walk(&n.replies, d + 1, hist, lens);
        }
    }
    for p in &posts {
        walk(&p.comments, 0, &mut hist, &mut lens);
    }
    check(stats.tree.depth_histogram == hist, || "depth histogram differs".into())?;
    for (d, v) in &lens {
        let mean = v.iter().sum::<u64>() as f64 / v.len() as f64;
        let got = stats.tree.mean_length_by_depth.get(d).copied().unwrap_or(f64::NAN);
        check(close(got, mean), || format!("depth {d}: mean length {got} vs {mean}"))?;
    }
    check(stats.tree.mean_length_by_depth.len() == lens.len(), || "per-depth length keys differ".into())?;

    // lexical: sorted token list
    let bodies: Vec<&str> = posts
        .iter()
        .map(|p| p.content.as_str())
        .filter(|c| !c.trim().is_empty() && !is_sentinel_text(c))
        .collect();
    let mut tokens: Vec<String> = bodies
        .iter()
        .flat_map(|b| strip_placeholders(b).unicode_words().map(str::to_lowercase).collect::<Vec<_>>())
        .collect();
    tokens.sort();
    let mut types = 0u64;
    let mut hapax = 0u64;
    let mut i = 0;
    while i < tokens.len() {
        let mut j = i;
        while j < tokens.len() && tokens[j] == tokens[i] {
            j += 1;
        }
        types += 1;
        hapax += (j - i == 1) as u64;
        i = j;
    }
    let ttr = types as f64 / tokens.len() as f64;
    let hapax_ratio = hapax as f64 / types as f64;
    let grades: Vec<f64> = bodies
        .iter()
        .filter_map(|b| {
            let words: Vec<&str> = b.unicode_words().collect();
            if words.is_empty() {
                return None;
            }
            let syl: u32 = words.iter().map(|w| syllables(w)).sum();
            let s = sentences(b).max(1) as f64;
            let w = words.len() as f64;
            Some(0.39 * (w / s) + 11.8 * (syl as f64 / w) - 15.59)
        })
        .collect();
    let fk = median(grades).ok_or("no grades")?;
    let lex = stats.lexical.as_ref().ok_or("no lexical stats")?;
    check(lex.total_tokens == tokens.len() as u64, || format!("tokens {} vs {}", lex.total_tokens, tokens.len()))?;
    check(lex.vocabulary_size == types, || format!("types {} vs {types}", lex.vocabulary_size))?;
    check(close(lex.ttr, ttr), || format!("TTR {} vs {ttr}", lex.ttr))?;
    check(close(lex.hapax_ratio, hapax_ratio), || format!("hapax {} vs {hapax_ratio}", lex.hapax_ratio))?;
    let got_fk = lex.fk_grade_median.ok_or("no FK median")?;
    check(close(got_fk, fk), || format!("FK median {got_fk} vs {fk}"))?;

    // time to first comment: min over all nodes, clamped at zero
    let mut ttfc = Vec::new();
    fn earliest(nodes: &[CommentNode]) -> Option<chrono::DateTime<chrono::Utc>> {
        nodes.iter().map(|n| earliest(&n.replies).map_or(n.created_at, |e| e.min(n.created_at))).min()
    }
    for p in &posts {
        if let Some(e) = earliest(&p.comments) {
            ttfc.push(((e - p.created_at).num_milliseconds().max(0)) as f64 / 1000.0);
        }
    }
    let want = median(ttfc);
    check(
        match (stats.tree.ttfc_median_s, want) {
            (Some(a), Some(b)) => close(a, b),
            (a, b) => a == b,
        },
        || format!("TTFC median {:?} vs {want:?}", stats.tree.ttfc_median_s),
    )?;
    Ok(format!(
        "1,000 posts: {} depths, {} tokens, TTR {ttr:.4}, hapax {hapax_ratio:.4}, FK median {fk:.3} all match",
        hist.len(),
        tokens.len()
    ))
}

// ---------------------------------------------------------------- 6

/// Exact discrete inverse CDF from a cumulative table, with the continuous
/// approximation for the far tail.
struct Zipf {
    alpha: f64,
    cdf: Vec<f64>,
    tail_mass: f64,
}

impl Zipf {
    const TABLE: usize = 1_000_000;

    fn new(alpha: f64) -> Self {
        let weights: Vec<f64> = (1..=Self::TABLE).map(|k| (k as f64).powf(-alpha)).collect();
        // tail beyond the table by the Euler-Maclaurin leading terms
        let n = Self::TABLE as f64;
        let tail = n.powf(1.0 - alpha) / (alpha - 1.0) - 0.5 * n.powf(-alpha);
        let head: f64 = weights.iter().rev().sum();
        let z = head + tail;
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w / z;
                acc
            })
            .collect();
        Self { alpha, cdf, tail_mass: tail / z }
    }

    fn sample(&self, u: f64) -> u64 {
        let k = self.cdf.partition_point(|&c| c < u);
        if k < self.cdf.len() {
            return k as u64 + 1;
        }
        let n = Self::TABLE as f64 + 0.5;
        let v = (1.0 - u) / self.tail_mass;
        (n * v.max(f64::MIN_POSITIVE).powf(-1.0 / (self.alpha - 1.0))).floor() as u64
    }
}

fn power_law_recovery() -> Result<String, String> {
    let mut parts = Vec::new();
    for (i, alpha) in [1.8, 2.5, 3.2].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6000 + i as u64);
        let z = Zipf::new(alpha);
        let samples: Vec<u64> = (0..100_000).map(|_| z.sample(rng.gen::<f64>())).collect();
        let fit = fit_power_law(&samples, &PowerLawOptions::default()).map_err(|e| e.to_string())?;
        let got = fit.alpha.ok_or("no alpha")?;
        check((got - alpha).abs() <= 0.1, || format!("alpha {alpha}: fitted {got:.4}"))?;
        parts.push(format!("{alpha} -> {got:.4}"));
    }
    Ok(format!("n = 100,000 each: {}", parts.join(", ")))
}

// ---------------------------------------------------------------- 7

fn crawl_once() -> Result<(Vec<u8>, Vec<u8>, usize, Vec<u64>), String> {
    let rt = tokio::runtime::Builder::new_current_thread()
        .enable_time()
        .start_paused(true)
        .build()
        .map_err(|e| e.to_string())?;
    rt.block_on(async {
        let server = MockServer::new(
            MockData::synthetic(40, 77),
            MockOptions {
                page_size: 10,
                latency: Duration::from_millis(250),
                faults: HashMap::from([("/post/p00005".to_string(), corpuskit_crawler::Fault::FailTimes(1))]),
                ..MockOptions::default()
            },
        );
        let cfg = CrawlConfig {
            base_url: "http://mock.invalid".into(),
            batch_size: 4,
            inter_batch_delay: Duration::from_secs(1),
            feeds: Feed::ALL.to_vec(),
            seed: 7,
            ..CrawlConfig::default()
        };
        let transport = RouterTransport::new(server.router());
        let clock = TokioClock::new();
        let out = crawl(&cfg, &transport, &clock).await.map_err(|e| e.to_string())?;
        if out.corpus.posts.len() != 40 {
            return Err(format!("crawled {} posts", out.corpus.posts.len()));
        }
        let mut corpus = Vec::new();
        for p in &out.corpus.posts {
            corpus.extend(serialize_post(p).bytes());
            corpus.push(b'\n');
        }
        let mut log = Vec::new();
        out.log.write_jsonl(&mut log).map_err(|e| e.to_string())?;
        let seen = server.observed();
        let starts = seen.starts.iter().map(|s| s.0.as_millis() as u64).collect();
        Ok((corpus, log, seen.max_in_flight, starts))
    })
}

fn crawler_rate_contract() -> Result<String, String> {
    let (corpus_a, log_a, max_in_flight, starts) = crawl_once()?;
    let (corpus_b, log_b, _, _) = crawl_once()?;
    check(max_in_flight <= 4, || format!("{max_in_flight} requests in flight"))?;
    let mut batch_starts: Vec<u64> = starts.clone();
    batch_starts.dedup();
    check(batch_starts.windows(2).all(|w| w[1] - w[0] >= 1000), || {
        format!("batch starts closer than 1 s: {batch_starts:?}")
    })?;
    for &t in &starts {
        let n = starts.iter().filter(|&&u| u >= t && u < t + 1000).count();
        check(n <= 4, || format!("{n} requests started within 1 s of {t} ms"))?;
    }
    check(corpus_a == corpus_b && log_a == log_b, || "two crawls differ".into())?;
    Ok(format!(
        "{} requests in {} batches, max {max_in_flight} in flight, starts >= 1 s apart, byte-identical reruns",
        starts.len(),
        batch_starts.len()
    ))
}

// ---------------------------------------------------------------- 8, 10

struct FixtureRuns {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

fn fixture_runs() -> Result<FixtureRuns, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path().to_path_buf();
    let fx = pipeline_fixture();
    write_corpus(&root.join("raw.jsonl"), &fx.posts).map_err(|e| e.to_string())?;
    std::fs::write(root.join("blocklist.txt"), fx.blocklist.join("\n")).map_err(|e| e.to_string())?;
    for par in [1, 8] {
        let cfg = PipelineConfig {
            input: Some(root.join("raw.jsonl")),
            output_dir: root.join(format!("par{par}")),
            parallelism: par,
            chunk_size: 7,
            clean: CleanConfig {
                blocklist: Some(root.join("blocklist.txt")),
                ..CleanConfig::default()
            },
            ..PipelineConfig::default()
        };
        run(&cfg).map_err(|e| e.to_string())?;
    }
    Ok(FixtureRuns { _dir: dir, root })
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect())
        .unwrap_or_default();
    names.sort();
    names
}

fn pipeline_determinism(runs: &FixtureRuns) -> Result<String, String> {
    let a = runs.root.join("par1");
    let b = runs.root.join("par8");
    let names = files(&a);
    check(names == files(&b), || "runs produced different file sets".into())?;
    let mut compared = 0;
    for name in &names {
        if name == "timings.json" {
            continue;
        }
        let x = std::fs::read(a.join(name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.join(name)).map_err(|e| e.to_string())?;
        check(x == y, || format!("{name} differs between parallelism 1 and 8"))?;
        compared += 1;
    }
    check(names.iter().any(|n| n == "manifest.json"), || "no manifest".into())?;
    Ok(format!("{compared} output files including manifest.json byte-identical at parallelism 1 and 8"))
}

fn report_shape(runs: &FixtureRuns) -> Result<String, String> {
    let truth = pipeline_fixture().truth;
    let dir = runs.root.join("par1");
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("report.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let t2 = &json["release_statistics"];
    for key in [
        "Total Posts",
        "Total Comments",
        "Unique Communities",
        "Unique Authors",
        "Date Range",
        "Avg Comments / Post",
        "Avg Post Length (chars)",
        "Dominant Language",
        "Dataset Size on Disk",
    ] {
        check(t2.get(key).is_some_and(|v| !v.is_null()), || format!("missing {key:?}"))?;
    }
    let u = |k: &str| t2[k].as_u64();
    check(u("Total Posts") == Some(truth.total_posts), || format!("Total Posts {:?}", t2["Total Posts"]))?;
    check(u("Total Comments") == Some(truth.total_comments), || "Total Comments".into())?;
    check(u("Unique Communities") == Some(truth.unique_communities), || "Unique Communities".into())?;
    check(u("Unique Authors") == Some(truth.unique_authors), || "Unique Authors".into())?;
    check(
        t2["Date Range"]["first"] == format_timestamp(&truth.first_post).as_str()
            && t2["Date Range"]["last"] == format_timestamp(&truth.last_post).as_str(),
        || format!("Date Range {:?}", t2["Date Range"]),
    )?;
    let f = |k: &str| t2[k].as_f64().unwrap_or(f64::NAN);
    check(close(f("Avg Comments / Post"), truth.avg_comments_per_post), || {
        format!("Avg Comments / Post {} vs {}", f("Avg Comments / Post"), truth.avg_comments_per_post)
    })?;
    check(close(f("Avg Post Length (chars)"), truth.avg_post_length_chars), || {
        format!("Avg Post Length {} vs {}", f("Avg Post Length (chars)"), truth.avg_post_length_chars)
    })?;
    let dom = &t2["Dominant Language"];
    check(
        dom["lang"] == truth.dominant_language.as_str() && close(dom["share"].as_f64().unwrap_or(0.0), truth.dominant_share),
        || format!("Dominant Language {dom:?}"),
    )?;
    let size = std::fs::metadata(dir.join("tagged.jsonl")).map_err(|e| e.to_string())?.len();
    check(u("Dataset Size on Disk") == Some(size), || "Dataset Size on Disk".into())?;

    let t5 = &json["anonymization_summary"];
    let rows = [
        ("Text fields processed", truth.fields_processed),
        ("Fields with PII detected", truth.fields_with_pii),
        ("Total entities masked", truth.entities_masked),
        ("Removed (spam)", truth.removed_spam),
        ("Removed (blocklist)", truth.removed_blocklist),
        ("Removed (too long)", truth.removed_too_long),
    ];
    for (k, want) in rows {
        check(t5[k].as_u64() == Some(want), || format!("{k}: {:?} vs {want}", t5[k]))?;
    }
    let entities: HashMap<String, u64> = t5["Entities"]
        .as_array()
        .ok_or("no entity rows")?
        .iter()
        .map(|r| (r["Entity type"].as_str().unwrap_or("").to_string(), r["Count"].as_u64().unwrap_or(u64::MAX)))
        .collect();
    check(entities.len() == 10, || format!("{} entity rows", entities.len()))?;
    for t in EntityType::ALL {
        let want = truth.entities.get(&t).copied().unwrap_or(0);
        check(entities.get(t.as_str()) == Some(&want), || {
            format!("{t}: {:?} vs {want}", entities.get(t.as_str()))
        })?;
    }
    Ok(format!(
        "9 release statistics and 6 + 10 anonymization rows equal ground truth ({} posts, {} entities)",
        truth.total_posts, truth.entities_masked
    ))
}

// ---------------------------------------------------------------- 9

fn synthetic_fields(n: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9009);
    (0..n)
        .map(|_| {
            let mut s = prose::window(&mut rng, 60, 80);
            if rng.gen_bool(0.005) {
                let kind = EntityType::ALL[rng.gen_range(0..EntityType::ALL.len())];
                let value = secrets::generate(kind, &mut rng);
                s = format!("{} {value} {s}", secrets::carrier(kind).0);
            }
            let cut = s.char_indices().nth(250).map_or(s.len(), |(i, _)| i);
            s.truncate(cut);
            s
        })
        .collect()
}

fn clean_and_mask(sanitizer: &Sanitizer, anon: &Anonymizer, field: &str) -> usize {
    let cleaned = sanitizer.sanitize(field).into_rendered();
    anon.anonymize_text(&cleaned).1.len()
}

fn throughput() -> Result<String, String> {
    use rayon::prelude::*;
    let fields = synthetic_fields(1_000_000);
    let sanitizer = Sanitizer::default();
    let anon = Anonymizer::default();

    let started = Instant::now();
    let single: usize = fields.iter().map(|f| clean_and_mask(&sanitizer, &anon, f)).sum();
    let t1 = started.elapsed();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().map_err(|e| e.to_string())?;
    let started = Instant::now();
    let parallel: usize = pool.install(|| fields.par_iter().map(|f| clean_and_mask(&sanitizer, &anon, f)).sum());
    let t4 = started.elapsed();

    check(single == parallel, || "parallel run found different entities".into())?;
    let speedup = t1.as_secs_f64() / t4.as_secs_f64();
    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    let detail = format!(
        "1,000,000 fields: {:.1} s single-threaded, {:.1} s on 4 threads, speedup {speedup:.2}x, {cpus} CPU(s) available",
        t1.as_secs_f64(),
        t4.as_secs_f64()
    );
    within(t1, 120).map_err(|e| format!("{detail}; single-threaded {e}"))?;
    check(speedup >= 3.0, || format!("{detail}; speedup below 3x"))?;
    Ok(detail)
}

// ---------------------------------------------------------------- 11

fn released_dataset_scan() -> Result<Option<String>, String> {
    let Some(path) = std::env::var_os(DATASET_ENV) else {
        return Ok(None);
    };
    let registry = Registry::builtin();
    let mut records = 0u64;
    let mut fields = 0u64;
    let mut leaks = Vec::new();
    for line in open_lines(Path::new(&path)).map_err(|e| e.to_string())? {
        let line = line.map_err(|e| e.to_string())?;
        let post = parse_post(&line.text).map_err(|e| format!("line {}: {e}", line.number))?;
        records += 1;
        for text in text_fields(&post) {
            fields += 1;
            for s in registry.detect(text) {
                if matches!(s.entity_type, EntityType::ApiKey | EntityType::SeedPhrase) {
                    leaks.push(format!("{} {}", post.post_id, s.entity_type));
                }
            }
        }
    }
    check(leaks.is_empty(), || format!("{} unmasked spans, e.g. {:?}", leaks.len(), &leaks[..leaks.len().min(3)]))?;
    Ok(Some(format!("{records} records, {fields} fields: 0 API_KEY / SEED_PHRASE spans outside placeholders")))
}

// ----------------------------------------------------------------

fn verdict(f: impl FnOnce() -> Result<String, String> + std::panic::UnwindSafe) -> Verdict {
    match std::panic::catch_unwind(f) {
        Ok(Ok(detail)) => Verdict::Pass(detail),
        Ok(Err(why)) => Verdict::Fail(why),
        Err(p) => Verdict::Fail(format!(
            "panicked: {}",
            p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
        )),
    }
}

fn main() {
    let filter: Option<Vec<u32>> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .map(|a| a.parse().ok())
        .collect();
    let wanted = |n: u32| filter.as_ref().is_none_or(|f| f.is_empty() || f.contains(&n));

    let runs = std::cell::OnceCell::new();
    let fixture = || -> Result<&FixtureRuns, String> {
        runs.get_or_init(fixture_runs).as_ref().map_err(|e| e.clone())
    };

    println!("\nacceptance criteria");
    let mut failed = 0;
    for n in 1..=11u32 {
        if !wanted(n) {
            continue;
        }
        let started = Instant::now();
        let (title, v) = match n {
            1 => ("planted-secret recall/precision", verdict(planted_recall_precision)),
            2 => ("masking idempotence and locality", verdict(masking_idempotence_locality)),
            3 => ("sentinel pipeline correctness", verdict(sentinel_pipeline)),
            4 => ("round-trip fidelity", verdict(round_trip)),
            5 => ("tree/lexical oracle equivalence", verdict(oracle_equivalence)),
            6 => ("power-law recovery", verdict(power_law_recovery)),
            7 => ("crawler rate contract", verdict(crawler_rate_contract)),
            8 => ("pipeline determinism", match fixture() {
                Ok(r) => verdict(std::panic::AssertUnwindSafe(|| pipeline_determinism(r))),
                Err(e) => Verdict::Fail(format!("fixture run failed: {e}")),
            }),
            9 => ("throughput", verdict(throughput)),
            10 => ("report shape", match fixture() {
                Ok(r) => verdict(std::panic::AssertUnwindSafe(|| report_shape(r))),
                Err(e) => Verdict::Fail(format!("fixture run failed: {e}")),
            }),
            _ => ("released-dataset rescan (observational)", match verdict(|| {
                released_dataset_scan().map(|o| o.unwrap_or_default())
            }) {
                Verdict::Pass(d) if d.is_empty() => Verdict::Skip(format!("set {DATASET_ENV} to a local copy of the dataset")),
                other => other,
            }),
        };
        let secs = started.elapsed().as_secs_f64();
        match v {
            Verdict::Pass(d) => println!("criterion {n:>2} PASS  {title}: {d} [{secs:.1} s]"),
            Verdict::Skip(d) => println!("criterion {n:>2} SKIP  {title}: {d}"),
            Verdict::Fail(d) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {title}: {d} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
