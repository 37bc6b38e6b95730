//! PII and credential detection and masking.
//!
//! A [`Registry`] holds pattern recognizers, each with an optional checksum
//! or wordlist validator. Candidate spans from all recognizers are resolved
//! to a non-overlapping set (longer span, then higher priority, then earlier
//! start) and replaced with `<PII:{TYPE}>` placeholders.
//!
//! Offsets in [`EntitySpan`] are code points, half-open.

pub mod bip39;
mod recognizers;
mod resolve;
pub mod validators;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::model::PostRecord;
use crate::normalize::is_sentinel;

pub use recognizers::{
    recognize_api_key, recognize_password, recognize_seed_phrase, recognize_standard, Recognizer,
    Registry, DEFAULT_PASSWORD_STOPWORDS,
};
pub use resolve::{mask, resolve_overlaps};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityType {
    EmailAddress,
    PhoneNumber,
    CreditCard,
    Crypto,
    IbanCode,
    UsSsn,
    UsItin,
    ApiKey,
    Password,
    SeedPhrase,
}

impl EntityType {
    pub const ALL: [EntityType; 10] = [
        EntityType::EmailAddress,
        EntityType::PhoneNumber,
        EntityType::CreditCard,
        EntityType::Crypto,
        EntityType::IbanCode,
        EntityType::UsSsn,
        EntityType::UsItin,
        EntityType::ApiKey,
        EntityType::Password,
        EntityType::SeedPhrase,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::EmailAddress => "EMAIL_ADDRESS",
            EntityType::PhoneNumber => "PHONE_NUMBER",
            EntityType::CreditCard => "CREDIT_CARD",
            EntityType::Crypto => "CRYPTO",
            EntityType::IbanCode => "IBAN_CODE",
            EntityType::UsSsn => "US_SSN",
            EntityType::UsItin => "US_ITIN",
            EntityType::ApiKey => "API_KEY",
            EntityType::Password => "PASSWORD",
            EntityType::SeedPhrase => "SEED_PHRASE",
        }
    }

    /// The in-text replacement for a masked span of this type.
    pub fn placeholder(self) -> String {
        format!("<PII:{}>", self.as_str())
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = PiiError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| PiiError::UnknownEntityType(s.to_string()))
    }
}

/// One detected occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub entity_type: EntityType,
    /// Code-point offset of the first character.
    pub start: usize,
    /// Code-point offset one past the last character.
    pub end: usize,
    pub matched_text: String,
    pub recognizer_id: String,
    pub confidence: f64,
    /// Overlap tie-breaker copied from the recognizer.
    pub priority: i32,
}

impl EntitySpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PiiError {
    #[error("unknown entity type {0:?}")]
    UnknownEntityType(String),
    #[error("custom recognizer {id:?}: {source}")]
    InvalidPattern { id: String, source: regex::Error },
    #[error("duplicate recognizer id {0:?}")]
    DuplicateId(String),
    #[error("unknown recognizer id {0:?}")]
    UnknownRecognizer(String),
    #[error("wordlist: {0}")]
    Wordlist(String),
}

/// An extra pattern recognizer supplied by configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomPattern {
    pub id: String,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub pattern: String,
    /// Minimum match length in code points.
    #[serde(default)]
    pub min_len: usize,
}

/// Registry settings as read from the pipeline config.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegistryConfig {
    /// Entity types to switch off entirely.
    pub disabled_types: Vec<EntityType>,
    /// Individual recognizer ids to switch off.
    pub disabled_recognizers: Vec<String>,
    pub custom: Vec<CustomPattern>,
    /// Replaces the built-in PASSWORD stop set when present.
    pub password_stopwords: Option<Vec<String>>,
    /// Replaces the embedded BIP39 list when present.
    pub bip39_wordlist: Option<PathBuf>,
}

/// Per-run masking outcome counts. Merging is associative.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskReport {
    pub entities: BTreeMap<EntityType, u64>,
    /// Every text field visited, including skipped ones.
    pub fields_processed: u64,
    /// Sentinel or empty fields left untouched.
    pub fields_skipped: u64,
    pub fields_with_detection: u64,
    pub entities_masked: u64,
}

impl MaskReport {
    pub fn merge(&mut self, other: &MaskReport) {
        for (t, n) in &other.entities {
            *self.entities.entry(*t).or_default() += n;
        }
        self.fields_processed += other.fields_processed;
        self.fields_skipped += other.fields_skipped;
        self.fields_with_detection += other.fields_with_detection;
        self.entities_masked += other.entities_masked;
    }

    pub fn count(&self, t: EntityType) -> u64 {
        self.entities.get(&t).copied().unwrap_or(0)
    }

    fn record(&mut self, spans: &[EntitySpan]) {
        self.fields_processed += 1;
        if !spans.is_empty() {
            self.fields_with_detection += 1;
        }
        for s in spans {
            *self.entities.entry(s.entity_type).or_default() += 1;
        }
        self.entities_masked += spans.len() as u64;
    }
}

static DEFAULT_REGISTRY: Lazy<Registry> = Lazy::new(Registry::builtin);

pub(crate) fn builtin_registry() -> &'static Registry {
    &DEFAULT_REGISTRY
}

/// Runs the built-in recognizers over `text`.
pub fn detect_entities(text: &str) -> Vec<EntitySpan> {
    DEFAULT_REGISTRY.detect(text)
}

/// Masks fields of records with a fixed registry.
#[derive(Debug, Clone)]
pub struct Anonymizer {
    registry: Registry,
}

impl Default for Anonymizer {
    fn default() -> Self {
        Self {
            registry: DEFAULT_REGISTRY.clone(),
        }
    }
}

impl Anonymizer {
    pub fn new(registry: Registry) -> Self {
        Self { registry }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    /// Detects and masks one text. Sentinel and empty text is returned as is.
    pub fn anonymize_text(&self, text: &str) -> (String, Vec<EntitySpan>) {
        if text.is_empty() || is_sentinel(text) {
            return (text.to_string(), Vec::new());
        }
        let spans = self.registry.detect(text);
        if spans.is_empty() {
            return (text.to_string(), spans);
        }
        (mask(text, &spans), spans)
    }

    /// Masks one field in place, accounting into `report`.
    pub fn anonymize_field(&self, field: &mut String, report: &mut MaskReport) {
        if field.is_empty() || is_sentinel(field) {
            report.fields_processed += 1;
            report.fields_skipped += 1;
            return;
        }
        let spans = self.registry.detect(field);
        report.record(&spans);
        if !spans.is_empty() {
            *field = mask(field, &spans);
        }
    }

    /// Masks title, body and every comment at any depth. Identifiers,
    /// community fields and the url are left untouched.
    pub fn anonymize_record(&self, record: &PostRecord) -> (PostRecord, MaskReport) {
        let mut out = record.clone();
        let report = self.anonymize_record_in_place(&mut out);
        (out, report)
    }

    pub fn anonymize_record_in_place(&self, record: &mut PostRecord) -> MaskReport {
        let mut report = MaskReport::default();
        self.anonymize_field(&mut record.title, &mut report);
        self.anonymize_field(&mut record.content, &mut report);
        record.for_each_comment_mut(|c| self.anonymize_field(&mut c.content, &mut report));
        report
    }
}

/// [`Anonymizer::anonymize_record`] with the built-in registry.
pub fn anonymize_record(record: &PostRecord) -> (PostRecord, MaskReport) {
    Anonymizer::default().anonymize_record(record)
}

#[cfg(test)]
mod tests {
    use super::validators::tests::{make_iban, with_luhn_digit};
    use super::*;
    use crate::model::parse_post;
    use proptest::prelude::*;

    fn types(spans: &[EntitySpan]) -> Vec<EntityType> {
        spans.iter().map(|s| s.entity_type).collect()
    }

    fn texts(spans: &[EntitySpan]) -> Vec<&str> {
        spans.iter().map(|s| s.matched_text.as_str()).collect()
    }

    #[test]
    fn email_example() {
        let spans = detect_entities("contact me at a@b.co");
        assert_eq!(types(&spans), [EntityType::EmailAddress]);
        assert_eq!((spans[0].start, spans[0].end), (14, 20));
        assert_eq!(spans[0].matched_text, "a@b.co");
    }

    #[test]
    fn api_key_bounds() {
        let key20 = format!("sk-{}", "a".repeat(20));
        let spans = detect_entities(&format!("key: {key20}"));
        assert_eq!(types(&spans), [EntityType::ApiKey]);
        assert_eq!(spans[0].matched_text, key20);

        assert!(recognize_api_key("sk-short").is_empty());
        assert!(recognize_api_key(&format!("sk-{}", "a".repeat(19))).is_empty());

        let key100 = format!("sk-{}", "Ab9".repeat(34)[..100].to_string());
        assert_eq!(texts(&recognize_api_key(&key100)), [key100.as_str()]);
        let key101 = format!("sk-{}", "b".repeat(101));
        assert!(recognize_api_key(&key101).is_empty());

        assert!(recognize_api_key(&format!("task-{}", "a".repeat(20))).is_empty());
        assert!(recognize_api_key(&format!("_sk-{}", "a".repeat(20))).is_empty());
        let quoted = format!("\"sk-{}\"", "x_y-".repeat(6));
        assert_eq!(recognize_api_key(&quoted).len(), 1);
    }

    #[test]
    fn password_examples() {
        assert_eq!(texts(&recognize_password("password: hunter22")), ["hunter22"]);
        assert_eq!(texts(&recognize_password("my pwd=Xk9!q")), ["Xk9!q"]);
        assert_eq!(texts(&recognize_password("the PASSWORD is s3cr3t.")), ["s3cr3t"]);
        assert_eq!(texts(&recognize_password("passwd \"abcd1234\"")), ["abcd1234"]);
        assert!(recognize_password("password policy applies").is_empty());
        assert!(recognize_password("use a password manager").is_empty());
        assert!(recognize_password("password: abc").is_empty());
        assert!(recognize_password("passwords are hard").is_empty());
        assert!(recognize_password("password: <PII:API_KEY>").is_empty());
    }

    #[test]
    fn password_stopwords_are_configurable() {
        let cfg = RegistryConfig {
            password_stopwords: Some(vec![]),
            ..Default::default()
        };
        let reg = Registry::from_config(&cfg).unwrap();
        let spans = reg.run_one("password", "password policy applies").unwrap();
        assert_eq!(texts(&spans), ["policy"]);
    }

    #[test]
    fn seed_phrase_runs() {
        let twelve = format!("{} about", "abandon ".repeat(11).trim_end());
        let spans = recognize_seed_phrase(&twelve);
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].start, spans[0].end), (0, twelve.chars().count()));

        let eleven = "abandon ".repeat(11);
        assert!(recognize_seed_phrase(&eleven).is_empty());

        let broken = format!("{} notaword {}", "abandon ".repeat(6).trim_end(), "zoo ".repeat(7).trim_end());
        assert!(recognize_seed_phrase(&broken).is_empty());

        let punct = format!("mnemonic: \"{},\" ok", "Zoo ".repeat(12).trim_end());
        let spans = recognize_seed_phrase(&punct);
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].matched_text, "Zoo ".repeat(12).trim_end());
    }

    #[test]
    fn seed_phrase_membership_oracle() {
        let list = crate::pii::bip39::Wordlist::english();
        for w in ["abandon", "about", "zoo", "legal", "winner"] {
            assert!(list.contains(w));
        }
        for w in ["password", "hellos", "abandoned", ""] {
            assert!(!list.contains(w), "{w}");
        }
    }

    #[test]
    fn credit_card_luhn() {
        assert!(luhn_ok("4532015112830366"));
        assert_eq!(types(&recognize_standard("4532015112830366")), [EntityType::CreditCard]);
        assert!(recognize_standard("4532015112830367").is_empty());
        assert_eq!(
            types(&recognize_standard("card 4532 0151 1283 0366 exp")),
            [EntityType::CreditCard]
        );
        assert!(recognize_standard("0000000000000000").is_empty());
        let generated = with_luhn_digit("51051051051051");
        assert_eq!(types(&detect_entities(&generated)), [EntityType::CreditCard]);
    }

    fn luhn_ok(s: &str) -> bool {
        validators::luhn_valid(s)
    }

    #[test]
    fn iban_mod97() {
        assert_eq!(types(&recognize_standard("GB82WEST12345698765432")), [EntityType::IbanCode]);
        assert!(recognize_standard("GB83WEST12345698765432").is_empty());
        assert_eq!(
            texts(&recognize_standard("pay to DE89 3704 0044 0532 0130 00 today")),
            ["DE89 3704 0044 0532 0130 00"]
        );
        let fr = make_iban("FR", "20041010050500013M02606");
        assert_eq!(types(&detect_entities(&format!("iban {fr}"))), [EntityType::IbanCode]);
    }

    #[test]
    fn ssn_and_itin() {
        assert!(recognize_standard("000-12-3456").is_empty());
        assert!(recognize_standard("666-12-3456").is_empty());
        assert_eq!(types(&recognize_standard("ssn 123-45-6789")), [EntityType::UsSsn]);
        assert_eq!(types(&recognize_standard("itin 912-78-1234")), [EntityType::UsItin]);
        assert!(recognize_standard("912-40-1234").is_empty());
        assert!(recognize_standard("1-123-45-6789").is_empty());
    }

    #[test]
    fn phones() {
        assert_eq!(types(&recognize_standard("call (415) 555-2671")), [EntityType::PhoneNumber]);
        assert_eq!(types(&recognize_standard("call 415-555-2671 now")), [EntityType::PhoneNumber]);
        assert_eq!(types(&recognize_standard("tel +44 20 7946 0958")), [EntityType::PhoneNumber]);
        assert!(recognize_standard("+1 111 111 1111").is_empty());
        assert!(recognize_standard("version 2024-01-15").is_empty());
        assert!(recognize_standard("+12 34").is_empty());
    }

    #[test]
    fn crypto_addresses() {
        for addr in [
            "1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa",
            "3J98t1WpEZ73CNmQviecrnyiWrnqRhWNLy",
            "bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t4",
            "0x52908400098527886E0F7030069857D2E4169EE7",
        ] {
            let spans = detect_entities(&format!("send to {addr} thanks"));
            assert_eq!(types(&spans), [EntityType::Crypto], "{addr}");
            assert_eq!(spans[0].matched_text, addr);
        }
        assert!(detect_entities("1A1zP1eP5QGefi2DMPTfTL5SLmv7Divfb").is_empty());
        assert!(detect_entities("bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t5").is_empty());
    }

    #[test]
    fn overlap_priorities_in_context() {
        // a phone-shaped password: equal spans, password wins
        let spans = detect_entities("pwd: 415-555-2671");
        assert_eq!(types(&spans), [EntityType::Password]);
        // seed phrase swallows nothing else but wins over shorter overlaps
        let seed = "abandon ".repeat(11) + "about";
        assert_eq!(types(&detect_entities(&seed)), [EntityType::SeedPhrase]);
    }

    #[test]
    fn custom_patterns_outrank_builtins() {
        let cfg = RegistryConfig {
            custom: vec![CustomPattern {
                id: "ticket".into(),
                entity_type: EntityType::ApiKey,
                pattern: r"\d{3}-\d{2}-\d{4}".into(),
                min_len: 5,
            }],
            ..Default::default()
        };
        let reg = Registry::from_config(&cfg).unwrap();
        let spans = reg.detect("id 123-45-6789");
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].recognizer_id, "ticket");
        assert!(spans[0].priority > 30);
    }

    #[test]
    fn registry_config_errors() {
        let bad = RegistryConfig {
            custom: vec![CustomPattern {
                id: "x".into(),
                entity_type: EntityType::Crypto,
                pattern: "(".into(),
                min_len: 0,
            }],
            ..Default::default()
        };
        assert!(matches!(Registry::from_config(&bad), Err(PiiError::InvalidPattern { .. })));
        let dup = RegistryConfig {
            custom: vec![CustomPattern {
                id: "email".into(),
                entity_type: EntityType::Crypto,
                pattern: "x".into(),
                min_len: 0,
            }],
            ..Default::default()
        };
        assert!(matches!(Registry::from_config(&dup), Err(PiiError::DuplicateId(_))));
        let unknown = RegistryConfig {
            disabled_recognizers: vec!["nope".into()],
            ..Default::default()
        };
        assert!(matches!(Registry::from_config(&unknown), Err(PiiError::UnknownRecognizer(_))));
        let off = RegistryConfig {
            disabled_types: vec![EntityType::EmailAddress],
            ..Default::default()
        };
        assert!(Registry::from_config(&off).unwrap().detect("a@b.co").is_empty());
    }

    #[test]
    fn builtin_priorities_are_unique() {
        let reg = Registry::builtin();
        let mut p: Vec<i32> = reg.recognizers().iter().map(|r| r.priority).collect();
        p.sort();
        p.dedup();
        assert_eq!(p.len(), reg.recognizers().len());
    }

    #[test]
    fn offsets_are_code_points() {
        let text = "ünïcødé ☃ mail a@b.co";
        let spans = detect_entities(text);
        let chars: Vec<char> = text.chars().collect();
        let slice: String = chars[spans[0].start..spans[0].end].iter().collect();
        assert_eq!(slice, "a@b.co");
        assert_eq!(mask(text, &spans), "ünïcødé ☃ mail <PII:EMAIL_ADDRESS>");
    }

    fn record_json(comments: &str) -> String {
        format!(
            r#"{{"post_id":"p1","title":"hi a@b.co","content":"ssn 123-45-6789","url":null,"upvotes":1,"downvotes":0,"comment_count":1,"created_at":"2026-01-28T00:00:00Z","submolt_id":"s","submolt_name":"general","author_id":"u1","author_name":"alice","comments":{comments}}}"#
        )
    }

    #[test]
    fn anonymizes_deep_replies() {
        let json = record_json(
            r#"[{"id":"c1","parent_id":null,"content":"ok","author_id":"u2","author_name":"b","upvotes":0,"downvotes":0,"created_at":"2026-01-28T01:00:00Z","replies":[{"id":"c2","parent_id":"c1","content":"hmm","author_id":"u3","author_name":"c","upvotes":0,"downvotes":0,"created_at":"2026-01-28T02:00:00Z","replies":[{"id":"c3","parent_id":"c2","content":"write x@y.org","author_id":"u4","author_name":"d","upvotes":0,"downvotes":0,"created_at":"2026-01-28T03:00:00Z","replies":[]}]}]}]"#,
        );
        let rec = parse_post(&json).unwrap();
        let (out, report) = anonymize_record(&rec);
        let deep = &out.comments[0].replies[0].replies[0];
        assert_eq!(deep.content, "write <PII:EMAIL_ADDRESS>");
        assert_eq!(out.title, "hi <PII:EMAIL_ADDRESS>");
        assert_eq!(out.content, "ssn <PII:US_SSN>");
        assert_eq!(report.count(EntityType::EmailAddress), 2);
        assert_eq!(report.count(EntityType::UsSsn), 1);
        assert_eq!(report.entities_masked, 3);
        assert_eq!(report.fields_processed, 5);
        assert_eq!(report.fields_with_detection, 3);
        assert_eq!(out.author_name, rec.author_name);
        assert_eq!(out.post_id, rec.post_id);

        // idempotent
        let (again, second) = anonymize_record(&out);
        assert_eq!(again, out);
        assert_eq!(second.entities_masked, 0);
    }

    #[test]
    fn sentinel_fields_skipped() {
        let mut rec = parse_post(&record_json("[]")).unwrap();
        rec.content = "<REMOVED-SPAM>".into();
        rec.title = "plain".into();
        let (out, report) = anonymize_record(&rec);
        assert_eq!(out.content, "<REMOVED-SPAM>");
        assert_eq!(report.entities_masked, 0);
        assert_eq!(report.fields_skipped, 1);
    }

    #[test]
    fn report_totals_match_placeholder_count() {
        let mut rec = parse_post(&record_json("[]")).unwrap();
        rec.title = "card 4532015112830366 and key sk-abcdefghijklmnopqrstuvwxyz".into();
        let (out, report) = anonymize_record(&rec);
        let placeholders = out.title.matches("<PII:").count() + out.content.matches("<PII:").count();
        assert_eq!(report.entities_masked as usize, placeholders);
        assert_eq!(report.entities.values().sum::<u64>(), report.entities_masked);
        assert_eq!(report.entities.len(), 3);
    }

    #[test]
    fn merge_is_associative() {
        let mk = |n: u64, t: EntityType| {
            let mut r = MaskReport::default();
            r.entities.insert(t, n);
            r.entities_masked = n;
            r.fields_processed = n + 1;
            r
        };
        let (a, b, c) = (mk(1, EntityType::Crypto), mk(2, EntityType::UsSsn), mk(3, EntityType::Crypto));
        let mut left = a.clone();
        left.merge(&b);
        left.merge(&c);
        let mut bc = b.clone();
        bc.merge(&c);
        let mut right = a;
        right.merge(&bc);
        assert_eq!(left, right);
    }

    const PLANTS: &[&str] = &[
        "a.b@example.com",
        "4532015112830366",
        "GB82WEST12345698765432",
        "123-45-6789",
        "912-78-1234",
        "sk-ABCDEFGHIJKLMNOPQRSTUVWX",
        "1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa",
        "(415) 555-2671",
        "0x52908400098527886E0F7030069857D2E4169EE7",
    ];

    proptest! {
        #[test]
        fn planted_entities_are_masked_locally(
            words in proptest::collection::vec("[a-z]{1,8}|[äöüé☃]{1,3}|[,.!?]", 0..20),
            plants in proptest::collection::vec((0usize..PLANTS.len(), 0usize..20), 0..4),
        ) {
            let mut toks: Vec<String> = words;
            for (p, at) in &plants {
                let at = (*at).min(toks.len());
                toks.insert(at, PLANTS[*p].to_string());
            }
            let text = toks.join(" ");
            let a = Anonymizer::default();
            let (masked, spans) = a.anonymize_text(&text);
            prop_assert_eq!(spans.len(), plants.len());
            // text outside spans unchanged
            let chars: Vec<char> = text.chars().collect();
            let mut rebuilt = String::new();
            let mut last = 0;
            for s in &spans {
                rebuilt.extend(&chars[last..s.start]);
                rebuilt.push_str(&s.entity_type.placeholder());
                last = s.end;
            }
            rebuilt.extend(&chars[last..]);
            prop_assert_eq!(&rebuilt, &masked);
            // complete and idempotent
            prop_assert!(a.registry().detect(&masked).is_empty());
            let (twice, _) = a.anonymize_text(&masked);
            prop_assert_eq!(twice, masked);
        }

        #[test]
        fn detect_spans_slice_exactly(s in "[ -~äé☃]{0,80}") {
            let chars: Vec<char> = s.chars().collect();
            for span in detect_entities(&s) {
                prop_assert!(span.start < span.end && span.end <= chars.len());
                let slice: String = chars[span.start..span.end].iter().collect();
                prop_assert_eq!(slice, span.matched_text);
            }
        }
    }
}
