use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use once_cell::sync::Lazy;
use regex::Regex;

use super::bip39::Wordlist;
use super::validators::{
    base58check_address_valid, bech32_address_valid, iban_length, iban_valid, itin_valid,
    luhn_valid, ssn_valid,
};
use super::{resolve_overlaps, EntitySpan, EntityType, PiiError, RegistryConfig};

/// Follow-up tokens that mark a phrase like "password manager" rather than a
/// disclosed secret.
pub const DEFAULT_PASSWORD_STOPWORDS: &[&str] = &[
    "policy", "policies", "reset", "resets", "manager", "managers", "field", "fields",
    "change", "changes", "changed", "protected", "protection", "strength", "requirements",
    "required", "recovery", "hash", "hashes", "hashing", "length", "rules", "prompt",
    "login", "entry", "input", "form", "box", "file", "files", "security", "expired",
    "expiry", "rotation", "history", "hint", "hints", "generator", "storage", "stored",
    "please", "again", "here", "there", "that", "this", "then", "with", "from", "into",
    "your", "their", "which", "when", "where", "will", "would", "should", "could",
    "must", "were", "being", "been", "have", "does", "isn't", "wasn't", "only",
    "also", "and/or", "command", "commands", "directory", "current", "output",
    "prints", "shows", "returns", "works",
];

static PLACEHOLDER: Lazy<Regex> = Lazy::new(|| Regex::new(r"<PII:[A-Z_]+>").unwrap());

#[derive(Clone)]
enum Check {
    ApiKey,
    Password(Arc<HashSet<String>>),
    SeedPhrase(Arc<Wordlist>),
    Email,
    Phone,
    CreditCard,
    Iban,
    Ssn,
    Itin,
    Base58,
    Bech32,
    Eth,
    Custom { min_len: usize },
}

impl fmt::Debug for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Check::ApiKey => "api_key",
            Check::Password(_) => "password",
            Check::SeedPhrase(_) => "seed_phrase",
            Check::Email => "email",
            Check::Phone => "phone",
            Check::CreditCard => "luhn",
            Check::Iban => "mod97",
            Check::Ssn => "ssn",
            Check::Itin => "itin",
            Check::Base58 => "base58check",
            Check::Bech32 => "bech32",
            Check::Eth => "hex40",
            Check::Custom { .. } => "custom",
        };
        f.write_str(name)
    }
}

/// One pattern plus its validator.
#[derive(Debug, Clone)]
pub struct Recognizer {
    pub id: String,
    pub entity_type: EntityType,
    pub pattern: Regex,
    pub priority: i32,
    pub confidence: f64,
    check: Check,
}

impl Recognizer {
    fn new(
        id: &str,
        entity_type: EntityType,
        pattern: &str,
        priority: i32,
        confidence: f64,
        check: Check,
    ) -> Self {
        Self {
            id: id.to_string(),
            entity_type,
            pattern: Regex::new(pattern).expect("built-in pattern compiles"),
            priority,
            confidence,
            check,
        }
    }

    /// Validated candidate byte ranges in `text`.
    pub fn find(&self, text: &str) -> Vec<(usize, usize)> {
        match &self.check {
            Check::SeedPhrase(words) => seed_runs(text, &self.pattern, words),
            Check::Password(stop) => self
                .pattern
                .captures_iter(text)
                .filter_map(|c| c.get(1))
                .filter_map(|m| password_token(text, m.start(), m.end(), stop))
                .collect(),
            check => self
                .pattern
                .find_iter(text)
                .filter_map(|m| validate(check, text, m.start(), m.end()))
                .collect(),
        }
    }
}

fn prev_char(text: &str, at: usize) -> Option<char> {
    text[..at].chars().next_back()
}

fn next_char(text: &str, at: usize) -> Option<char> {
    text[at..].chars().next()
}

fn is_key_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

fn digit_after_separator(text: &str, at: usize) -> bool {
    let mut it = text[at..].chars();
    matches!(it.next(), Some('-' | '.')) && it.next().is_some_and(|c| c.is_ascii_digit())
}

fn one_separator_kind(s: &str) -> bool {
    let mut seps = s.bytes().filter(|b| !b.is_ascii_digit());
    match seps.next() {
        Some(first) => seps.all(|b| b == first),
        None => true,
    }
}

fn validate(check: &Check, text: &str, start: usize, end: usize) -> Option<(usize, usize)> {
    let s = &text[start..end];
    let ok = match check {
        Check::ApiKey => {
            let body = s.len() - 3;
            (20..=100).contains(&body) && !prev_char(text, start).is_some_and(is_key_char)
        }
        Check::Email => {
            !prev_char(text, start).is_some_and(|c| c.is_alphanumeric() || "._%+-".contains(c))
                && !next_char(text, end).is_some_and(|c| c.is_alphanumeric() || c == '@')
        }
        Check::Phone => {
            let digits: Vec<u8> = s.bytes().filter(u8::is_ascii_digit).collect();
            (7..=15).contains(&digits.len())
                && digits.iter().any(|&d| d != digits[0])
                && !prev_char(text, start)
                    .is_some_and(|c| c.is_alphanumeric() || "+-.".contains(c))
                && !next_char(text, end).is_some_and(|c| c.is_alphanumeric())
                && !digit_after_separator(text, end)
        }
        Check::CreditCard => {
            let digits: Vec<u8> = s.bytes().filter(u8::is_ascii_digit).collect();
            (13..=19).contains(&digits.len())
                && (b'2'..=b'6').contains(&digits[0])
                && digits.iter().any(|&d| d != digits[0])
                && luhn_valid(s)
                && one_separator_kind(s)
                && !prev_char(text, start).is_some_and(|c| c == '-' || c == '.')
                && !digit_after_separator(text, end)
        }
        Check::Iban => return iban_candidate(text, start, end),
        Check::Ssn | Check::Itin => {
            let mut parts = s.split('-');
            let (a, g, n) = (parts.next()?, parts.next()?, parts.next()?);
            let rule = match check {
                Check::Ssn => ssn_valid(a, g, n),
                _ => itin_valid(a, g),
            };
            rule && !prev_char(text, start).is_some_and(|c| c == '-')
                && !next_char(text, end).is_some_and(|c| c == '-')
        }
        Check::Base58 => base58check_address_valid(s),
        Check::Bech32 => bech32_address_valid(s),
        Check::Eth => true,
        Check::Custom { min_len } => !s.is_empty() && s.chars().count() >= *min_len,
        Check::Password(_) | Check::SeedPhrase(_) => unreachable!("handled by Recognizer::find"),
    };
    ok.then_some((start, end))
}

/// Trims a spaced candidate to its country's registered length, then runs
/// the checksum.
fn iban_candidate(text: &str, start: usize, end: usize) -> Option<(usize, usize)> {
    let s = &text[start..end];
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(expected) = iban_length(&compact[..2]) else {
        return iban_valid(&compact).then_some((start, end));
    };
    if compact.len() < expected {
        return None;
    }
    let mut end = end;
    if compact.len() > expected {
        // cut only at a group boundary so no half group is left behind
        let mut seen = 0;
        let mut cut = None;
        for (i, c) in s.char_indices() {
            if !c.is_whitespace() {
                seen += 1;
                if seen == expected {
                    cut = Some(i + c.len_utf8());
                    break;
                }
            }
        }
        let cut = cut?;
        if !s[cut..].starts_with(' ') {
            return None;
        }
        end = start + cut;
    }
    iban_valid(&compact[..expected]).then_some((start, end))
}

fn password_token(
    text: &str,
    start: usize,
    end: usize,
    stop: &HashSet<String>,
) -> Option<(usize, usize)> {
    let raw = &text[start..end];
    let lead = raw.len() - raw.trim_start_matches(['"', '\'', '`']).len();
    let token = raw[lead..].trim_end_matches(['.', ',', ';', ':', ')', ']', '}', '"', '\'', '`']);
    if token.starts_with('<') || token.chars().count() < 4 {
        return None;
    }
    if stop.contains(&token.to_lowercase()) {
        return None;
    }
    let s = start + lead;
    Some((s, s + token.len()))
}

const MIN_SEED_WORDS: usize = 12;

fn seed_runs(text: &str, tokens: &Regex, words: &Wordlist) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut run: Option<(usize, usize, usize)> = None; // (start, end, count)
    let mut flush = |run: &mut Option<(usize, usize, usize)>| {
        if let Some((s, e, n)) = run.take() {
            if n >= MIN_SEED_WORDS {
                out.push((s, e));
            }
        }
    };
    for m in tokens.find_iter(text) {
        let tok = m.as_str();
        let core = tok.trim_matches(|c: char| !c.is_alphanumeric());
        if core.is_empty() || !words.contains(core) {
            flush(&mut run);
            continue;
        }
        let lead = tok.len() - tok.trim_start_matches(|c: char| !c.is_alphanumeric()).len();
        let s = m.start() + lead;
        let e = s + core.len();
        run = Some(match run {
            Some((rs, _, n)) => (rs, e, n + 1),
            None => (s, e, 1),
        });
    }
    flush(&mut run);
    out
}

const API_KEY_PRIORITY: i32 = 30;
const CUSTOM_PRIORITY_BASE: i32 = 100;

fn builtin_recognizers(stop: Arc<HashSet<String>>, words: Arc<Wordlist>) -> Vec<Recognizer> {
    use EntityType::*;
    vec![
        Recognizer::new("api_key", ApiKey, r"sk-[A-Za-z0-9_-]+", API_KEY_PRIORITY, 0.9, Check::ApiKey),
        Recognizer::new(
            "password",
            Password,
            r#"(?i)\b(?:password|passwd|pwd)\b["']?\s*(?:[:=]+|\bis\b)?\s*(\S+)"#,
            29,
            0.6,
            Check::Password(stop),
        ),
        Recognizer::new("seed_phrase", SeedPhrase, r"\S+", 28, 0.85, Check::SeedPhrase(words)),
        Recognizer::new(
            "email",
            EmailAddress,
            r"[A-Za-z0-9][A-Za-z0-9._%+-]*@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,24}",
            20,
            0.9,
            Check::Email,
        ),
        Recognizer::new(
            "iban",
            IbanCode,
            r"\b[A-Z]{2}\d{2}(?:(?: [A-Z0-9]{4}){2,7}(?: [A-Z0-9]{1,3})?|[A-Z0-9]{11,30})\b",
            19,
            0.95,
            Check::Iban,
        ),
        Recognizer::new(
            "credit_card",
            CreditCard,
            r"\b(?:\d{13,19}|\d{4}(?:[ -]\d{4}){2,3}(?:[ -]\d{1,3})?|\d{4}[ -]\d{6}[ -]\d{4,5})\b",
            18,
            0.95,
            Check::CreditCard,
        ),
        Recognizer::new(
            "crypto_base58",
            Crypto,
            r"\b[13][1-9A-HJ-NP-Za-km-z]{25,34}\b",
            17,
            0.95,
            Check::Base58,
        ),
        Recognizer::new(
            "crypto_bech32",
            Crypto,
            r"(?i)\bbc1[02-9ac-hj-np-z]{6,87}\b",
            16,
            0.95,
            Check::Bech32,
        ),
        Recognizer::new("crypto_eth", Crypto, r"\b0x[0-9a-fA-F]{40}\b", 15, 0.7, Check::Eth),
        Recognizer::new("us_ssn", UsSsn, r"\b\d{3}-\d{2}-\d{4}\b", 14, 0.85, Check::Ssn),
        Recognizer::new("us_itin", UsItin, r"\b9\d{2}-\d{2}-\d{4}\b", 13, 0.85, Check::Itin),
        Recognizer::new(
            "phone_intl",
            PhoneNumber,
            r"\+\d{1,3}(?:[ .-]?\(?\d{1,4}\)?){2,5}",
            12,
            0.5,
            Check::Phone,
        ),
        Recognizer::new(
            "phone_nanp",
            PhoneNumber,
            r"(?:\(\d{3}\) ?|\b\d{3}[ .-])\d{3}[ .-]\d{4}\b",
            11,
            0.5,
            Check::Phone,
        ),
    ]
}

/// An immutable, shareable set of recognizers.
#[derive(Debug, Clone)]
pub struct Registry {
    recognizers: Vec<Recognizer>,
}

impl Registry {
    /// Every built-in recognizer with default settings.
    pub fn builtin() -> Self {
        let stop = DEFAULT_PASSWORD_STOPWORDS.iter().map(|s| s.to_string()).collect();
        Self {
            recognizers: builtin_recognizers(Arc::new(stop), Arc::new(Wordlist::english().clone())),
        }
    }

    pub fn from_config(cfg: &RegistryConfig) -> Result<Self, PiiError> {
        let stop: HashSet<String> = match &cfg.password_stopwords {
            Some(list) => list.iter().map(|s| s.to_lowercase()).collect(),
            None => DEFAULT_PASSWORD_STOPWORDS.iter().map(|s| s.to_string()).collect(),
        };
        let words = match &cfg.bip39_wordlist {
            Some(path) => Wordlist::load(path).map_err(PiiError::Wordlist)?,
            None => Wordlist::english().clone(),
        };
        let mut recognizers = builtin_recognizers(Arc::new(stop), Arc::new(words));
        let known: HashSet<String> = recognizers.iter().map(|r| r.id.clone()).collect();
        for id in &cfg.disabled_recognizers {
            if !known.contains(id) && !cfg.custom.iter().any(|c| &c.id == id) {
                return Err(PiiError::UnknownRecognizer(id.clone()));
            }
        }
        let mut ids = known;
        for (i, c) in cfg.custom.iter().enumerate() {
            if !ids.insert(c.id.clone()) {
                return Err(PiiError::DuplicateId(c.id.clone()));
            }
            let pattern = Regex::new(&c.pattern).map_err(|source| PiiError::InvalidPattern {
                id: c.id.clone(),
                source,
            })?;
            recognizers.push(Recognizer {
                id: c.id.clone(),
                entity_type: c.entity_type,
                pattern,
                priority: CUSTOM_PRIORITY_BASE + i as i32,
                confidence: 0.8,
                check: Check::Custom { min_len: c.min_len },
            });
        }
        recognizers.retain(|r| {
            !cfg.disabled_types.contains(&r.entity_type) && !cfg.disabled_recognizers.contains(&r.id)
        });
        Ok(Self { recognizers })
    }

    pub fn recognizers(&self) -> &[Recognizer] {
        &self.recognizers
    }

    pub fn get(&self, id: &str) -> Option<&Recognizer> {
        self.recognizers.iter().find(|r| r.id == id)
    }

    /// Raw validated spans of one recognizer, before overlap resolution.
    pub fn run_one(&self, id: &str, text: &str) -> Result<Vec<EntitySpan>, PiiError> {
        let r = self
            .get(id)
            .ok_or_else(|| PiiError::UnknownRecognizer(id.to_string()))?;
        let mut offsets = CharOffsets::new(text);
        Ok(r
            .find(text)
            .into_iter()
            .map(|(s, e)| make_span(r, text, s, e, &mut offsets))
            .collect())
    }

    /// All validated matches, overlap-resolved and sorted by start. Matches
    /// touching an existing placeholder are ignored.
    pub fn detect(&self, text: &str) -> Vec<EntitySpan> {
        let placeholders: Vec<(usize, usize)> =
            PLACEHOLDER.find_iter(text).map(|m| (m.start(), m.end())).collect();
        let mut offsets = CharOffsets::new(text);
        let mut spans = Vec::new();
        for r in &self.recognizers {
            for (s, e) in r.find(text) {
                if placeholders.iter().any(|&(ps, pe)| s < pe && ps < e) {
                    continue;
                }
                spans.push(make_span(r, text, s, e, &mut offsets));
            }
        }
        resolve_overlaps(spans)
    }

    /// Span lists per entity type, unresolved; handy for diagnostics.
    pub fn detect_type(&self, t: EntityType, text: &str) -> Vec<EntitySpan> {
        let mut offsets = CharOffsets::new(text);
        let spans = self
            .recognizers
            .iter()
            .filter(|r| r.entity_type == t)
            .flat_map(|r| {
                r.find(text)
                    .into_iter()
                    .map(move |(s, e)| (r, s, e))
            })
            .map(|(r, s, e)| make_span(r, text, s, e, &mut offsets))
            .collect();
        resolve_overlaps(spans)
    }
}

fn make_span(r: &Recognizer, text: &str, s: usize, e: usize, offsets: &mut CharOffsets) -> EntitySpan {
    EntitySpan {
        entity_type: r.entity_type,
        start: offsets.char_at(s),
        end: offsets.char_at(e),
        matched_text: text[s..e].to_string(),
        recognizer_id: r.id.clone(),
        confidence: r.confidence,
        priority: r.priority,
    }
}

/// Byte to code-point offset conversion, built lazily for non-ASCII text.
struct CharOffsets<'a> {
    text: &'a str,
    table: Option<Vec<u32>>,
}

impl<'a> CharOffsets<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, table: None }
    }

    fn char_at(&mut self, byte: usize) -> usize {
        if self.text.is_ascii() {
            return byte;
        }
        let text = self.text;
        let table = self.table.get_or_insert_with(|| {
            let mut t = vec![0u32; text.len() + 1];
            let mut n = 0u32;
            for (b, c) in text.char_indices() {
                for slot in &mut t[b..b + c.len_utf8()] {
                    *slot = n;
                }
                n += 1;
            }
            t[text.len()] = n;
            t
        });
        table[byte] as usize
    }
}

/// Single-recognizer entry points, each using the built-in settings.
macro_rules! single {
    ($($(#[$m:meta])* $name:ident => $id:literal;)*) => {$(
        $(#[$m])*
        pub fn $name(text: &str) -> Vec<EntitySpan> {
            super::builtin_registry().run_one($id, text).expect("built-in id")
        }
    )*};
}

single! {
    /// `sk-` keys with 20 to 100 key characters, not glued to other key characters.
    recognize_api_key => "api_key";
    /// The token after a password keyword and optional separator.
    recognize_password => "password";
    /// Maximal runs of at least twelve wordlist words.
    recognize_seed_phrase => "seed_phrase";
}

/// Email, phone, card, IBAN, SSN, ITIN and crypto address recognizers,
/// overlap-resolved among themselves.
pub fn recognize_standard(text: &str) -> Vec<EntitySpan> {
    let reg = super::builtin_registry();
    let mut offsets = CharOffsets::new(text);
    let spans = reg
        .recognizers
        .iter()
        .filter(|r| !matches!(r.id.as_str(), "api_key" | "password" | "seed_phrase"))
        .flat_map(|r| r.find(text).into_iter().map(move |(s, e)| (r, s, e)))
        .map(|(r, s, e)| make_span(r, text, s, e, &mut offsets))
        .collect();
    resolve_overlaps(spans)
}
