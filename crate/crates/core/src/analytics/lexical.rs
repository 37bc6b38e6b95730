use std::collections::{BTreeMap, HashMap};

use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use super::{mean_of_sorted, median_of_sorted, median_from_histogram, AnalyticsError};

static PLACEHOLDER: Lazy<Regex> = Lazy::new(|| Regex::new(r"<PII:[A-Z_]+>").unwrap());

/// Tokenization settings for lexical counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LexicalOptions {
    pub lowercase: bool,
    /// Leave `<PII:..>` placeholders out of the token stream.
    pub skip_placeholders: bool,
}

impl Default for LexicalOptions {
    fn default() -> Self {
        Self {
            lowercase: true,
            skip_placeholders: true,
        }
    }
}

/// Unicode word segmentation with punctuation dropped.
pub fn tokenize(text: &str, opts: &LexicalOptions) -> Vec<String> {
    let text = if opts.skip_placeholders {
        PLACEHOLDER.replace_all(text, " ")
    } else {
        std::borrow::Cow::Borrowed(text)
    };
    text.unicode_words()
        .map(|w| if opts.lowercase { w.to_lowercase() } else { w.to_string() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexicalStats {
    /// Posts whose content contributed.
    pub documents: u64,
    pub total_tokens: u64,
    pub vocabulary_size: u64,
    pub ttr: f64,
    pub hapax_ratio: f64,
    pub fk_grade_median: Option<f64>,
    pub fk_grade_mean: Option<f64>,
    pub char_length_mean: f64,
    pub char_length_median: f64,
}

/// Mergeable partial state for [`LexicalStats`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LexicalAcc {
    pub documents: u64,
    pub counts: HashMap<String, u64>,
    pub total_tokens: u64,
    pub fk_grades: Vec<f64>,
    pub lengths: BTreeMap<u64, u64>,
    pub length_sum: u64,
}

impl LexicalAcc {
    /// Adds one clean, non-empty post body.
    pub fn add(&mut self, content: &str, opts: &LexicalOptions) {
        self.documents += 1;
        for tok in tokenize(content, opts) {
            self.total_tokens += 1;
            *self.counts.entry(tok).or_default() += 1;
        }
        if let Ok(g) = flesch_kincaid(content) {
            self.fk_grades.push(g);
        }
        let len = content.chars().count() as u64;
        *self.lengths.entry(len).or_default() += 1;
        self.length_sum += len;
    }

    pub fn merge(&mut self, other: LexicalAcc) {
        self.documents += other.documents;
        self.total_tokens += other.total_tokens;
        for (k, v) in other.counts {
            *self.counts.entry(k).or_default() += v;
        }
        self.fk_grades.extend(other.fk_grades);
        for (k, v) in other.lengths {
            *self.lengths.entry(k).or_default() += v;
        }
        self.length_sum += other.length_sum;
    }

    pub fn finish(&self) -> Result<LexicalStats, AnalyticsError> {
        if self.total_tokens == 0 {
            return Err(AnalyticsError::EmptyCorpus);
        }
        let vocab = self.counts.len() as u64;
        let hapax = self.counts.values().filter(|&&c| c == 1).count() as u64;
        let mut grades = self.fk_grades.clone();
        grades.sort_by(f64::total_cmp);
        Ok(LexicalStats {
            documents: self.documents,
            total_tokens: self.total_tokens,
            vocabulary_size: vocab,
            ttr: vocab as f64 / self.total_tokens as f64,
            hapax_ratio: hapax as f64 / vocab as f64,
            fk_grade_median: median_of_sorted(&grades),
            fk_grade_mean: mean_of_sorted(&grades),
            char_length_mean: self.length_sum as f64 / self.documents as f64,
            char_length_median: median_from_histogram(&self.lengths).unwrap_or(0.0),
        })
    }
}

/// Lexical statistics over a bag of already tokenized documents.
pub fn lexical_stats_from_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<(u64, u64, f64, f64), AnalyticsError> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in tokens {
        *counts.entry(t.as_ref()).or_default() += 1;
    }
    if tokens.is_empty() {
        return Err(AnalyticsError::EmptyCorpus);
    }
    let vocab = counts.len() as u64;
    let hapax = counts.values().filter(|&&c| c == 1).count() as f64;
    Ok((
        tokens.len() as u64,
        vocab,
        vocab as f64 / tokens.len() as f64,
        hapax / vocab as f64,
    ))
}

/// Counts vowel groups (a, e, i, o, u, y), dropping a silent final `e`
/// (but not `-le` after a consonant). Every word has at least one syllable.
pub fn count_syllables(word: &str) -> u32 {
    let w: Vec<char> = word
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphabetic())
        .collect();
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0u32;
    let mut prev = false;
    for &c in &w {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    let n = w.len();
    if groups > 1 && n >= 2 && w[n - 1] == 'e' && !is_vowel(w[n - 2]) {
        let le_syllable = w[n - 2] == 'l' && n >= 3 && !is_vowel(w[n - 3]);
        if !le_syllable {
            groups -= 1;
        }
    }
    groups.max(1)
}

/// Sentence count: runs of `.`, `!` or `?` followed by whitespace or the end
/// close a sentence; trailing text without a terminator counts as one more.
/// Segments without words are not counted.
pub fn count_sentences(text: &str) -> u32 {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = 0u32;
    let mut seg_has_word = false;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() {
            seg_has_word = true;
        }
        if matches!(c, '.' | '!' | '?') {
            let mut j = i;
            while j + 1 < chars.len() && matches!(chars[j + 1], '.' | '!' | '?') {
                j += 1;
            }
            let closes = j + 1 == chars.len() || chars[j + 1].is_whitespace();
            if closes && seg_has_word {
                sentences += 1;
                seg_has_word = false;
            }
            i = j + 1;
            continue;
        }
        i += 1;
    }
    if seg_has_word {
        sentences += 1;
    }
    sentences
}

/// Flesch-Kincaid grade level:
/// `0.39 * words/sentences + 11.8 * syllables/words - 15.59`.
pub fn flesch_kincaid(text: &str) -> Result<f64, AnalyticsError> {
    let words: Vec<&str> = text.unicode_words().collect();
    if words.is_empty() {
        return Err(AnalyticsError::NoWords);
    }
    let syllables: u64 = words.iter().map(|w| count_syllables(w) as u64).sum();
    let sentences = count_sentences(text).max(1) as f64;
    let w = words.len() as f64;
    Ok(0.39 * (w / sentences) + 11.8 * (syllables as f64 / w) - 15.59)
}
