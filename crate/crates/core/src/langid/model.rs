use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use once_cell::sync::Lazy;

use super::{Classifier, LangIdError, LangTag, UNDETERMINED};

const EMBEDDED_TSV: &str = include_str!("../../data/langid-profiles.tsv");
const HEADER: &str = "#corpuskit-ngram-profile";
const FORMAT_VERSION: u32 = 1;

/// Additive smoothing applied to every n-gram count.
const ALPHA: f64 = 0.5;

static EMBEDDED: Lazy<NgramModel> = Lazy::new(|| {
    NgramModel::from_reader(EMBEDDED_TSV.as_bytes()).expect("embedded profiles are well formed")
});

/// Multinomial naive Bayes over character 1- to 3-grams.
///
/// Profile file layout (UTF-8, tab separated, one record per line):
///
/// ```text
/// #corpuskit-ngram-profile<TAB>1
/// #any other comment line
/// @total<TAB>lang<TAB>n1<TAB>n2<TAB>n3
/// lang<TAB>ngram<TAB>count
/// ```
///
/// `@total` rows give the number of 1-, 2- and 3-gram tokens seen for a
/// language. In n-grams a `_` stands for a word boundary (space). Grams are
/// lowercase and built from text folded by [`fold_text`].
#[derive(Debug, Clone)]
pub struct NgramModel {
    labels: Vec<String>,
    index: HashMap<Box<str>, u32>,
    /// `index[g] * labels.len() + l` holds log P(g | l).
    log_probs: Vec<f32>,
}

impl NgramModel {
    /// The bundled 26-language model.
    pub fn embedded() -> &'static NgramModel {
        &EMBEDDED
    }

    pub fn load(path: &Path) -> Result<Self, LangIdError> {
        let file = std::fs::File::open(path)
            .map_err(|e| LangIdError::Model(format!("{}: {e}", path.display())))?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self, LangIdError> {
        let bad = |line: usize, msg: &str| LangIdError::Model(format!("line {line}: {msg}"));
        let mut labels: Vec<String> = Vec::new();
        let mut totals: HashMap<String, [u64; 3]> = HashMap::new();
        let mut counts: Vec<(String, String, u64)> = Vec::new();
        let mut saw_header = false;
        for (i, line) in reader.lines().enumerate() {
            let n = i + 1;
            let line = line.map_err(|e| LangIdError::Model(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix(HEADER) {
                let version: u32 = rest
                    .trim()
                    .parse()
                    .map_err(|_| bad(n, "unreadable format version"))?;
                if version != FORMAT_VERSION {
                    return Err(bad(n, &format!("unsupported format version {version}")));
                }
                saw_header = true;
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            if !saw_header {
                return Err(bad(n, "missing profile header"));
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols[0] == "@total" {
                if cols.len() != 5 {
                    return Err(bad(n, "@total needs lang and three counts"));
                }
                let mut t = [0u64; 3];
                for (k, c) in cols[2..].iter().enumerate() {
                    t[k] = c.parse().map_err(|_| bad(n, "bad total"))?;
                }
                if !labels.iter().any(|l| l == cols[1]) {
                    labels.push(cols[1].to_string());
                }
                totals.insert(cols[1].to_string(), t);
                continue;
            }
            if cols.len() != 3 {
                return Err(bad(n, "expected lang, ngram, count"));
            }
            let gram = cols[1].replace('_', " ");
            let len = gram.chars().count();
            if !(1..=3).contains(&len) {
                return Err(bad(n, "n-gram length must be 1 to 3"));
            }
            let count: u64 = cols[2].parse().map_err(|_| bad(n, "bad count"))?;
            counts.push((cols[0].to_string(), gram, count));
        }
        if labels.is_empty() {
            return Err(LangIdError::Model("no languages in profile".into()));
        }
        labels.sort();
        let lang_ix: HashMap<&str, usize> =
            labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();

        let mut index: HashMap<Box<str>, u32> = HashMap::new();
        let mut raw: Vec<(u32, usize, u64)> = Vec::with_capacity(counts.len());
        let mut vocab = [0u64; 3];
        for (lang, gram, count) in &counts {
            let l = *lang_ix
                .get(lang.as_str())
                .ok_or_else(|| LangIdError::Model(format!("no @total row for {lang}")))?;
            let next = index.len() as u32;
            let g = *index.entry(gram.as_str().into()).or_insert_with(|| {
                vocab[gram.chars().count() - 1] += 1;
                next
            });
            raw.push((g, l, *count));
        }
        let order_of: Vec<usize> = {
            let mut v = vec![0; index.len()];
            for (gram, &g) in &index {
                v[g as usize] = gram.chars().count() - 1;
            }
            v
        };
        let nl = labels.len();
        // Profiles list only grams above a per-language frequency cutoff, so
        // a gram missing from one is rare there, not impossible: it gets half
        // of that language's smallest listed count for the same order.
        let mut cutoff = vec![[u64::MAX; 3]; nl];
        for &(g, l, count) in &raw {
            let c = &mut cutoff[l][order_of[g as usize]];
            *c = (*c).min(count);
        }
        let mut log_probs = vec![0f32; index.len() * nl];
        for (g, slot) in log_probs.chunks_mut(nl).enumerate() {
            let order = order_of[g];
            for (l, p) in slot.iter_mut().enumerate() {
                let total = totals[&labels[l]][order] as f64;
                let unseen = match cutoff[l][order] {
                    u64::MAX => 0.0,
                    c => c as f64 / 2.0,
                };
                *p = ((unseen + ALPHA) / (total + ALPHA * vocab[order] as f64)).ln() as f32;
            }
        }
        for (g, l, count) in raw {
            let order = order_of[g as usize];
            let total = totals[&labels[l]][order] as f64;
            let p = (count as f64 + ALPHA) / (total + ALPHA * vocab[order] as f64);
            log_probs[g as usize * nl + l] = p.ln() as f32;
        }
        Ok(Self {
            labels,
            index,
            log_probs,
        })
    }

    pub fn vocabulary_size(&self) -> usize {
        self.index.len()
    }

    /// Posterior over labels from the known n-grams of `text`, or `None`
    /// when no n-gram of the text is in the model.
    pub fn posterior(&self, text: &str) -> Option<Vec<f64>> {
        let nl = self.labels.len();
        let mut acc = vec![0f64; nl];
        let mut seen = 0usize;
        for_each_ngram(&fold_text(text), |gram| {
            if let Some(&g) = self.index.get(gram) {
                let row = &self.log_probs[g as usize * nl..(g as usize + 1) * nl];
                for (a, &p) in acc.iter_mut().zip(row) {
                    *a += p as f64;
                }
                seen += 1;
            }
        });
        if seen == 0 {
            return None;
        }
        let max = acc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for a in acc.iter_mut() {
            *a = (*a - max).exp();
            z += *a;
        }
        for a in acc.iter_mut() {
            *a /= z;
        }
        Some(acc)
    }
}

impl Classifier for NgramModel {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn classify(&self, text: &str) -> Result<LangTag, LangIdError> {
        let Some(post) = self.posterior(text) else {
            return Ok(LangTag {
                lang: UNDETERMINED.to_string(),
                score: 0.0,
            });
        };
        let (best, score) = post
            .iter()
            .copied()
            .enumerate()
            // ties go to the alphabetically first label
            .fold((0, f64::MIN), |acc, (i, p)| if p > acc.1 { (i, p) } else { acc });
        Ok(LangTag {
            lang: self.labels[best].clone(),
            score,
        })
    }
}

/// Lowercases and maps every non-letter to a space, folding a few letters
/// the same way the profiles were built (Romanian comma-below letters,
/// Persian yeh, Turkish dotted capital I and Vietnamese precomposed vowels).
pub fn fold_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if !c.is_alphabetic() {
            out.push(' ');
            continue;
        }
        if c == 'İ' {
            out.push('i');
            continue;
        }
        for lc in c.to_lowercase() {
            let folded = match lc {
                'ș' => 'ş',
                'ț' => 'ţ',
                '\u{06cc}' => '\u{064a}',
                '\u{1ea0}'..='\u{1eff}' => '\u{1ec3}',
                other => other,
            };
            out.push(folded);
        }
    }
    out
}

/// Calls `f` for every 1-, 2- and 3-gram of each space-padded word.
/// N-grams never span two words and the bare space unigram is skipped.
pub fn for_each_ngram(folded: &str, mut f: impl FnMut(&str)) {
    let mut buf = String::with_capacity(16);
    let mut window: Vec<char> = Vec::with_capacity(32);
    for word in folded.split(' ').filter(|w| !w.is_empty()) {
        window.clear();
        window.push(' ');
        window.extend(word.chars());
        window.push(' ');
        for n in 1..=3 {
            if window.len() < n {
                break;
            }
            for w in window.windows(n) {
                if n == 1 && w[0] == ' ' {
                    continue;
                }
                buf.clear();
                buf.extend(w);
                f(&buf);
            }
        }
    }
}
