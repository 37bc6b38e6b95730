use std::fs;
use std::path::{Path, PathBuf};

use regex::{Regex, RegexBuilder};

use super::normalize_text;

#[derive(Debug, thiserror::Error)]
pub enum BlocklistError {
    #[error("reading blocklist {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("blocklist too large to compile: {0}")]
    Compile(#[from] regex::Error),
}

/// Case-insensitive phrase list matched on word boundaries.
///
/// File format: one phrase per line, `#` starts a comment line, blank lines
/// are ignored. Phrases are normalized like field text, and a space inside a
/// phrase matches any whitespace run.
#[derive(Debug, Clone, Default)]
pub struct Blocklist {
    phrases: Vec<String>,
    matcher: Option<Regex>,
}

impl Blocklist {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_phrases<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::try_from_phrases(phrases).expect("escaped phrases always compile")
    }

    pub fn try_from_phrases<I, S>(phrases: I) -> Result<Self, BlocklistError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut list: Vec<String> = phrases
            .into_iter()
            .map(|p| normalize_text(p.as_ref()))
            .filter(|p| !p.is_empty())
            .collect();
        list.sort();
        list.dedup();
        if list.is_empty() {
            return Ok(Self::default());
        }
        let alternatives: Vec<String> = list
            .iter()
            .map(|p| {
                p.split(' ')
                    .map(regex::escape)
                    .collect::<Vec<_>>()
                    .join(r"\s+")
            })
            .collect();
        let pattern = format!(r"(?:^|[^\w])({})(?:[^\w]|$)", alternatives.join("|"));
        let matcher = RegexBuilder::new(&pattern)
            .case_insensitive(true)
            .size_limit(64 << 20)
            .build()?;
        Ok(Self {
            phrases: list,
            matcher: Some(matcher),
        })
    }

    pub fn parse(contents: &str) -> Result<Self, BlocklistError> {
        Self::try_from_phrases(
            contents
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(path: &Path) -> Result<Self, BlocklistError> {
        let contents = fs::read_to_string(path).map_err(|source| BlocklistError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&contents)
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn is_match(&self, text: &str) -> bool {
        self.matcher.as_ref().is_some_and(|m| m.is_match(text))
    }

    /// The first matching phrase as it appears in the text.
    pub fn first_match<'t>(&self, text: &'t str) -> Option<&'t str> {
        let caps = self.matcher.as_ref()?.captures(text)?;
        caps.get(1).map(|m| m.as_str())
    }
}

/// True iff any phrase occurs case-insensitively on word boundaries.
pub fn apply_blocklist(text: &str, blocklist: &Blocklist) -> bool {
    blocklist.is_match(text)
}
