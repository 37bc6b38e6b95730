//! BIP39 wordlist membership.

use std::collections::HashSet;
use std::path::Path;

use once_cell::sync::Lazy;

const ENGLISH_TXT: &str = include_str!("../../data/bip39-english.txt");

static ENGLISH: Lazy<Wordlist> =
    Lazy::new(|| Wordlist::parse(ENGLISH_TXT).expect("embedded wordlist is valid"));

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wordlist {
    words: HashSet<String>,
}

impl Wordlist {
    /// The embedded 2048-word English list.
    pub fn english() -> &'static Wordlist {
        &ENGLISH
    }

    /// One word per line; blank lines ignored. Words are lowercased.
    pub fn parse(contents: &str) -> Result<Self, String> {
        let words: HashSet<String> = contents
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        if words.is_empty() {
            return Err("wordlist is empty".into());
        }
        Ok(Self { words })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let contents =
            std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::parse(&contents)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Case-insensitive membership of an already punctuation-stripped word.
    pub fn contains(&self, word: &str) -> bool {
        if word.is_ascii() && word.len() <= 16 {
            let mut buf = [0u8; 16];
            let lower = &mut buf[..word.len()];
            lower.copy_from_slice(word.as_bytes());
            lower.make_ascii_lowercase();
            let lower = std::str::from_utf8(lower).expect("ascii");
            return self.words.contains(lower);
        }
        self.words.contains(&word.to_lowercase())
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }
}
