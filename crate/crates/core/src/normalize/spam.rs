use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpamParams {
    pub max_consecutive_token_repeats: usize,
    pub ngram_len: usize,
    pub max_consecutive_ngram_repeats: usize,
}

impl Default for SpamParams {
    fn default() -> Self {
        Self {
            max_consecutive_token_repeats: 10,
            ngram_len: 3,
            max_consecutive_ngram_repeats: 5,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("spam parameter `{name}` must be at least 2 (got {value})")]
pub struct SpamParamsError {
    pub name: &'static str,
    pub value: usize,
}

impl SpamParams {
    pub fn validate(&self) -> Result<(), SpamParamsError> {
        for (name, value) in [
            ("max_consecutive_token_repeats", self.max_consecutive_token_repeats),
            ("ngram_len", self.ngram_len),
            ("max_consecutive_ngram_repeats", self.max_consecutive_ngram_repeats),
        ] {
            if value < 2 {
                return Err(SpamParamsError { name, value });
            }
        }
        Ok(())
    }
}

/// True iff some whitespace token repeats back-to-back at least
/// `max_consecutive_token_repeats` times, or some `ngram_len`-gram does at
/// least `max_consecutive_ngram_repeats` times.
pub fn detect_spam(text: &str, params: &SpamParams) -> bool {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    max_copies(&tokens, 1, params.max_consecutive_token_repeats)
        >= params.max_consecutive_token_repeats
        || max_copies(&tokens, params.ngram_len, params.max_consecutive_ngram_repeats)
            >= params.max_consecutive_ngram_repeats
}

/// Longest run of back-to-back copies of any `period`-token block, stopping
/// early once `enough` is reached.
///
/// A stretch where `tokens[i] == tokens[i + period]` holds for `r`
/// consecutive `i` is periodic over `r + period` tokens and so holds
/// `(r + period) / period` aligned copies.
fn max_copies(tokens: &[&str], period: usize, enough: usize) -> usize {
    if period == 0 || tokens.len() < period {
        return 0;
    }
    let mut best = 1;
    let mut run = 0;
    for i in 0..tokens.len() - period {
        if tokens[i] == tokens[i + period] {
            run += 1;
            best = best.max((run + period) / period);
            if best >= enough {
                return best;
            }
        } else {
            run = 0;
        }
    }
    best
}
