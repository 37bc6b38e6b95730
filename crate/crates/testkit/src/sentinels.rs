//! Screening fixture: fields that trip spam, blocklist and length checks,
//! alone and in combination.

use corpuskit_core::normalize::{SENTINEL_BLOCKLIST, SENTINEL_SPAM, SENTINEL_TOO_LONG};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::prose;

pub const BLOCKLIST: &[&str] = &["forbidden phrase", "zzbannedterm", "not allowed here"];

/// Default token ceiling the fixture is built around.
pub const LIMIT_TOKENS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flags {
    None,
    Spam,
    Blocklist,
    TooLong,
    SpamBlocklist,
    SpamTooLong,
    BlocklistTooLong,
}

impl Flags {
    /// Sentinel expected under the spam, blocklist, too-long order.
    pub fn expected(self) -> Option<&'static str> {
        match self {
            Flags::None => None,
            Flags::Spam | Flags::SpamBlocklist | Flags::SpamTooLong => Some(SENTINEL_SPAM),
            Flags::Blocklist | Flags::BlocklistTooLong => Some(SENTINEL_BLOCKLIST),
            Flags::TooLong => Some(SENTINEL_TOO_LONG),
        }
    }

    pub fn is_multi(self) -> bool {
        matches!(self, Flags::SpamBlocklist | Flags::SpamTooLong | Flags::BlocklistTooLong)
    }
}

#[derive(Debug, Clone)]
pub struct SentinelFixture {
    pub fields: Vec<String>,
    pub flags: Vec<Flags>,
}

fn spam_run<R: Rng>(rng: &mut R) -> String {
    if rng.gen() {
        vec!["free"; 12].join(" ")
    } else {
        vec!["click this link"; 6].join(" ")
    }
}

fn long_text(extra: &str) -> String {
    let mut s = String::with_capacity(LIMIT_TOKENS * 8);
    for i in 0..=LIMIT_TOKENS {
        if i > 0 {
            s.push(' ');
        }
        s.push('w');
        s.push_str(&i.to_string());
        if i == LIMIT_TOKENS / 2 && !extra.is_empty() {
            s.push(' ');
            s.push_str(extra);
        }
    }
    s
}

pub(crate) fn build<R: Rng>(rng: &mut R, flags: Flags) -> String {
    let around = |rng: &mut R, mid: &str| {
        format!("{} {mid} {}", prose::window(rng, 3, 20), prose::window(rng, 3, 20))
    };
    let phrase = *BLOCKLIST.choose(rng).unwrap();
    match flags {
        Flags::None => prose::window(rng, 5, 60),
        Flags::Spam => {
            let run = spam_run(rng);
            around(rng, &run)
        }
        Flags::Blocklist => around(rng, phrase),
        Flags::TooLong => long_text(""),
        Flags::SpamBlocklist => {
            let run = spam_run(rng);
            around(rng, &format!("{run} {phrase}"))
        }
        Flags::SpamTooLong => long_text(&spam_run(rng)),
        Flags::BlocklistTooLong => long_text(phrase),
    }
}

/// 1,000 fields: 20 end up as spam, 10 as blocklisted and 1 as too long.
/// Five of those carry more than one flag (3 spam+blocklist, 1 spam+too
/// long, 1 blocklist+too long).
pub fn sentinel_fixture<R: Rng>(rng: &mut R) -> SentinelFixture {
    let mut flags = Vec::with_capacity(1000);
    flags.extend([Flags::Spam; 16]);
    flags.extend([Flags::SpamBlocklist; 3]);
    flags.push(Flags::SpamTooLong);
    flags.extend([Flags::Blocklist; 9]);
    flags.push(Flags::BlocklistTooLong);
    flags.push(Flags::TooLong);
    flags.resize(1000, Flags::None);
    flags.shuffle(rng);
    let fields = flags.iter().map(|&f| build(rng, f)).collect();
    SentinelFixture { fields, flags }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn composition() {
        let fx = sentinel_fixture(&mut ChaCha8Rng::seed_from_u64(1));
        let count = |s| fx.flags.iter().filter(|f| f.expected() == Some(s)).count();
        assert_eq!(count(SENTINEL_SPAM), 20);
        assert_eq!(count(SENTINEL_BLOCKLIST), 10);
        assert_eq!(count(SENTINEL_TOO_LONG), 1);
        assert_eq!(fx.flags.iter().filter(|f| f.is_multi()).count(), 5);
    }
}
