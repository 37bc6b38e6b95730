//! Control text drawn from public-domain English prose.

use std::sync::OnceLock;

use rand::Rng;

const PROSE_TXT: &str = include_str!("../data/prose.txt");

fn words() -> &'static [&'static str] {
    static WORDS: OnceLock<Vec<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| paragraphs().flat_map(str::split_whitespace).collect())
}

/// The embedded paragraphs, one per non-comment line.
pub fn paragraphs() -> impl Iterator<Item = &'static str> {
    PROSE_TXT
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// A contiguous run of `min..=max` words starting at a random word.
pub fn window<R: Rng>(rng: &mut R, min: usize, max: usize) -> String {
    let all = words();
    let n = rng.gen_range(min..=max).min(all.len());
    let start = rng.gen_range(0..=all.len() - n);
    all[start..start + n].join(" ")
}

/// `n` control fields of 8 to 60 words.
pub fn fields<R: Rng>(rng: &mut R, n: usize) -> Vec<String> {
    (0..n).map(|_| window(rng, 8, 60)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn windows_are_deterministic_and_bounded() {
        assert!(paragraphs().count() >= 30);
        let a = fields(&mut ChaCha8Rng::seed_from_u64(1), 50);
        let b = fields(&mut ChaCha8Rng::seed_from_u64(1), 50);
        assert_eq!(a, b);
        for f in &a {
            let n = f.split_whitespace().count();
            assert!((8..=60).contains(&n));
        }
    }
}
