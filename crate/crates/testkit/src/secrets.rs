//! Generators for well-formed secrets and identifiers.
//!
//! Checksums here are computed independently of the detector's validators
//! so planted values double as an oracle for them.

use std::sync::OnceLock;

use corpuskit_core::pii::EntityType;
use rand::seq::SliceRandom;
use rand::Rng;

const BIP39_TXT: &str = include_str!("../../core/data/bip39-english.txt");

pub fn bip39_words() -> &'static [&'static str] {
    static WORDS: OnceLock<Vec<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| BIP39_TXT.lines().map(str::trim).filter(|w| !w.is_empty()).collect())
}

/// Mod-10 check digit for a digit string.
pub fn luhn_check_digit(payload: &str) -> u32 {
    let sum: u32 = payload
        .bytes()
        .rev()
        .enumerate()
        .map(|(i, b)| {
            let d = (b - b'0') as u32;
            if i % 2 == 0 {
                let x = d * 2;
                if x > 9 { x - 9 } else { x }
            } else {
                d
            }
        })
        .sum();
    (10 - sum % 10) % 10
}

/// Remainder of the digit-expanded, rearranged IBAN modulo 97.
pub fn iban_remainder(iban: &str) -> u32 {
    let rearranged = format!("{}{}", &iban[4..], &iban[..4]);
    rearranged.chars().fold(0u32, |acc, c| {
        let v = c.to_digit(36).expect("alphanumeric");
        if v < 10 {
            (acc * 10 + v) % 97
        } else {
            (acc * 100 + v) % 97
        }
    })
}

fn digits<R: Rng>(rng: &mut R, n: usize) -> String {
    (0..n).map(|_| char::from(b'0' + rng.gen_range(0..10))).collect()
}

fn upper<R: Rng>(rng: &mut R, n: usize) -> String {
    (0..n).map(|_| char::from(b'A' + rng.gen_range(0..26))).collect()
}

fn from_charset<R: Rng>(rng: &mut R, charset: &[u8], n: usize) -> String {
    (0..n).map(|_| char::from(*charset.choose(rng).unwrap())).collect()
}

fn group(s: &str, sizes: &[usize], sep: char) -> String {
    let mut out = String::new();
    let mut at = 0;
    for &n in sizes {
        if !out.is_empty() {
            out.push(sep);
        }
        out.push_str(&s[at..at + n]);
        at += n;
    }
    out
}

pub fn api_key<R: Rng>(rng: &mut R) -> String {
    const KEY: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_-";
    let n = rng.gen_range(20..=100);
    format!("sk-{}", from_charset(rng, KEY, n))
}

pub fn password<R: Rng>(rng: &mut R) -> String {
    const PW: &[u8] = b"ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz23456789!@#$%^&*";
    let n = rng.gen_range(8..=16);
    // letters and digits guarantee it is not a dictionary word
    format!("{}{}{}", from_charset(rng, b"abcdefghkmnpqrstuvwxyz", 1), rng.gen_range(2..10), from_charset(rng, PW, n - 2))
}

pub fn seed_phrase<R: Rng>(rng: &mut R) -> String {
    let n = *[12usize, 15, 18, 21, 24].choose(rng).unwrap();
    let words = bip39_words();
    (0..n).map(|_| *words.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

pub fn email<R: Rng>(rng: &mut R) -> String {
    const LOCAL: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";
    const TLDS: &[&str] = &["com", "org", "net", "io", "dev", "co.uk", "de"];
    let local = match rng.gen_range(0..3) {
        0 => {
            let n = rng.gen_range(3..12);
            from_charset(rng, LOCAL, n)
        }
        1 => format!("{}.{}", from_charset(rng, LOCAL, 4), from_charset(rng, LOCAL, 6)),
        _ => format!("{}+tag{}", from_charset(rng, LOCAL, 5), rng.gen_range(0..100)),
    };
    let n = rng.gen_range(3..10);
    let domain = from_charset(rng, b"abcdefghijklmnopqrstuvwxyz", n);
    format!("{local}@{domain}.{}", TLDS.choose(rng).unwrap())
}

pub fn credit_card<R: Rng>(rng: &mut R) -> String {
    let (prefix, len): (String, usize) = match rng.gen_range(0..4) {
        0 => ("4".into(), 16),
        1 => (format!("5{}", rng.gen_range(1..=5)), 16),
        2 => (if rng.gen() { "34" } else { "37" }.into(), 15),
        _ => ("6011".into(), 16),
    };
    let payload = format!("{prefix}{}", digits(rng, len - prefix.len() - 1));
    let number = format!("{payload}{}", luhn_check_digit(&payload));
    match (len, rng.gen_range(0..3)) {
        (_, 0) => number,
        (15, k) => group(&number, &[4, 6, 5], if k == 1 { ' ' } else { '-' }),
        (_, k) => group(&number, &[4, 4, 4, 4], if k == 1 { ' ' } else { '-' }),
    }
}

pub fn iban<R: Rng>(rng: &mut R) -> String {
    let (country, bban) = match rng.gen_range(0..5) {
        0 => ("DE", digits(rng, 18)),
        1 => ("GB", format!("{}{}", upper(rng, 4), digits(rng, 14))),
        2 => ("FR", digits(rng, 23)),
        3 => ("NL", format!("{}{}", upper(rng, 4), digits(rng, 10))),
        _ => ("ES", digits(rng, 20)),
    };
    let check = 98 - iban_remainder(&format!("{country}00{bban}"));
    let compact = format!("{country}{check:02}{bban}");
    if rng.gen() {
        compact
    } else {
        let sizes: Vec<usize> = (0..compact.len())
            .step_by(4)
            .map(|i| (compact.len() - i).min(4))
            .collect();
        group(&compact, &sizes, ' ')
    }
}

pub fn phone<R: Rng>(rng: &mut R) -> String {
    let area = format!("{}{}", rng.gen_range(2..10), digits(rng, 2));
    let exchange = format!("{}{}", rng.gen_range(2..10), digits(rng, 2));
    let line = digits(rng, 4);
    match rng.gen_range(0..3) {
        0 => format!("({area}) {exchange}-{line}"),
        1 => format!("{area}-{exchange}-{line}"),
        _ => format!("+44 20 {} {}", digits(rng, 4), digits(rng, 4)),
    }
}

pub fn ssn<R: Rng>(rng: &mut R) -> String {
    let area = loop {
        let a = rng.gen_range(1..900);
        if a != 666 {
            break a;
        }
    };
    format!("{area:03}-{:02}-{:04}", rng.gen_range(1..100), rng.gen_range(1..10000))
}

pub fn itin<R: Rng>(rng: &mut R) -> String {
    let group = *[50, 57, 65, 70, 78, 88, 90, 92, 94, 99].choose(rng).unwrap();
    format!("9{:02}-{group}-{:04}", rng.gen_range(0..100), rng.gen_range(0..10000))
}

/// Checksummed addresses published as examples in the respective standards,
/// plus random Ethereum-style hex addresses.
pub fn crypto<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..4) {
        0 => "1A1zP1eP5QGefi2DMPTfTL5SLmv7DivfNa".into(),
        1 => "bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t4".into(),
        _ => format!("0x{}", from_charset(rng, b"0123456789abcdefABCDEF", 40)),
    }
}

/// A fresh value of the given type.
pub fn generate<R: Rng>(kind: EntityType, rng: &mut R) -> String {
    match kind {
        EntityType::ApiKey => api_key(rng),
        EntityType::Password => password(rng),
        EntityType::SeedPhrase => seed_phrase(rng),
        EntityType::EmailAddress => email(rng),
        EntityType::CreditCard => credit_card(rng),
        EntityType::IbanCode => iban(rng),
        EntityType::PhoneNumber => phone(rng),
        EntityType::UsSsn => ssn(rng),
        EntityType::UsItin => itin(rng),
        EntityType::Crypto => crypto(rng),
    }
}

/// Words placed right before and after a planted value. They keep the value
/// separated from surrounding prose; the password cue is part of the format.
pub fn carrier(kind: EntityType) -> (&'static str, &'static str) {
    match kind {
        EntityType::ApiKey => ("token", "ok"),
        EntityType::Password => ("password:", "ok"),
        EntityType::SeedPhrase => ("mnemonic:", "//"),
        EntityType::EmailAddress => ("mail", "thanks"),
        EntityType::CreditCard => ("card", "thanks"),
        EntityType::IbanCode => ("iban", "thanks"),
        EntityType::PhoneNumber => ("call", "thanks"),
        EntityType::UsSsn => ("ssn", "thanks"),
        EntityType::UsItin => ("itin", "thanks"),
        EntityType::Crypto => ("wallet", "thanks"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn textbook_checksums() {
        assert_eq!(luhn_check_digit("7992739871"), 3);
        assert_eq!(luhn_check_digit("411111111111111"), 1);
        assert_eq!(iban_remainder("GB82WEST12345698765432"), 1);
        assert_eq!(iban_remainder("DE89370400440532013000"), 1);
        assert_eq!(bip39_words().len(), 2048);
    }

    #[test]
    fn generated_values_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let cc: String = credit_card(&mut rng).chars().filter(char::is_ascii_digit).collect();
            let (payload, check) = cc.split_at(cc.len() - 1);
            assert_eq!(luhn_check_digit(payload).to_string(), check);
            let iban: String = iban(&mut rng).replace(' ', "");
            assert_eq!(iban_remainder(&iban), 1, "{iban}");
            let key = api_key(&mut rng);
            assert!((23..=103).contains(&key.len()));
        }
    }
}
