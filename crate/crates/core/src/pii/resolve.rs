use std::collections::BTreeMap;

use super::EntitySpan;

/// Picks a non-overlapping subset of `spans`.
///
/// Candidates are considered longest first, then by higher priority, then by
/// earlier start; each is kept unless it overlaps one already kept. The result
/// is sorted by start offset.
pub fn resolve_overlaps(mut spans: Vec<EntitySpan>) -> Vec<EntitySpan> {
    spans.retain(|s| s.start < s.end);
    spans.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(b.priority.cmp(&a.priority))
            .then(a.start.cmp(&b.start))
            .then(a.end.cmp(&b.end))
    });
    // start -> end of accepted spans; they never overlap, so neighbours suffice
    let mut taken: BTreeMap<usize, usize> = BTreeMap::new();
    let mut kept = Vec::with_capacity(spans.len());
    for span in spans {
        let clashes_before = taken
            .range(..=span.start)
            .next_back()
            .is_some_and(|(_, &end)| end > span.start);
        let clashes_after = taken
            .range(span.start..)
            .next()
            .is_some_and(|(&start, _)| start < span.end);
        if clashes_before || clashes_after {
            continue;
        }
        taken.insert(span.start, span.end);
        kept.push(span);
    }
    kept.sort_by_key(|s| (s.start, s.end));
    kept
}

/// Replaces each span with its typed placeholder. `spans` must be sorted and
/// non-overlapping, with code-point offsets into `text`.
pub fn mask(text: &str, spans: &[EntitySpan]) -> String {
    if spans.is_empty() {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    let mut chars = text.char_indices().enumerate().peekable();
    let mut byte_of = |cp: usize| -> usize {
        while let Some(&(i, (b, _))) = chars.peek() {
            if i == cp {
                return b;
            }
            chars.next();
        }
        text.len()
    };
    let mut last = 0;
    for span in spans {
        let start = byte_of(span.start);
        let end = byte_of(span.end);
        debug_assert!(start >= last, "spans must be sorted and disjoint");
        out.push_str(&text[last..start]);
        out.push_str(&span.entity_type.placeholder());
        last = end;
    }
    out.push_str(&text[last..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pii::EntityType;
    use proptest::prelude::*;

    fn span(t: EntityType, start: usize, end: usize, priority: i32) -> EntitySpan {
        EntitySpan {
            entity_type: t,
            start,
            end,
            matched_text: String::new(),
            recognizer_id: String::new(),
            confidence: 1.0,
            priority,
        }
    }

    #[test]
    fn longer_span_wins() {
        let out = resolve_overlaps(vec![
            span(EntityType::Crypto, 10, 20, 17),
            span(EntityType::SeedPhrase, 0, 80, 28),
        ]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].entity_type, EntityType::SeedPhrase);
    }

    #[test]
    fn priority_breaks_length_ties() {
        let out = resolve_overlaps(vec![
            span(EntityType::PhoneNumber, 5, 15, 12),
            span(EntityType::Password, 7, 17, 29),
        ]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].entity_type, EntityType::Password);
    }

    #[test]
    fn earlier_start_breaks_remaining_ties() {
        let out = resolve_overlaps(vec![
            span(EntityType::Crypto, 3, 8, 5),
            span(EntityType::Crypto, 1, 6, 5),
        ]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].start, 1);
    }

    #[test]
    fn disjoint_spans_unchanged() {
        let input = vec![
            span(EntityType::EmailAddress, 0, 4, 20),
            span(EntityType::Crypto, 4, 9, 17),
            span(EntityType::UsSsn, 12, 23, 14),
        ];
        assert_eq!(resolve_overlaps(input.clone()), input);
    }

    #[test]
    fn masks_examples() {
        let t = "mail a@b.co now";
        assert_eq!(
            mask(t, &[span(EntityType::EmailAddress, 5, 11, 0)]),
            "mail <PII:EMAIL_ADDRESS> now"
        );
        assert_eq!(mask(t, &[]), t);
        let adj = mask(
            "abcdef",
            &[
                span(EntityType::Crypto, 0, 3, 0),
                span(EntityType::UsSsn, 3, 6, 0),
            ],
        );
        assert_eq!(adj, "<PII:CRYPTO><PII:US_SSN>");
    }

    #[test]
    fn masks_by_code_point() {
        let t = "héllo ☃ x@y.io ü";
        let out = mask(t, &[span(EntityType::EmailAddress, 8, 14, 0)]);
        assert_eq!(out, "héllo ☃ <PII:EMAIL_ADDRESS> ü");
    }

    proptest! {
        #[test]
        fn resolved_spans_are_disjoint_and_sorted(
            raw in proptest::collection::vec((0usize..60, 1usize..15, 0i32..5), 0..30)
        ) {
            let spans: Vec<_> = raw
                .into_iter()
                .map(|(s, l, p)| span(EntityType::Crypto, s, s + l, p))
                .collect();
            let out = resolve_overlaps(spans.clone());
            for w in out.windows(2) {
                prop_assert!(w[0].end <= w[1].start);
            }
            // every dropped candidate clashes with some kept span
            for s in &spans {
                if !out.contains(s) {
                    prop_assert!(out.iter().any(|k| k.overlaps(s)));
                }
            }
        }
    }
}
