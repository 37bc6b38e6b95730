//! Text fields with secrets planted at recorded offsets.

use corpuskit_core::pii::EntityType;
use rand::Rng;

use crate::{prose, secrets};

/// One planted value. Offsets are code points, half-open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plant {
    pub kind: EntityType,
    pub start: usize,
    pub end: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PlantedField {
    pub text: String,
    pub plants: Vec<Plant>,
}

/// Incrementally builds a field while tracking code point offsets.
#[derive(Debug, Default)]
pub struct FieldBuilder {
    field: PlantedField,
    chars: usize,
}

impl FieldBuilder {
    pub fn push_text(&mut self, s: &str) -> &mut Self {
        if s.is_empty() {
            return self;
        }
        if !self.field.text.is_empty() {
            self.field.text.push(' ');
            self.chars += 1;
        }
        self.field.text.push_str(s);
        self.chars += s.chars().count();
        self
    }

    /// Appends `value` inside its carrier words and records its span.
    pub fn push_plant(&mut self, kind: EntityType, value: &str) -> &mut Self {
        let (before, after) = secrets::carrier(kind);
        self.push_text(before);
        self.push_text(value);
        let end = self.chars;
        self.field.plants.push(Plant {
            kind,
            start: end - value.chars().count(),
            end,
            value: value.to_string(),
        });
        self.push_text(after)
    }

    pub fn finish(self) -> PlantedField {
        self.field
    }
}

/// `n_fields` prose fields carrying `per_type` plants of each kind, spread
/// over random fields (a field may carry several).
pub fn planted_fields<R: Rng>(
    rng: &mut R,
    n_fields: usize,
    kinds: &[EntityType],
    per_type: usize,
) -> Vec<PlantedField> {
    let mut assigned: Vec<Vec<EntityType>> = vec![Vec::new(); n_fields];
    for &kind in kinds {
        for _ in 0..per_type {
            assigned[rng.gen_range(0..n_fields)].push(kind);
        }
    }
    assigned
        .into_iter()
        .map(|kinds| {
            let mut b = FieldBuilder::default();
            b.push_text(&prose::window(rng, 3, 25));
            for kind in kinds {
                let value = secrets::generate(kind, rng);
                b.push_plant(kind, &value);
                b.push_text(&prose::window(rng, 2, 12));
            }
            b.finish()
        })
        .collect()
}
