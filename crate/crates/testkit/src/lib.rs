//! Deterministic generators for tests and benchmarks: prose control text,
//! well-formed secrets, fields with planted secrets at known offsets,
//! random comment trees, screening fixtures and an end-to-end fixture with
//! recorded ground truth.

pub mod fixture;
pub mod planted;
pub mod prose;
pub mod records;
pub mod secrets;
pub mod sentinels;

pub use fixture::{pipeline_fixture, FixtureTruth, PipelineFixture};
pub use planted::{planted_fields, FieldBuilder, Plant, PlantedField};
pub use records::{chain_record, random_record, RecordShape};
pub use sentinels::{sentinel_fixture, Flags, SentinelFixture};
