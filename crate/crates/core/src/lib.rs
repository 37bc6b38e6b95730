//! Building blocks for collecting, cleaning, anonymizing and characterizing
//! corpora of social-platform posts with nested comment trees.
//!
//! The crate is organized by pipeline stage:
//!
//! - [`model`]: the post/comment record types and the line-delimited JSON
//!   interchange format.
//! - [`normalize`]: field normalization, spam/blocklist/length screening and
//!   template hashing.
//! - [`pii`]: recognizer registry, overlap resolution and masking.
//! - [`langid`]: pluggable language identification with an embedded
//!   character n-gram model.
//! - [`analytics`]: lexical, comment-tree, authorship, URL and community
//!   statistics.

pub mod analytics;
pub mod langid;
pub mod model;
pub mod normalize;
pub mod pii;

pub use model::{CommentNode, Corpus, PostRecord};
