//! Core of a streaming vandalism scorer for Wikidata-style revisions.
//!
//! Everything here is pure computation over in-memory values and builds
//! without `std`: comment decomposition, content and context features,
//! categorical encoding, a second-order gradient boosted tree learner,
//! session score smoothing and ranking metrics. Reading dumps, persisting
//! state and talking to the network live in the `vandalscore` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod comment;
pub mod content;
pub mod context;
pub mod engine;
pub mod gbm;
pub mod metrics;
pub mod revision;
pub mod sil;
pub mod split;

pub use comment::{parse_comment, ParsedComment, PrevUser};
pub use context::{FeatureSchema, FeatureVector, SlotKind, StateStore, PLACEHOLDER};
pub use engine::{Resources, ScoringEngine, SessionScorer};
pub use gbm::{GbmParams, TreeEnsemble};
pub use revision::{Contributor, Geo, RawRevision, RevisionMetadata, TruthLabel};
pub use sil::SilPostprocessor;
