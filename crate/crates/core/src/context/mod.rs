//! Context features, categorical encoding, and the frozen state the
//! production scorer carries from training.

mod features;
mod schema;
mod state;

use alloc::string::String;
use thiserror::Error;

pub use features::{context_features, encode_frozen, observe_categories, RawFeatures, RawValue};
pub use schema::{
    categorical_variables, FeatureSchema, FeatureVector, Slot, SlotKind, Source, BASE_SLOTS,
    PLACEHOLDER, TAG_SLOT_PREFIX,
};
pub use state::{CategoricalDict, StateStore, StoreParts};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("unknown categorical variable {0:?}")]
    UnknownVariable(String),
    #[error("state store is frozen")]
    Frozen,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("corrupt table: {0}")]
    CorruptTable(String),
    #[error("training stream is empty")]
    EmptyStream,
}
