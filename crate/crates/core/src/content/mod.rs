//! Features computed from the text of the comment tail.

pub mod chars;
pub mod fuzzy;
pub mod langid;
pub mod sentence;
pub mod words;

pub use chars::{char_features, CharFeatures};
pub use fuzzy::{fuzzy_partial_ratio, fuzzy_ratio};
pub use langid::{LangIdError, LanguageModel};
pub use sentence::{sentence_features, EntityDoc, SentenceFeatures};
pub use words::{word_features, Lexicon, WordFeatures};
