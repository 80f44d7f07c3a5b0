//! Word lists and language samples bundled into the binary.

use std::fs;
use std::path::Path;

use vandalscore_core::comment::CommentConfig;
use vandalscore_core::content::{LanguageModel, Lexicon};
use vandalscore_core::Resources;

pub const BAD_WORDS: &str = include_str!("../data/badwords.txt");
pub const LANGUAGE_NAMES: &str = include_str!("../data/language_names.txt");
pub const LANGUAGE_SAMPLES: &str = include_str!("../data/langsamples.tsv");

/// Non-empty lines that are not `#` comments.
pub fn entries(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// `(language, text)` pairs from a `code<TAB>text` sample file.
pub fn samples(text: &str) -> Vec<(&str, &str)> {
    entries(text).filter_map(|l| l.split_once('\t')).collect()
}

pub fn bundled() -> Resources {
    Resources {
        lexicon: Lexicon::new(entries(BAD_WORDS), entries(LANGUAGE_NAMES)),
        language_model: LanguageModel::train(samples(LANGUAGE_SAMPLES))
            .expect("bundled samples cover several languages"),
        comment_config: CommentConfig::default(),
    }
}

/// Names listed one per line in `path`, or nothing when no path is given.
pub fn read_name_list(path: Option<&Path>) -> std::io::Result<Vec<String>> {
    match path {
        Some(p) => Ok(entries(&fs::read_to_string(p)?).map(String::from).collect()),
        None => Ok(Vec::new()),
    }
}
