use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

/// Word lists consulted by [`word_features`]. Entries are stored lowercase
/// and matched against whole words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    bad_words: BTreeSet<String>,
    language_names: BTreeSet<String>,
}

impl Lexicon {
    pub fn new<B, L, S, T>(bad_words: B, language_names: L) -> Self
    where
        B: IntoIterator<Item = S>,
        L: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        Lexicon {
            bad_words: bad_words
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
            language_names: language_names
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
        }
    }

    pub fn is_bad_word(&self, lowercase_word: &str) -> bool {
        self.bad_words.contains(lowercase_word)
    }

    pub fn is_language_name(&self, lowercase_word: &str) -> bool {
        self.language_names.contains(lowercase_word)
    }

    pub fn bad_word_count(&self) -> usize {
        self.bad_words.len()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WordFeatures {
    pub lower_case_word_ratio: Option<f64>,
    pub upper_case_word_ratio: Option<f64>,
    pub bad_word_ratio: Option<f64>,
    pub language_word_ratio: Option<f64>,
    pub longest_word: u64,
    pub contains_language_word: bool,
    pub contains_url: bool,
}

fn is_url_token(token: &str) -> bool {
    let lower = token
        .trim_start_matches(|c: char| !c.is_alphanumeric())
        .to_ascii_lowercase();
    lower.contains("http://") || lower.contains("https://") || lower.starts_with("www.")
}

/// Maximal runs of alphabetic characters, after dropping URL tokens.
pub fn tokenize_words(tail: &str) -> (Vec<&str>, bool) {
    let mut words = Vec::new();
    let mut contains_url = false;
    for token in tail.split_whitespace() {
        if is_url_token(token) {
            contains_url = true;
            continue;
        }
        words.extend(
            token
                .split(|c: char| !c.is_alphabetic())
                .filter(|w| !w.is_empty()),
        );
    }
    (words, contains_url)
}

pub fn word_features(tail: &str, lexicon: &Lexicon) -> WordFeatures {
    let (words, contains_url) = tokenize_words(tail);
    if words.is_empty() {
        return WordFeatures {
            contains_url,
            ..Default::default()
        };
    }

    let mut lower = 0u64;
    let mut upper = 0u64;
    let mut bad = 0u64;
    let mut language = 0u64;
    let mut longest = 0u64;
    for w in &words {
        let first = w.chars().next().expect("tokens are non-empty");
        lower += first.is_lowercase() as u64;
        upper += first.is_uppercase() as u64;
        let folded = w.to_lowercase();
        bad += lexicon.is_bad_word(&folded) as u64;
        language += lexicon.is_language_name(&folded) as u64;
        longest = longest.max(w.chars().count() as u64);
    }
    let n = words.len() as f64;
    WordFeatures {
        lower_case_word_ratio: Some(lower as f64 / n),
        upper_case_word_ratio: Some(upper as f64 / n),
        bad_word_ratio: Some(bad as f64 / n),
        language_word_ratio: Some(language as f64 / n),
        longest_word: longest,
        contains_language_word: language > 0,
        contains_url,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lexicon() -> Lexicon {
        Lexicon::new(["damn"], ["english", "Deutsch"])
    }

    #[test]
    fn counts_word_classes() {
        let f = word_features("Hello damn world", &lexicon());
        assert_eq!(f.bad_word_ratio, Some(1.0 / 3.0));
        assert_eq!(f.upper_case_word_ratio, Some(1.0 / 3.0));
        assert_eq!(f.lower_case_word_ratio, Some(2.0 / 3.0));
        assert_eq!(f.longest_word, 5);
        assert!(!f.contains_url);
    }

    #[test]
    fn bad_words_ignore_case() {
        let f = word_features("DAMN", &lexicon());
        assert_eq!(f.bad_word_ratio, Some(1.0));
    }

    #[test]
    fn url_is_not_a_word() {
        let f = word_features("see www.example.com", &lexicon());
        assert!(f.contains_url);
        assert_eq!(f.longest_word, 3);
        assert_eq!(f.lower_case_word_ratio, Some(1.0));
        assert!(word_features("(https://x.org/a)", &lexicon()).contains_url);
    }

    #[test]
    fn language_words() {
        let f = word_features("english text", &lexicon());
        assert_eq!(f.language_word_ratio, Some(0.5));
        assert!(f.contains_language_word);
        assert!(word_features("auf deutsch", &lexicon()).contains_language_word);
    }

    #[test]
    fn no_words() {
        let f = word_features("123 !!", &lexicon());
        assert_eq!(f.longest_word, 0);
        assert_eq!(f.bad_word_ratio, None);
        assert_eq!(f.lower_case_word_ratio, None);
    }

    proptest! {
        #[test]
        fn ratios_bounded(s in "\\PC{0,40}") {
            let f = word_features(&s, &lexicon());
            for r in [f.lower_case_word_ratio, f.upper_case_word_ratio, f.bad_word_ratio, f.language_word_ratio].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&r));
            }
            prop_assert_eq!(f.longest_word == 0, f.lower_case_word_ratio.is_none());
        }
    }
}
