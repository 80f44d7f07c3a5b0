use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use unicode_script::{Script, UnicodeScript};

/// Character-level statistics of a comment tail. Every field is `None` for
/// an empty tail.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CharFeatures {
    pub upper_case_ratio: Option<f64>,
    pub lower_case_ratio: Option<f64>,
    pub alphanumeric_ratio: Option<f64>,
    pub digit_ratio: Option<f64>,
    pub punctuation_ratio: Option<f64>,
    pub bracket_ratio: Option<f64>,
    pub symbol_ratio: Option<f64>,
    pub whitespace_ratio: Option<f64>,
    pub latin_ratio: Option<f64>,
    pub non_latin_ratio: Option<f64>,
    pub longest_character_sequence: Option<u64>,
    pub main_alphabet: Option<String>,
}

const SYMBOLS: [char; 11] = ['&', '%', '$', '#', '@', '+', '-', '_', '*', '/', '\\'];
const BRACKETS: [char; 8] = ['(', ')', '[', ']', '{', '}', '<', '>'];

#[derive(Default)]
struct Counts {
    upper: u64,
    lower: u64,
    alphanumeric: u64,
    digit: u64,
    punctuation: u64,
    bracket: u64,
    symbol: u64,
    whitespace: u64,
    latin: u64,
    non_latin: u64,
}

pub fn char_features(tail: &str) -> CharFeatures {
    let mut c = Counts::default();
    let mut total = 0u64;
    let mut scripts: BTreeMap<&'static str, u64> = BTreeMap::new();
    let mut longest = 0u64;
    let mut run = 0u64;
    let mut prev = None;

    for ch in tail.chars() {
        total += 1;
        run = if prev == Some(ch) { run + 1 } else { 1 };
        longest = longest.max(run);
        prev = Some(ch);

        c.upper += ch.is_uppercase() as u64;
        c.lower += ch.is_lowercase() as u64;
        c.alphanumeric += ch.is_alphanumeric() as u64;
        c.digit += ch.is_numeric() as u64;
        c.punctuation += ch.is_ascii_punctuation() as u64;
        c.bracket += BRACKETS.contains(&ch) as u64;
        c.symbol += SYMBOLS.contains(&ch) as u64;
        c.whitespace += ch.is_whitespace() as u64;
        if ch.is_alphabetic() {
            let script = ch.script();
            if script == Script::Latin {
                c.latin += 1;
            } else {
                c.non_latin += 1;
            }
            *scripts.entry(script.full_name()).or_default() += 1;
        }
    }

    if total == 0 {
        return CharFeatures::default();
    }
    let ratio = |n: u64| Some(n as f64 / total as f64);
    // BTreeMap iterates names in ascending order, so keeping the first
    // strict maximum picks the smallest name among ties.
    let mut main_alphabet: Option<(&str, u64)> = None;
    for (&name, &n) in &scripts {
        if main_alphabet.is_none_or(|(_, best)| n > best) {
            main_alphabet = Some((name, n));
        }
    }
    CharFeatures {
        upper_case_ratio: ratio(c.upper),
        lower_case_ratio: ratio(c.lower),
        alphanumeric_ratio: ratio(c.alphanumeric),
        digit_ratio: ratio(c.digit),
        punctuation_ratio: ratio(c.punctuation),
        bracket_ratio: ratio(c.bracket),
        symbol_ratio: ratio(c.symbol),
        whitespace_ratio: ratio(c.whitespace),
        latin_ratio: ratio(c.latin),
        non_latin_ratio: ratio(c.non_latin),
        longest_character_sequence: Some(longest),
        main_alphabet: main_alphabet.map(|(name, _)| name.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn mixed_case_and_digit() {
        let f = char_features("AAb1");
        assert_eq!(f.upper_case_ratio, Some(0.5));
        assert_eq!(f.lower_case_ratio, Some(0.25));
        assert_eq!(f.digit_ratio, Some(0.25));
        assert_eq!(f.alphanumeric_ratio, Some(1.0));
        assert_eq!(f.longest_character_sequence, Some(2));
        assert_eq!(f.main_alphabet.as_deref(), Some("Latin"));
    }

    #[test]
    fn empty_tail_is_all_missing() {
        assert_eq!(char_features(""), CharFeatures::default());
    }

    #[test]
    fn symbols_only() {
        let f = char_features("$$$$");
        assert_eq!(f.symbol_ratio, Some(1.0));
        assert_eq!(f.longest_character_sequence, Some(4));
        assert_eq!(f.main_alphabet, None);
        assert_eq!(f.latin_ratio, Some(0.0));
    }

    #[test]
    fn brackets_and_scripts() {
        let f = char_features("(Москва)");
        assert_eq!(f.bracket_ratio, Some(0.25));
        assert_eq!(f.non_latin_ratio, Some(0.75));
        assert_eq!(f.main_alphabet.as_deref(), Some("Cyrillic"));
    }

    #[test]
    fn script_tie_picks_smallest_name() {
        // one Cyrillic, one Latin letter
        assert_eq!(
            char_features("жa").main_alphabet.as_deref(),
            Some("Cyrillic")
        );
        assert_eq!(
            char_features("aж").main_alphabet.as_deref(),
            Some("Cyrillic")
        );
    }

    proptest! {
        #[test]
        fn ratios_bounded_and_reversal_invariant(s in "\\PC{0,40}") {
            let f = char_features(&s);
            let rev: String = s.chars().rev().collect();
            prop_assert_eq!(&f, &char_features(&rev));
            let ratios: Vec<Option<f64>> = Vec::from([
                f.upper_case_ratio, f.lower_case_ratio, f.alphanumeric_ratio, f.digit_ratio,
                f.punctuation_ratio, f.bracket_ratio, f.symbol_ratio, f.whitespace_ratio,
                f.latin_ratio, f.non_latin_ratio,
            ]);
            for r in ratios.into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&r));
            }
            if let (Some(u), Some(l)) = (f.upper_case_ratio, f.lower_case_ratio) {
                prop_assert!(u + l <= 1.0 + 1e-12);
            }
            if let (Some(d), Some(a)) = (f.digit_ratio, f.alphanumeric_ratio) {
                prop_assert!(d <= a);
            }
            if let (Some(a), Some(b)) = (f.latin_ratio, f.non_latin_ratio) {
                prop_assert!(a + b <= 1.0 + 1e-12);
            }
        }
    }
}
