//! Character-bigram naive Bayes language identifier.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub const SMOOTHING: f64 = 0.5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LangIdError {
    #[error("need samples for at least two languages, got {0}")]
    InsufficientData(usize),
    #[error("empty training text for language {0:?}")]
    EmptySample(String),
}

type Bigram = (char, char);

/// Per-language bigram log-probabilities. Every bigram outside the shared
/// training vocabulary falls into one extra bucket, so each language's
/// distribution sums to one over `vocabulary + 1` outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageModel {
    languages: Vec<String>,
    log_probs: BTreeMap<Bigram, Vec<f64>>,
    unseen_log_prob: Vec<f64>,
}

fn normalize(text: &str) -> Vec<char> {
    let mut out = Vec::with_capacity(text.len() + 2);
    out.push(' ');
    for c in text.chars().flat_map(char::to_lowercase) {
        let c = if c.is_whitespace() { ' ' } else { c };
        if c == ' ' && out.last() == Some(&' ') {
            continue;
        }
        out.push(c);
    }
    if out.last() != Some(&' ') {
        out.push(' ');
    }
    out
}

fn bigrams(chars: &[char]) -> impl Iterator<Item = Bigram> + '_ {
    chars.windows(2).map(|w| (w[0], w[1]))
}

impl LanguageModel {
    /// Trains from `(language code, sample text)` pairs; several samples
    /// per language are pooled.
    pub fn train<'a, I>(samples: I) -> Result<Self, LangIdError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut per_lang: BTreeMap<String, BTreeMap<Bigram, u64>> = BTreeMap::new();
        for (code, text) in samples {
            let counts = per_lang.entry(code.into()).or_default();
            let chars = normalize(text);
            for g in bigrams(&chars) {
                *counts.entry(g).or_default() += 1;
            }
        }
        if per_lang.len() < 2 {
            return Err(LangIdError::InsufficientData(per_lang.len()));
        }
        if let Some((code, _)) = per_lang.iter().find(|(_, c)| c.is_empty()) {
            return Err(LangIdError::EmptySample(code.clone()));
        }

        let mut vocabulary: BTreeMap<Bigram, ()> = BTreeMap::new();
        for counts in per_lang.values() {
            vocabulary.extend(counts.keys().map(|&g| (g, ())));
        }
        let outcomes = (vocabulary.len() + 1) as f64;

        let languages: Vec<String> = per_lang.keys().cloned().collect();
        let mut log_probs: BTreeMap<Bigram, Vec<f64>> = BTreeMap::new();
        let mut unseen_log_prob = Vec::with_capacity(languages.len());
        for counts in per_lang.values() {
            let total = counts.values().sum::<u64>() as f64;
            let denom = total + SMOOTHING * outcomes;
            for &g in vocabulary.keys() {
                let c = counts.get(&g).copied().unwrap_or(0) as f64;
                log_probs
                    .entry(g)
                    .or_default()
                    .push(libm::log((c + SMOOTHING) / denom));
            }
            unseen_log_prob.push(libm::log(SMOOTHING / denom));
        }
        Ok(LanguageModel {
            languages,
            log_probs,
            unseen_log_prob,
        })
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn supports(&self, code: &str) -> bool {
        self.languages
            .binary_search_by(|l| l.as_str().cmp(code))
            .is_ok()
    }

    /// Log-likelihood of `text` under each language, in [`languages`](Self::languages) order.
    pub fn log_likelihoods(&self, text: &str) -> Option<Vec<f64>> {
        let chars = normalize(text);
        if chars.len() <= 2 {
            return None;
        }
        let mut ll = alloc::vec![0.0; self.languages.len()];
        for g in bigrams(&chars) {
            let row = self.log_probs.get(&g).unwrap_or(&self.unseen_log_prob);
            for (acc, lp) in ll.iter_mut().zip(row) {
                *acc += lp;
            }
        }
        Some(ll)
    }

    /// Posterior over languages under uniform priors; `None` for blank text.
    pub fn posteriors(&self, text: &str) -> Option<Vec<f64>> {
        let ll = self.log_likelihoods(text)?;
        let max = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = ll.iter().map(|l| libm::exp(l - max)).collect();
        let z: f64 = weights.iter().sum();
        Some(weights.into_iter().map(|w| w / z).collect())
    }

    /// Posterior probability that `text` is written in `stated`.
    pub fn lang_match_prob(&self, text: &str, stated: &str) -> Option<f64> {
        let idx = self
            .languages
            .binary_search_by(|l| l.as_str().cmp(stated))
            .ok()?;
        Some(self.posteriors(text)?[idx])
    }
}
