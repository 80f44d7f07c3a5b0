//! The full per-revision path: comment parsing, features, encoding, model
//! and session smoothing.

use alloc::borrow::Cow;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::comment::{parse_comment_with, CommentConfig, ParsedComment};
use crate::content::{
    char_features, sentence_features, word_features, EntityDoc, LanguageModel, Lexicon,
};
use crate::context::{
    context_features, encode_frozen, observe_categories, ContextError, FeatureVector, RawFeatures,
    RawValue, StateStore,
};
use crate::gbm::{GbmError, TreeEnsemble};
use crate::revision::{RawRevision, RevisionMetadata};
use crate::sil::SilPostprocessor;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error(transparent)]
    Model(#[from] GbmError),
}

/// Static inputs to feature extraction that are not learned from the
/// training stream.
#[derive(Debug, Clone)]
pub struct Resources {
    pub lexicon: Lexicon,
    pub language_model: LanguageModel,
    pub comment_config: CommentConfig,
}

/// Content features of a parsed comment, named as in the schema.
pub fn content_features(
    pc: &ParsedComment,
    entity: Option<&EntityDoc>,
    res: &Resources,
) -> RawFeatures {
    let c = char_features(&pc.tail);
    let w = word_features(&pc.tail, &res.lexicon);
    let s = sentence_features(pc, entity, &res.language_model);
    let n = |name: &'static str, v: Option<f64>| (Cow::Borrowed(name), RawValue::Number(v));
    let count = |v: Option<u64>| v.map(|v| v as f64);
    Vec::from([
        n("upperCaseRatio", c.upper_case_ratio),
        n("lowerCaseRatio", c.lower_case_ratio),
        n("alphanumericRatio", c.alphanumeric_ratio),
        n("digitRatio", c.digit_ratio),
        n("punctuationRatio", c.punctuation_ratio),
        n("bracketRatio", c.bracket_ratio),
        n("symbolRatio", c.symbol_ratio),
        n("whitespaceRatio", c.whitespace_ratio),
        n("latinRatio", c.latin_ratio),
        n("nonLatinRatio", c.non_latin_ratio),
        n(
            "longestCharacterSequence",
            count(c.longest_character_sequence),
        ),
        ("mainAlphabet".into(), RawValue::Category(c.main_alphabet)),
        n("lowerCaseWordRatio", w.lower_case_word_ratio),
        n("upperCaseWordRatio", w.upper_case_word_ratio),
        n("badWordRatio", w.bad_word_ratio),
        n("languageWordRatio", w.language_word_ratio),
        n("longestWord", count(Some(w.longest_word))),
        (
            "containsLanguageWord".into(),
            RawValue::flag(w.contains_language_word),
        ),
        ("containsURL".into(), RawValue::flag(w.contains_url)),
        n("commentTailLength", count(Some(s.comment_tail_length))),
        n("fuzzyTotal", s.fuzzy_total.map(f64::from)),
        n("fuzzyPartial", s.fuzzy_partial.map(f64::from)),
        n("langMatchProb", s.lang_match_prob),
    ])
}

/// Every named feature of one revision before categorical encoding.
pub fn extract_raw(
    rev: &RawRevision,
    meta: &RevisionMetadata,
    res: &Resources,
    store: &StateStore,
) -> (ParsedComment, RawFeatures) {
    let pc = parse_comment_with(&rev.comment, &res.comment_config);
    let entity = EntityDoc::parse(&rev.entity_text);
    let mut raw = content_features(&pc, entity.as_ref(), res);
    raw.extend(context_features(rev, meta, &pc, entity.as_ref(), store));
    (pc, raw)
}

/// Encodes raw features against a frozen store.
pub fn assemble(raw: &RawFeatures, store: &StateStore) -> Result<FeatureVector, ContextError> {
    let encoded = encode_frozen(raw, store)?;
    store
        .schema()
        .assemble(encoded.iter().map(|(name, v)| (name.as_ref(), *v)))
}

pub fn featurize(
    rev: &RawRevision,
    meta: &RevisionMetadata,
    res: &Resources,
    store: &StateStore,
) -> Result<(ParsedComment, FeatureVector), ContextError> {
    let (pc, raw) = extract_raw(rev, meta, res, store);
    Ok((pc, assemble(&raw, store)?))
}

/// Builds and freezes the state from a chronological training stream.
/// Frequencies cover the whole stream; dictionaries get every categorical
/// value in first-seen order.
pub fn build_state<'a, I, P, B, S, T>(
    records: I,
    privileged_users: P,
    bot_names: B,
    res: &Resources,
) -> Result<StateStore, ContextError>
where
    I: IntoIterator<Item = (&'a RawRevision, &'a RevisionMetadata)>,
    P: IntoIterator<Item = S>,
    B: IntoIterator<Item = T>,
    S: Into<String>,
    T: Into<String>,
{
    let mut store = StateStore::new(privileged_users, bot_names);
    let mut seen = false;
    for (rev, meta) in records {
        seen = true;
        store.observe_counts(rev, meta)?;
        let (_, raw) = extract_raw(rev, meta, res, &store);
        observe_categories(&raw, &mut store)?;
    }
    if !seen {
        return Err(ContextError::EmptyStream);
    }
    store.freeze();
    Ok(store)
}

/// Frozen state plus a model trained against its schema.
#[derive(Debug, Clone)]
pub struct ScoringEngine {
    resources: Resources,
    store: StateStore,
    model: TreeEnsemble,
}

impl ScoringEngine {
    pub fn new(
        resources: Resources,
        store: StateStore,
        model: TreeEnsemble,
    ) -> Result<Self, EngineError> {
        if !store.is_frozen() {
            return Err(ContextError::SchemaMismatch("state store is not frozen".into()).into());
        }
        let hash = store.schema().hash();
        if model.schema_hash != hash {
            return Err(GbmError::SchemaMismatch(alloc::format!(
                "model trained for schema {:016x}, state has {hash:016x}",
                model.schema_hash
            ))
            .into());
        }
        Ok(ScoringEngine {
            resources,
            store,
            model,
        })
    }

    pub fn resources(&self) -> &Resources {
        &self.resources
    }

    pub fn store(&self) -> &StateStore {
        &self.store
    }

    pub fn model(&self) -> &TreeEnsemble {
        &self.model
    }

    pub fn featurize(
        &self,
        rev: &RawRevision,
        meta: &RevisionMetadata,
    ) -> Result<(ParsedComment, FeatureVector), EngineError> {
        Ok(featurize(rev, meta, &self.resources, &self.store)?)
    }

    /// Model probability, before session smoothing.
    pub fn raw_score(
        &self,
        rev: &RawRevision,
        meta: &RevisionMetadata,
    ) -> Result<(ParsedComment, f64), EngineError> {
        let (pc, v) = self.featurize(rev, meta)?;
        Ok((pc, self.model.predict(&v)?))
    }
}

/// Scores a stream in order, keeping per-session means. Batch scoring, the
/// protocol client and the HTTP endpoint all go through here.
#[derive(Debug, Clone)]
pub struct SessionScorer<'e> {
    engine: &'e ScoringEngine,
    sil: SilPostprocessor,
}

impl<'e> SessionScorer<'e> {
    pub fn new(engine: &'e ScoringEngine) -> Self {
        Self::with_sil(engine, SilPostprocessor::default())
    }

    pub fn with_sil(engine: &'e ScoringEngine, sil: SilPostprocessor) -> Self {
        SessionScorer { engine, sil }
    }

    pub fn engine(&self) -> &'e ScoringEngine {
        self.engine
    }

    /// Final score of the next revision in the stream.
    pub fn score(
        &mut self,
        rev: &RawRevision,
        meta: &RevisionMetadata,
    ) -> Result<f64, EngineError> {
        let (pc, raw) = self.engine.raw_score(rev, meta)?;
        let value = self.sil.raw_or_sentinel(&pc, raw);
        Ok(self.sil.adjust(meta.session_id, value))
    }

    /// Restarts every session mean.
    pub fn reset_sessions(&mut self) {
        self.sil.reset();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{FeatureSchema, PLACEHOLDER};
    use crate::gbm::{GbmParams, Node, Tree};
    use crate::revision::{Contributor, Geo};
    use alloc::string::ToString;
    use alloc::vec;

    fn resources() -> Resources {
        Resources {
            lexicon: Lexicon::new(["idiot"], ["english", "german"]),
            language_model: LanguageModel::train([
                ("en", "the quick brown fox jumps over the lazy dog"),
                ("de", "der schnelle braune fuchs springt"),
            ])
            .unwrap(),
            comment_config: CommentConfig::default(),
        }
    }

    fn registered(id: u64, name: &str, item: &str, ts: i64) -> RawRevision {
        RawRevision {
            revision_id: id,
            parent_id: None,
            item_id: item.into(),
            timestamp: ts,
            contributor: Contributor::Registered {
                user_id: 100 + id,
                user_name: name.into(),
            },
            comment: "/* wbsetlabel-add:1|en */ hello".into(),
            entity_text: r#"{"labels":{"en":{"value":"hello"}}}"#.into(),
            is_minor: false,
        }
    }

    fn anonymous(id: u64, item: &str) -> RawRevision {
        RawRevision {
            contributor: Contributor::Anonymous {
                ip_address: "1.2.3.4".into(),
            },
            ..registered(id, "", item, 1_456_854_300)
        }
    }

    fn meta(id: u64, tags: &[&str], geo: Option<Geo>) -> RevisionMetadata {
        RevisionMetadata {
            revision_id: id,
            session_id: Some(id),
            geo,
            tags: tags.iter().map(|t| t.to_string()).collect(),
        }
    }

    fn slot(store: &StateStore, v: &FeatureVector, name: &str) -> f64 {
        v.values[store.schema().index_of(name).unwrap()]
    }

    #[test]
    fn build_counts_and_tag_order() {
        let res = resources();
        let revs = [
            registered(1, "A", "Q5", 0),
            registered(2, "A", "Q5", 1),
            registered(3, "A", "Q7", 2),
        ];
        let metas = [
            meta(1, &["x"], None),
            meta(2, &["y", "x"], None),
            meta(3, &[], None),
        ];
        let store = build_state(revs.iter().zip(&metas), ["A"], ["SomeBot"], &res).unwrap();
        assert_eq!(store.user_edit_count("A"), 3);
        assert_eq!(store.item_edit_count("Q5"), 2);
        assert_eq!(store.tag_vocabulary(), ["x", "y"]);
        assert!(store.is_frozen());
        assert_eq!(
            build_state(core::iter::empty(), [""; 0], [""; 0], &res).unwrap_err(),
            ContextError::EmptyStream
        );
    }

    #[test]
    fn context_examples() {
        let res = resources();
        let geo = Geo {
            country: Some("DE".into()),
            ..Default::default()
        };
        let revs = [
            registered(1, "P", "Q1", 0),
            registered(2, "P", "Q1", 0),
            registered(3, "P", "Q2", 0),
            anonymous(4, "Q2"),
        ];
        let metas = [
            meta(1, &[], None),
            meta(2, &[], None),
            meta(3, &[], None),
            meta(4, &["t"], Some(geo.clone())),
        ];
        let store = build_state(revs.iter().zip(&metas), ["P"], [""; 0], &res).unwrap();

        let (_, anon) = featurize(&revs[3], &metas[3], &res, &store).unwrap();
        assert_eq!(slot(&store, &anon, "isRegUser"), 0.0);
        assert_eq!(slot(&store, &anon, "useridFrequency"), PLACEHOLDER);
        assert_eq!(
            slot(&store, &anon, "userCountry"),
            store.code("userCountry", Some("DE")).unwrap() as f64
        );
        assert_eq!(slot(&store, &anon, "hour"), 17.0);
        assert_eq!(slot(&store, &anon, "tag:t"), 1.0);

        let (_, reg) = featurize(&revs[0], &metas[0], &res, &store).unwrap();
        assert_eq!(slot(&store, &reg, "isPrivUser"), 1.0);
        assert_eq!(slot(&store, &reg, "useridFrequency"), 3.0);
        for g in [
            "userContinent",
            "userCountry",
            "userRegion",
            "userCounty",
            "userCity",
            "userTimeZone",
        ] {
            assert_eq!(slot(&store, &reg, g), PLACEHOLDER);
        }
        assert_eq!(slot(&store, &reg, "tag:t"), 0.0);
        assert_eq!(slot(&store, &reg, "itemidFrequency"), 2.0);

        // Unseen item and category values after freezing.
        let fresh = anonymous(9, "Q999");
        let odd = Geo {
            country: Some("ZZ".into()),
            ..Default::default()
        };
        let (_, v) = featurize(&fresh, &meta(9, &[], Some(odd)), &res, &store).unwrap();
        assert_eq!(slot(&store, &v, "itemidFrequency"), 0.0);
        assert_eq!(slot(&store, &v, "userCountry"), PLACEHOLDER);
        assert_eq!(slot(&store, &v, "itemid"), PLACEHOLDER);
    }

    #[test]
    fn engine_checks_schema_and_smooths_sessions() {
        let res = resources();
        let revs = [registered(1, "A", "Q1", 0)];
        let metas = [meta(1, &[], None)];
        let store = build_state(revs.iter().zip(&metas), [""; 0], [""; 0], &res).unwrap();
        let model = |hash| TreeEnsemble {
            params: GbmParams::default(),
            trees: vec![Tree {
                nodes: vec![Node::leaf(1.0)],
            }],
            schema_hash: hash,
        };
        assert!(ScoringEngine::new(res.clone(), store.clone(), model(0)).is_err());
        assert_ne!(FeatureSchema::new([""; 0]).hash(), 0);

        let engine = ScoringEngine::new(res, store.clone(), model(store.schema().hash())).unwrap();
        let mut scorer = SessionScorer::new(&engine);
        let p = crate::gbm::sigmoid(1.0);
        let mut m = meta(1, &[], None);
        m.session_id = Some(42);
        assert_eq!(scorer.score(&revs[0], &m).unwrap(), p);

        let mut create = registered(2, "A", "Q1", 0);
        create.comment = "/* wbeditentity-create:0| */".into();
        let mut m2 = meta(2, &[], None);
        m2.session_id = Some(43);
        assert_eq!(scorer.score(&create, &m2).unwrap(), -1000.0);
        assert_eq!(scorer.score(&revs[0], &m2).unwrap(), (-1000.0 + p) / 2.0);
    }
}
