use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};

use serde_json::Value;

use super::fuzzy::{fuzzy_partial_ratio, fuzzy_ratio};
use super::langid::LanguageModel;
use crate::comment::ParsedComment;

/// The parts of a post-edit entity document the features look at.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityDoc {
    /// Language code → label text.
    pub labels: BTreeMap<String, String>,
    /// Site id (`enwiki`) → page title.
    pub sitelinks: BTreeMap<String, String>,
    /// Target of the first `P31` (instance of) claim.
    pub instance_of: Option<String>,
}

impl EntityDoc {
    /// `None` when the text is not a JSON object.
    pub fn parse(text: &str) -> Option<EntityDoc> {
        let root: Value = serde_json::from_str(text).ok()?;
        let root = root.as_object()?;
        let mut doc = EntityDoc::default();

        if let Some(labels) = root.get("labels").and_then(Value::as_object) {
            for (lang, label) in labels {
                if let Some(v) = label
                    .get("value")
                    .and_then(Value::as_str)
                    .or(label.as_str())
                {
                    doc.labels.insert(lang.clone(), v.to_string());
                }
            }
        }
        if let Some(links) = root.get("sitelinks").and_then(Value::as_object) {
            for (site, link) in links {
                if let Some(t) = link.get("title").and_then(Value::as_str).or(link.as_str()) {
                    doc.sitelinks.insert(site.clone(), t.to_string());
                }
            }
        }
        doc.instance_of = root
            .get("claims")
            .and_then(|c| c.get("P31"))
            .and_then(|c| c.get(0))
            .and_then(|c| c.pointer("/mainsnak/datavalue/value"))
            .and_then(|v| match v.get("id").and_then(Value::as_str) {
                Some(id) => Some(id.to_string()),
                None => v
                    .get("numeric-id")
                    .and_then(Value::as_u64)
                    .map(|n| format!("Q{n}")),
            });
        Some(doc)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SentenceFeatures {
    pub comment_tail_length: u64,
    pub fuzzy_total: Option<u8>,
    pub fuzzy_partial: Option<u8>,
    pub lang_match_prob: Option<f64>,
}

/// Picks the entity text a label or sitelink edit should resemble: the
/// label in the edited site's language for sitelink edits, the sitelink of
/// the edited language for label edits, else the closest candidate.
pub fn reference_text<'e>(pc: &ParsedComment, entity: &'e EntityDoc) -> Option<&'e str> {
    let lang = pc.lang.as_deref();
    let (candidates, preferred) = match pc.action.as_deref() {
        Some("wbsetsitelink") => (&entity.labels, lang.map(String::from)),
        Some("wbsetlabel") => (&entity.sitelinks, lang.map(|l| format!("{l}wiki"))),
        _ => return None,
    };
    if let Some(hit) = preferred.and_then(|k| candidates.get(&k)) {
        return Some(hit);
    }
    let mut best: Option<(&str, u8)> = None;
    for text in candidates.values() {
        let r = fuzzy_ratio(&pc.tail, text);
        if best.is_none_or(|(_, b)| r > b) {
            best = Some((text, r));
        }
    }
    best.map(|(t, _)| t)
}

pub fn sentence_features(
    pc: &ParsedComment,
    entity: Option<&EntityDoc>,
    model: &LanguageModel,
) -> SentenceFeatures {
    let reference = entity.and_then(|e| reference_text(pc, e));
    SentenceFeatures {
        comment_tail_length: pc.tail.chars().count() as u64,
        fuzzy_total: reference.map(|r| fuzzy_ratio(&pc.tail, r)),
        fuzzy_partial: reference.map(|r| fuzzy_partial_ratio(&pc.tail, r)),
        lang_match_prob: pc
            .lang
            .as_deref()
            .and_then(|l| model.lang_match_prob(&pc.tail, l)),
    }
}
