use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::schema::{categorical_variables, FeatureSchema};
use super::ContextError;
use crate::comment::BotRule;
use crate::revision::{RawRevision, RevisionMetadata};

/// Dense string → code table; codes follow first-seen order from 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CategoricalDict {
    codes: BTreeMap<String, i64>,
    values: Vec<String>,
}

impl CategoricalDict {
    pub fn get(&self, value: &str) -> Option<i64> {
        self.codes.get(value).copied()
    }

    pub fn decode(&self, code: i64) -> Option<&str> {
        usize::try_from(code)
            .ok()
            .and_then(|i| self.values.get(i))
            .map(String::as_str)
    }

    fn insert(&mut self, value: &str) -> i64 {
        if let Some(code) = self.get(value) {
            return code;
        }
        let code = self.values.len() as i64;
        self.codes.insert(value.to_string(), code);
        self.values.push(value.to_string());
        code
    }

    /// Values in code order.
    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rebuilds a table from `(value, code)` rows; codes must be exactly
    /// `0..n` with no repeated value.
    pub fn from_rows<I>(rows: I) -> Result<Self, ContextError>
    where
        I: IntoIterator<Item = (String, i64)>,
    {
        let mut rows: Vec<(String, i64)> = rows.into_iter().collect();
        rows.sort_by_key(|r| r.1);
        let mut dict = CategoricalDict::default();
        for (expected, (value, code)) in rows.into_iter().enumerate() {
            if code != expected as i64 || dict.codes.contains_key(&value) {
                return Err(ContextError::CorruptTable(alloc::format!(
                    "bad code {code} for {value:?}"
                )));
            }
            dict.insert(&value);
        }
        Ok(dict)
    }
}

/// Everything the scorer remembers from the training period: edit
/// frequencies, categorical code tables, the privileged-user and bot lists
/// and the tag vocabulary. Read-only once frozen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateStore {
    user_edit_counts: BTreeMap<String, u64>,
    item_edit_counts: BTreeMap<String, u64>,
    privileged_users: BTreeSet<String>,
    dicts: BTreeMap<String, CategoricalDict>,
    tag_vocabulary: Vec<String>,
    bots: BotRule,
    schema: FeatureSchema,
    frozen: bool,
}

/// Raw parts of a frozen store, as persisted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StoreParts {
    pub user_edit_counts: BTreeMap<String, u64>,
    pub item_edit_counts: BTreeMap<String, u64>,
    pub privileged_users: BTreeSet<String>,
    pub dicts: BTreeMap<String, CategoricalDict>,
    pub tag_vocabulary: Vec<String>,
    pub bot_names: BTreeSet<String>,
}

impl StateStore {
    /// An empty, unfrozen store.
    pub fn new<P, B, S, T>(privileged_users: P, bot_names: B) -> Self
    where
        P: IntoIterator<Item = S>,
        B: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        StateStore {
            user_edit_counts: BTreeMap::new(),
            item_edit_counts: BTreeMap::new(),
            privileged_users: privileged_users.into_iter().map(Into::into).collect(),
            dicts: categorical_variables()
                .map(|v| (v.to_string(), CategoricalDict::default()))
                .collect(),
            tag_vocabulary: Vec::new(),
            bots: BotRule::new(bot_names),
            schema: FeatureSchema::new::<_, &str>([]),
            frozen: false,
        }
    }

    /// Reassembles a frozen store from persisted parts.
    pub fn from_parts(parts: StoreParts) -> Result<Self, ContextError> {
        let mut dicts = parts.dicts;
        for v in categorical_variables() {
            dicts.entry(v.to_string()).or_default();
        }
        if let Some(extra) = dicts
            .keys()
            .find(|k| !categorical_variables().any(|v| v == *k))
        {
            return Err(ContextError::UnknownVariable(extra.clone()));
        }
        Ok(StateStore {
            user_edit_counts: parts.user_edit_counts,
            item_edit_counts: parts.item_edit_counts,
            privileged_users: parts.privileged_users,
            dicts,
            schema: FeatureSchema::new(&parts.tag_vocabulary),
            tag_vocabulary: parts.tag_vocabulary,
            bots: BotRule::new(parts.bot_names),
            frozen: true,
        })
    }

    pub fn to_parts(&self) -> StoreParts {
        StoreParts {
            user_edit_counts: self.user_edit_counts.clone(),
            item_edit_counts: self.item_edit_counts.clone(),
            privileged_users: self.privileged_users.clone(),
            dicts: self.dicts.clone(),
            tag_vocabulary: self.tag_vocabulary.clone(),
            bot_names: self.bots.names().clone(),
        }
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Fixes the tag vocabulary and schema; no table changes afterwards.
    pub fn freeze(&mut self) {
        self.schema = FeatureSchema::new(&self.tag_vocabulary);
        self.frozen = true;
    }

    /// Valid only after [`freeze`](Self::freeze); before that it has no tag slots.
    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn bots(&self) -> &BotRule {
        &self.bots
    }

    pub fn tag_vocabulary(&self) -> &[String] {
        &self.tag_vocabulary
    }

    pub fn dict(&self, variable: &str) -> Option<&CategoricalDict> {
        self.dicts.get(variable)
    }

    pub fn user_edit_count(&self, user_name: &str) -> u64 {
        self.user_edit_counts.get(user_name).copied().unwrap_or(0)
    }

    pub fn item_edit_count(&self, item_id: &str) -> u64 {
        self.item_edit_counts.get(item_id).copied().unwrap_or(0)
    }

    pub fn is_privileged(&self, user_name: &str) -> bool {
        self.privileged_users.contains(user_name)
    }

    /// Counts one training revision toward user and item frequencies and
    /// extends the tag vocabulary.
    pub fn observe_counts(
        &mut self,
        rev: &RawRevision,
        meta: &RevisionMetadata,
    ) -> Result<(), ContextError> {
        if self.frozen {
            return Err(ContextError::Frozen);
        }
        if let Some(name) = rev.contributor.user_name() {
            *self.user_edit_counts.entry(name.to_string()).or_default() += 1;
        }
        if !rev.item_id.is_empty() {
            *self
                .item_edit_counts
                .entry(rev.item_id.clone())
                .or_default() += 1;
        }
        for tag in &meta.tags {
            if !self.tag_vocabulary.contains(tag) {
                self.tag_vocabulary.push(tag.clone());
            }
        }
        Ok(())
    }

    /// Code for `value`, assigning a new one while the store is still being
    /// built. Absent values, and unseen values once frozen, map to -1.
    pub fn encode_categorical(
        &mut self,
        variable: &str,
        value: Option<&str>,
    ) -> Result<i64, ContextError> {
        let frozen = self.frozen;
        let dict = self
            .dicts
            .get_mut(variable)
            .ok_or_else(|| ContextError::UnknownVariable(variable.to_string()))?;
        Ok(match value {
            None => -1,
            Some(v) if frozen => dict.get(v).unwrap_or(-1),
            Some(v) => dict.insert(v),
        })
    }

    /// Read-only lookup; unseen or absent values map to -1.
    pub fn code(&self, variable: &str, value: Option<&str>) -> Result<i64, ContextError> {
        let dict = self
            .dicts
            .get(variable)
            .ok_or_else(|| ContextError::UnknownVariable(variable.to_string()))?;
        Ok(value.and_then(|v| dict.get(v)).unwrap_or(-1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::revision::Contributor;

    fn rev(user: &str, item: &str) -> RawRevision {
        RawRevision {
            revision_id: 1,
            parent_id: None,
            item_id: item.into(),
            timestamp: 0,
            contributor: Contributor::Registered {
                user_id: 1,
                user_name: user.into(),
            },
            comment: String::new(),
            entity_text: String::new(),
            is_minor: false,
        }
    }

    fn meta(tags: &[&str]) -> RevisionMetadata {
        RevisionMetadata {
            tags: tags.iter().map(|t| t.to_string()).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn counts_and_tag_order() {
        let mut s = StateStore::new::<_, _, String, String>([], []);
        for _ in 0..3 {
            s.observe_counts(&rev("A", "Q5"), &meta(&["x"])).unwrap();
        }
        s.observe_counts(&rev("B", "Q6"), &meta(&["y", "x"]))
            .unwrap();
        assert_eq!(s.user_edit_count("A"), 3);
        assert_eq!(s.item_edit_count("Q5"), 3);
        assert_eq!(s.item_edit_count("Q7"), 0);
        assert_eq!(s.tag_vocabulary(), ["x", "y"]);
    }

    #[test]
    fn encoding_rules() {
        let mut s = StateStore::new::<_, _, String, String>([], []);
        assert_eq!(s.encode_categorical("lang", Some("es")).unwrap(), 0);
        assert_eq!(s.encode_categorical("lang", Some("en")).unwrap(), 1);
        assert_eq!(s.encode_categorical("lang", Some("es")).unwrap(), 0);
        assert_eq!(s.encode_categorical("lang", None).unwrap(), -1);
        assert!(matches!(
            s.encode_categorical("nope", Some("x")),
            Err(ContextError::UnknownVariable(_))
        ));
        s.freeze();
        assert_eq!(s.encode_categorical("lang", Some("fr")).unwrap(), -1);
        assert_eq!(s.code("lang", Some("en")).unwrap(), 1);
        assert_eq!(s.dict("lang").unwrap().decode(1), Some("en"));
        assert!(matches!(
            s.observe_counts(&rev("A", "Q1"), &meta(&[])),
            Err(ContextError::Frozen)
        ));
    }

    #[test]
    fn parts_round_trip() {
        let mut s = StateStore::new(["Admin"], ["Harvester"]);
        s.observe_counts(&rev("A", "Q5"), &meta(&["x"])).unwrap();
        s.encode_categorical("userCity", Some("Berlin")).unwrap();
        s.freeze();
        assert_eq!(StateStore::from_parts(s.to_parts()).unwrap(), s);
    }

    #[test]
    fn dict_rows_must_be_dense() {
        let ok = CategoricalDict::from_rows([("b".into(), 1), ("a".into(), 0)]).unwrap();
        assert_eq!(ok.values(), ["a", "b"]);
        assert!(CategoricalDict::from_rows([("a".into(), 1)]).is_err());
        assert!(CategoricalDict::from_rows([("a".into(), 0), ("a".into(), 1)]).is_err());
    }
}
