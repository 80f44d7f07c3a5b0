use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::ContextError;

/// Value written into every slot whose feature is missing or unseen. All
/// real counts, codes, ratios and flags are non-negative.
pub const PLACEHOLDER: f64 = -1.0;

/// Prefix of the one-hot slot names generated for each known tag.
pub const TAG_SLOT_PREFIX: &str = "tag:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SlotKind {
    Ratio,
    Count,
    Boolean,
    Categorical,
}

impl SlotKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SlotKind::Ratio => "ratio",
            SlotKind::Count => "count",
            SlotKind::Boolean => "boolean",
            SlotKind::Categorical => "categorical",
        }
    }

    pub fn parse(s: &str) -> Option<SlotKind> {
        Some(match s {
            "ratio" => SlotKind::Ratio,
            "count" => SlotKind::Count,
            "boolean" => SlotKind::Boolean,
            "categorical" => SlotKind::Categorical,
            _ => return None,
        })
    }
}

impl fmt::Display for SlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Content,
    Context,
    Tags,
}

use Slot as S;
use SlotKind::*;
use Source::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub name: String,
    pub kind: SlotKind,
    pub source: Source,
}

/// Fixed slots in vector order; tag one-hots follow them.
pub const BASE_SLOTS: [(&str, SlotKind, Source); 47] = [
    ("upperCaseRatio", Ratio, Content),
    ("lowerCaseRatio", Ratio, Content),
    ("alphanumericRatio", Ratio, Content),
    ("digitRatio", Ratio, Content),
    ("punctuationRatio", Ratio, Content),
    ("bracketRatio", Ratio, Content),
    ("symbolRatio", Ratio, Content),
    ("whitespaceRatio", Ratio, Content),
    ("latinRatio", Ratio, Content),
    ("nonLatinRatio", Ratio, Content),
    ("longestCharacterSequence", Count, Content),
    ("mainAlphabet", Categorical, Content),
    ("lowerCaseWordRatio", Ratio, Content),
    ("upperCaseWordRatio", Ratio, Content),
    ("badWordRatio", Ratio, Content),
    ("languageWordRatio", Ratio, Content),
    ("longestWord", Count, Content),
    ("containsLanguageWord", Boolean, Content),
    ("containsURL", Boolean, Content),
    ("commentTailLength", Count, Content),
    ("fuzzyTotal", Count, Content),
    ("fuzzyPartial", Count, Content),
    ("langMatchProb", Ratio, Content),
    ("isRegUser", Boolean, Context),
    ("isPrivUser", Boolean, Context),
    ("useridFrequency", Count, Context),
    ("userContinent", Categorical, Context),
    ("userCountry", Categorical, Context),
    ("userRegion", Categorical, Context),
    ("userCounty", Categorical, Context),
    ("userCity", Categorical, Context),
    ("userTimeZone", Categorical, Context),
    ("itemidFrequency", Count, Context),
    ("action", Categorical, Context),
    ("subaction", Categorical, Context),
    ("lang", Categorical, Context),
    ("langLocale", Categorical, Context),
    ("affectedProperty", Categorical, Context),
    ("itemid", Categorical, Context),
    ("userid", Categorical, Context),
    ("isMinor", Boolean, Context),
    ("changeCount", Count, Context),
    ("instanceOf", Categorical, Context),
    ("jsonLen", Count, Context),
    ("hour", Count, Context),
    ("prevUser", Categorical, Context),
    ("tags", Categorical, Context),
];

/// Names of the categorical variables, in slot order.
pub fn categorical_variables() -> impl Iterator<Item = &'static str> {
    BASE_SLOTS
        .iter()
        .filter(|(_, kind, _)| *kind == Categorical)
        .map(|(name, _, _)| *name)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    slots: Vec<Slot>,
    index: BTreeMap<String, usize>,
}

impl FeatureSchema {
    /// Base slots followed by one indicator per tag, in vocabulary order.
    pub fn new<I, T>(tag_vocabulary: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut slots: Vec<Slot> = BASE_SLOTS
            .iter()
            .map(|&(name, kind, source)| S {
                name: name.to_string(),
                kind,
                source,
            })
            .collect();
        slots.extend(tag_vocabulary.into_iter().map(|t| S {
            name: format!("{TAG_SLOT_PREFIX}{}", t.as_ref()),
            kind: Boolean,
            source: Tags,
        }));
        Self::from_slots(slots).expect("base and tag slot names are distinct")
    }

    /// Rebuilds a schema from persisted `(name, kind)` rows. The base slots
    /// must come first and in their fixed order.
    pub fn from_rows<I>(rows: I) -> Result<Self, ContextError>
    where
        I: IntoIterator<Item = (String, SlotKind)>,
    {
        let mut slots = Vec::new();
        for (i, (name, kind)) in rows.into_iter().enumerate() {
            let source = match BASE_SLOTS.get(i) {
                Some(&(base, base_kind, source)) if base == name && base_kind == kind => source,
                Some(_) => {
                    return Err(ContextError::SchemaMismatch(format!(
                        "slot {i} is {name:?}, expected {:?}",
                        BASE_SLOTS[i].0
                    )))
                }
                None if name.starts_with(TAG_SLOT_PREFIX) && kind == Boolean => Tags,
                None => {
                    return Err(ContextError::SchemaMismatch(format!(
                        "unexpected extra slot {name:?}"
                    )))
                }
            };
            slots.push(S { name, kind, source });
        }
        if slots.len() < BASE_SLOTS.len() {
            return Err(ContextError::SchemaMismatch(format!(
                "schema has {} slots, fewer than the {} base slots",
                slots.len(),
                BASE_SLOTS.len()
            )));
        }
        Self::from_slots(slots)
    }

    fn from_slots(slots: Vec<Slot>) -> Result<Self, ContextError> {
        let mut index = BTreeMap::new();
        for (i, slot) in slots.iter().enumerate() {
            if index.insert(slot.name.clone(), i).is_some() {
                return Err(ContextError::SchemaMismatch(format!(
                    "duplicate slot {:?}",
                    slot.name
                )));
            }
        }
        Ok(FeatureSchema { slots, index })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// FNV-1a over `name\tkind\n` for every slot.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        for slot in &self.slots {
            eat(slot.name.as_bytes());
            eat(b"\t");
            eat(slot.kind.as_str().as_bytes());
            eat(b"\n");
        }
        h
    }

    /// Places named values into slot order. Names missing from the list
    /// get the placeholder; names unknown to the schema are an error.
    pub fn assemble<'a, I>(&self, named: I) -> Result<FeatureVector, ContextError>
    where
        I: IntoIterator<Item = (&'a str, Option<f64>)>,
    {
        let mut values = alloc::vec![PLACEHOLDER; self.slots.len()];
        for (name, value) in named {
            let slot = self
                .index_of(name)
                .ok_or_else(|| ContextError::SchemaMismatch(format!("unknown feature {name:?}")))?;
            values[slot] = value.unwrap_or(PLACEHOLDER);
        }
        Ok(FeatureVector {
            schema_hash: self.hash(),
            values,
        })
    }
}

/// Feature values in schema slot order, stamped with the schema's hash.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub schema_hash: u64,
    pub values: Vec<f64>,
}
