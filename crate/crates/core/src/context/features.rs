use alloc::borrow::Cow;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::schema::TAG_SLOT_PREFIX;
use super::state::StateStore;
use super::ContextError;
use crate::comment::{classify_prev_user, ParsedComment};
use crate::content::EntityDoc;
use crate::revision::{Contributor, RawRevision, RevisionMetadata};

/// A feature before categorical encoding.
#[derive(Debug, Clone, PartialEq)]
pub enum RawValue {
    Number(Option<f64>),
    Category(Option<String>),
}

impl RawValue {
    pub fn flag(b: bool) -> Self {
        RawValue::Number(Some(b as u8 as f64))
    }

    pub fn count(n: Option<u64>) -> Self {
        RawValue::Number(n.map(|n| n as f64))
    }
}

/// Named features in extraction order.
pub type RawFeatures = Vec<(Cow<'static, str>, RawValue)>;

/// User, item and revision context of one revision.
pub fn context_features(
    rev: &RawRevision,
    meta: &RevisionMetadata,
    pc: &ParsedComment,
    entity: Option<&EntityDoc>,
    store: &StateStore,
) -> RawFeatures {
    let mut out: RawFeatures = Vec::with_capacity(24 + store.tag_vocabulary().len());
    let num = |out: &mut RawFeatures, name: &'static str, v: RawValue| out.push((name.into(), v));

    let registered = rev.contributor.is_registered();
    num(&mut out, "isRegUser", RawValue::flag(registered));
    let user_name = rev.contributor.user_name();
    num(
        &mut out,
        "isPrivUser",
        RawValue::flag(user_name.is_some_and(|u| store.is_privileged(u))),
    );
    num(
        &mut out,
        "useridFrequency",
        RawValue::count(user_name.map(|u| store.user_edit_count(u))),
    );

    let geo = match &rev.contributor {
        Contributor::Anonymous { .. } => meta.geo.clone().unwrap_or_default(),
        Contributor::Registered { .. } => Default::default(),
    };
    for (name, value) in [
        ("userContinent", geo.continent),
        ("userCountry", geo.country),
        ("userRegion", geo.region),
        ("userCounty", geo.county),
        ("userCity", geo.city),
        ("userTimeZone", geo.timezone),
    ] {
        num(&mut out, name, RawValue::Category(value));
    }

    num(
        &mut out,
        "itemidFrequency",
        RawValue::count(Some(store.item_edit_count(&rev.item_id))),
    );

    let cat = |v: Option<&String>| RawValue::Category(v.cloned());
    num(&mut out, "action", cat(pc.action.as_ref()));
    num(&mut out, "subaction", cat(pc.subaction.as_ref()));
    num(&mut out, "lang", cat(pc.lang.as_ref()));
    num(&mut out, "langLocale", cat(pc.lang_locale.as_ref()));
    num(
        &mut out,
        "affectedProperty",
        cat(pc.affected_property.as_ref()),
    );
    num(
        &mut out,
        "itemid",
        RawValue::Category((!rev.item_id.is_empty()).then(|| rev.item_id.clone())),
    );
    num(
        &mut out,
        "userid",
        RawValue::Category(match &rev.contributor {
            Contributor::Registered { user_id, .. } => Some(user_id.to_string()),
            Contributor::Anonymous { .. } => None,
        }),
    );
    num(&mut out, "isMinor", RawValue::flag(rev.is_minor));
    num(&mut out, "changeCount", RawValue::count(pc.change_count));
    num(
        &mut out,
        "instanceOf",
        RawValue::Category(entity.and_then(|e| e.instance_of.clone())),
    );
    num(
        &mut out,
        "jsonLen",
        RawValue::count(Some(rev.entity_text.chars().count() as u64)),
    );
    num(&mut out, "hour", RawValue::count(Some(rev.hour() as u64)));
    num(
        &mut out,
        "prevUser",
        RawValue::Category(classify_prev_user(pc, store.bots()).map(|p| p.as_str().to_string())),
    );

    let mut tags: Vec<&str> = meta.tags.iter().map(String::as_str).collect();
    tags.sort_unstable();
    tags.dedup();
    num(
        &mut out,
        "tags",
        RawValue::Category((!tags.is_empty()).then(|| tags.join("|"))),
    );
    for tag in store.tag_vocabulary() {
        out.push((
            format!("{TAG_SLOT_PREFIX}{tag}").into(),
            RawValue::flag(meta.tags.contains(tag)),
        ));
    }
    out
}

/// Replaces categories with codes from a frozen store.
pub fn encode_frozen(
    raw: &RawFeatures,
    store: &StateStore,
) -> Result<Vec<(Cow<'static, str>, Option<f64>)>, ContextError> {
    raw.iter()
        .map(|(name, value)| {
            let v = match value {
                RawValue::Number(n) => *n,
                RawValue::Category(c) => code_to_value(store.code(name, c.as_deref())?),
            };
            Ok((name.clone(), v))
        })
        .collect()
}

/// Records every category in `raw`, assigning codes to new values.
pub fn observe_categories(raw: &RawFeatures, store: &mut StateStore) -> Result<(), ContextError> {
    for (name, value) in raw {
        if let RawValue::Category(c) = value {
            store.encode_categorical(name, c.as_deref())?;
        }
    }
    Ok(())
}

fn code_to_value(code: i64) -> Option<f64> {
    (code >= 0).then_some(code as f64)
}
