//! Decomposition of auto-generated edit summaries.
//!
//! Wikibase writes summaries of the form
//! `/* action-subaction:p1|p2|... */ tail`. The structured prefix is split
//! off; anything that does not fit the grammar is kept whole as the tail.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::net::IpAddr;

/// Site-link suffixes recognised after a language prefix (`eswiki`, `enwikiquote`).
pub const DEFAULT_SITE_SUFFIXES: [&str; 8] = [
    "wiki",
    "wikibooks",
    "wikinews",
    "wikiquote",
    "wikisource",
    "wikiversity",
    "wikivoyage",
    "wiktionary",
];

const REVERT_ACTIONS: [&str; 3] = ["undo", "restore", "rollback"];
const REVERT_TAIL_PREFIXES: [&str; 5] = ["undo", "undid", "reverted", "restored", "rollback"];

const CLAIM_ACTIONS: [&str; 9] = [
    "wbsetclaim",
    "wbcreateclaim",
    "wbremoveclaims",
    "wbsetclaimvalue",
    "wbsetqualifier",
    "wbremovequalifiers",
    "wbsetreference",
    "wbremovereferences",
    "wbsetstatementrank",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedComment {
    pub action: Option<String>,
    pub subaction: Option<String>,
    pub params: Vec<String>,
    pub tail: String,
    pub lang: Option<String>,
    pub lang_locale: Option<String>,
    pub affected_property: Option<String>,
    pub change_count: Option<u64>,
}

impl ParsedComment {
    /// Rebuilds the summary text this comment was parsed from (modulo the
    /// optional space before the tail).
    pub fn to_comment_string(&self) -> String {
        let Some(action) = &self.action else {
            return self.tail.clone();
        };
        let mut out = String::from("/* ");
        out.push_str(action);
        if let Some(sub) = &self.subaction {
            out.push('-');
            out.push_str(sub);
        }
        if !self.params.is_empty() {
            out.push(':');
            out.push_str(&self.params.join("|"));
        }
        out.push_str(" */");
        if !self.tail.is_empty() {
            out.push(' ');
            out.push_str(&self.tail);
        }
        out
    }

    pub fn is_revert(&self) -> bool {
        match self.action.as_deref() {
            Some(a) => REVERT_ACTIONS.contains(&a),
            None => {
                let lower = self.tail.trim_start().to_lowercase();
                REVERT_TAIL_PREFIXES.iter().any(|p| lower.starts_with(p))
            }
        }
    }

    pub fn is_claim_edit(&self) -> bool {
        self.action
            .as_deref()
            .is_some_and(|a| CLAIM_ACTIONS.contains(&a))
    }
}

/// Options for deriving language fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentConfig {
    /// Longest suffixes are tried first.
    site_suffixes: Vec<String>,
}

impl CommentConfig {
    pub fn new<I, S>(suffixes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut site_suffixes: Vec<String> = suffixes.into_iter().map(Into::into).collect();
        site_suffixes.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        site_suffixes.dedup();
        CommentConfig { site_suffixes }
    }

    pub fn site_suffixes(&self) -> &[String] {
        &self.site_suffixes
    }
}

impl Default for CommentConfig {
    fn default() -> Self {
        CommentConfig::new(DEFAULT_SITE_SUFFIXES)
    }
}

/// Parses a summary with the default site-suffix set.
pub fn parse_comment(comment: &str) -> ParsedComment {
    parse_comment_with(comment, &CommentConfig::default())
}

/// Splits the structured prefix and fills in every derived field.
pub fn parse_comment_with(comment: &str, config: &CommentConfig) -> ParsedComment {
    let mut pc = split_structure(comment);
    let (lang, locale, affected) = derive_language_fields(&pc, config);
    pc.lang = lang;
    pc.lang_locale = locale;
    pc.affected_property = affected;
    pc.change_count = extract_change_count(&pc);
    pc
}

/// Grammar-only split: action, subaction, params and tail. Derived fields
/// are left empty.
pub fn split_structure(comment: &str) -> ParsedComment {
    try_split(comment).unwrap_or_else(|| ParsedComment {
        tail: comment.to_string(),
        ..Default::default()
    })
}

fn try_split(comment: &str) -> Option<ParsedComment> {
    let rest = comment.strip_prefix("/* ")?;
    let end = rest.find(" */")?;
    let head = &rest[..end];
    let after = &rest[end + 3..];
    let tail = after.strip_prefix(' ').unwrap_or(after);

    let (name, params) = match head.split_once(':') {
        Some((name, params)) => (name, params.split('|').map(String::from).collect()),
        None => (head, Vec::new()),
    };
    let (action, subaction) = match name.split_once('-') {
        Some((a, s)) => (a, Some(s)),
        None => (name, None),
    };
    if action.is_empty()
        || !action
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
    {
        return None;
    }
    if subaction.is_some_and(|s| s.chars().any(char::is_whitespace)) {
        return None;
    }
    Some(ParsedComment {
        action: Some(action.to_string()),
        subaction: subaction.map(String::from),
        params,
        tail: tail.to_string(),
        ..Default::default()
    })
}

/// Returns `(lang, langLocale, affectedProperty)`.
pub fn derive_language_fields(
    pc: &ParsedComment,
    config: &CommentConfig,
) -> (Option<String>, Option<String>, Option<String>) {
    let mut affected = match pc.action.as_deref() {
        Some("wbsetlabel") => Some("label".to_string()),
        Some("wbsetdescription") => Some("description".to_string()),
        Some("wbsetaliases") => Some("alias".to_string()),
        _ => None,
    };
    let mut lang = None;
    let mut locale = None;

    if pc.action.is_some() && !pc.is_revert() {
        for param in &pc.params {
            if param.is_empty() || param.bytes().all(|b| b.is_ascii_digit()) {
                continue;
            }
            let lower = param.to_ascii_lowercase();
            if let Some((l, loc, site)) = split_site_code(&lower, config) {
                lang = Some(l);
                locale = loc;
                if affected.is_none() {
                    affected = Some(site);
                }
                break;
            }
            if let Some((l, loc)) = split_language_code(&lower) {
                lang = Some(l);
                locale = loc;
                break;
            }
        }
    }

    if affected.is_none() {
        affected = pc.params.iter().find(|p| is_property_id(p)).cloned();
    }
    if affected.is_none() && pc.is_claim_edit() {
        affected = property_in_tail(&pc.tail);
    }
    (lang, locale, affected)
}

/// First parameter that is a plain decimal integer.
pub fn extract_change_count(pc: &ParsedComment) -> Option<u64> {
    pc.params
        .iter()
        .find(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|p| p.parse().ok())
}

fn is_lang_token(s: &str, min: usize, max: usize) -> bool {
    (min..=max).contains(&s.len()) && s.bytes().all(|b| b.is_ascii_lowercase())
}

fn split_language_code(code: &str) -> Option<(String, Option<String>)> {
    if is_lang_token(code, 2, 3) {
        return Some((code.to_string(), None));
    }
    let (lang, locale) = code.split_once(['_', '-'])?;
    let locale_ok = (2..=8).contains(&locale.len())
        && locale
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit());
    if is_lang_token(lang, 2, 3) && locale_ok {
        Some((lang.to_string(), Some(locale.to_string())))
    } else {
        None
    }
}

fn split_site_code(code: &str, config: &CommentConfig) -> Option<(String, Option<String>, String)> {
    for suffix in config.site_suffixes() {
        let Some(prefix) = code.strip_suffix(suffix.as_str()) else {
            continue;
        };
        if prefix.is_empty() {
            continue;
        }
        let (lang, locale) = match prefix.split_once('_') {
            Some((l, rest)) => (l, Some(rest)),
            None => (prefix, None),
        };
        if !is_lang_token(lang, 2, 12) {
            continue;
        }
        let locale = locale
            .filter(|l| !l.is_empty() && l.bytes().all(|b| b.is_ascii_lowercase() || b == b'_'))
            .map(String::from);
        return Some((lang.to_string(), locale, suffix.clone()));
    }
    None
}

fn is_property_id(s: &str) -> bool {
    s.len() > 1 && s.starts_with('P') && s[1..].bytes().all(|b| b.is_ascii_digit())
}

fn property_in_tail(tail: &str) -> Option<String> {
    let start = tail.find("Property:P")? + "Property:".len();
    let digits = tail[start + 1..]
        .bytes()
        .take_while(u8::is_ascii_digit)
        .count();
    (digits > 0).then(|| tail[start..start + 1 + digits].to_string())
}

/// Kind of user whose edit a revert undid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PrevUser {
    Registered,
    Anonymous,
    Bot,
}

impl PrevUser {
    pub fn as_str(self) -> &'static str {
        match self {
            PrevUser::Registered => "registered",
            PrevUser::Anonymous => "anonymous",
            PrevUser::Bot => "bot",
        }
    }
}

/// A user is a bot if listed by name, or if the name ends in "bot"
/// ignoring case.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BotRule {
    names: BTreeSet<String>,
}

impl BotRule {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        BotRule {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn names(&self) -> &BTreeSet<String> {
        &self.names
    }

    pub fn is_bot(&self, user_name: &str) -> bool {
        if self.names.contains(user_name) {
            return true;
        }
        let n = user_name.len();
        n >= 3
            && user_name.is_char_boundary(n - 3)
            && user_name[n - 3..].eq_ignore_ascii_case("bot")
    }
}

/// For undo/restore/rollback comments, classifies the user whose edit was
/// reverted. Other comments yield `None`.
pub fn classify_prev_user(pc: &ParsedComment, bots: &BotRule) -> Option<PrevUser> {
    if !pc.is_revert() {
        return None;
    }
    let name = referenced_user(pc)?;
    Some(if name.parse::<IpAddr>().is_ok() {
        PrevUser::Anonymous
    } else if bots.is_bot(name) {
        PrevUser::Bot
    } else {
        PrevUser::Registered
    })
}

fn referenced_user(pc: &ParsedComment) -> Option<&str> {
    // `/* undo:0||<revid>|<user> */`
    if let Some(p) = pc
        .params
        .iter()
        .skip(1)
        .rev()
        .find(|p| !p.is_empty() && !p.bytes().all(|b| b.is_ascii_digit()))
    {
        return Some(p.trim());
    }
    for marker in ["Special:Contributions/", "[[User:"] {
        if let Some(at) = pc.tail.find(marker) {
            let rest = &pc.tail[at + marker.len()..];
            let end = rest.find(['|', ']']).unwrap_or(rest.len());
            let name = rest[..end].trim();
            if !name.is_empty() {
                return Some(name);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn s(v: &str) -> Option<String> {
        Some(v.to_string())
    }

    #[test]
    fn splits_label_comment() {
        let pc = parse_comment("/* wbsetlabel-set:1|en */ Douglas Adams");
        assert_eq!(pc.action, s("wbsetlabel"));
        assert_eq!(pc.subaction, s("set"));
        assert_eq!(pc.params, vec!["1", "en"]);
        assert_eq!(pc.tail, "Douglas Adams");
        assert_eq!(pc.lang, s("en"));
        assert_eq!(pc.affected_property, s("label"));
        assert_eq!(pc.change_count, Some(1));
    }

    #[test]
    fn free_text_is_all_tail() {
        let pc = parse_comment("plain free-text comment");
        assert_eq!(pc.action, None);
        assert!(pc.params.is_empty());
        assert_eq!(pc.tail, "plain free-text comment");
    }

    #[test]
    fn creation_has_empty_tail() {
        let pc = parse_comment("/* wbeditentity-create:0| */");
        assert_eq!(pc.action, s("wbeditentity"));
        assert_eq!(pc.subaction, s("create"));
        assert_eq!(pc.params, vec!["0", ""]);
        assert_eq!(pc.tail, "");
    }

    #[test]
    fn malformed_prefix_falls_back() {
        for c in [
            "/* */ x",
            "/*wbsetlabel-set */",
            "/* section title */ text",
            "/* a:1",
        ] {
            let pc = parse_comment(c);
            assert_eq!(pc.action, None, "{c}");
            assert_eq!(pc.tail, c);
        }
    }

    #[test]
    fn locale_suffix_is_split() {
        let pc = parse_comment("/* wbsetlabel-add:1|en_us */ Color");
        assert_eq!(pc.lang, s("en"));
        assert_eq!(pc.lang_locale, s("us"));
        let pc = parse_comment("/* wbsetdescription-set:1|zh-hans */ x");
        assert_eq!(pc.lang, s("zh"));
        assert_eq!(pc.lang_locale, s("hans"));
        assert_eq!(pc.affected_property, s("description"));
    }

    #[test]
    fn sitelink_code_gives_lang_and_site() {
        let pc = parse_comment("/* wbsetsitelink-add:1|eswiki */ Douglas Adams");
        assert_eq!(pc.lang, s("es"));
        assert_eq!(pc.lang_locale, None);
        assert_eq!(pc.affected_property, s("wiki"));
        let pc = parse_comment("/* wbsetsitelink-add:1|enwikiquote */ Douglas Adams");
        assert_eq!(pc.lang, s("en"));
        assert_eq!(pc.affected_property, s("wikiquote"));
    }

    #[test]
    fn claim_property_from_param_or_tail() {
        let pc = parse_comment("/* wbsetclaim-update:2||1|P31 */ x");
        assert_eq!(pc.affected_property, s("P31"));
        let pc = parse_comment("/* wbsetclaim-create:2||1 */ [[Property:P569]]: 1952");
        assert_eq!(pc.affected_property, s("P569"));
        assert_eq!(pc.lang, None);
    }

    #[test]
    fn change_count_is_first_integer() {
        let mut pc = ParsedComment {
            params: vec!["2".into(), "en".into()],
            ..Default::default()
        };
        assert_eq!(extract_change_count(&pc), Some(2));
        pc.params = vec!["en".into()];
        assert_eq!(extract_change_count(&pc), None);
        pc.params.clear();
        assert_eq!(extract_change_count(&pc), None);
    }

    #[test]
    fn prev_user_classification() {
        let bots = BotRule::default();
        let pc = parse_comment("Undo revision 99 by [[Special:Contributions/1.2.3.4|1.2.3.4]]");
        assert_eq!(classify_prev_user(&pc, &bots), Some(PrevUser::Anonymous));
        let pc = parse_comment("/* undo:0||99|SuchABot */");
        assert_eq!(classify_prev_user(&pc, &bots), Some(PrevUser::Bot));
        let pc = parse_comment("/* undo:0||99|2001:db8::1 */");
        assert_eq!(classify_prev_user(&pc, &bots), Some(PrevUser::Anonymous));
        let pc = parse_comment(
            "Reverted edits by [[Special:Contributions/Alice|Alice]] ([[User talk:Alice|talk]]) to last revision by [[User:Bob|Bob]]",
        );
        assert_eq!(classify_prev_user(&pc, &bots), Some(PrevUser::Registered));
        let listed = BotRule::new(["Harvester"]);
        let pc = parse_comment("/* restore:0||12|Harvester */");
        assert_eq!(classify_prev_user(&pc, &listed), Some(PrevUser::Bot));
        let pc = parse_comment("/* wbsetlabel-set:1|en */ x");
        assert_eq!(classify_prev_user(&pc, &bots), None);
    }

    #[test]
    fn undo_params_do_not_set_lang() {
        let pc = parse_comment("/* undo:0||99|bob */");
        assert_eq!(pc.lang, None);
    }

    fn structured() -> impl Strategy<Value = ParsedComment> {
        (
            "[a-z]{1,12}",
            proptest::option::of("[a-z]{0,8}"),
            proptest::collection::vec("[a-zA-Z0-9_.:-]{0,6}", 0..4),
            "[^\u{0}]{0,20}",
        )
            .prop_map(|(action, subaction, params, tail)| ParsedComment {
                action: Some(action),
                subaction,
                params,
                tail,
                ..Default::default()
            })
    }

    proptest! {
        #[test]
        fn reconstruct_then_parse_is_identity(pc in structured()) {
            let text = pc.to_comment_string();
            let reparsed = split_structure(&text);
            prop_assert_eq!(reparsed.action, pc.action);
            prop_assert_eq!(reparsed.subaction, pc.subaction);
            prop_assert_eq!(reparsed.params, pc.params);
            prop_assert_eq!(reparsed.tail, pc.tail);
        }

        #[test]
        fn unstructured_tail_is_fixed_point(text in "[^/]{0,30}") {
            let pc = parse_comment(&text);
            prop_assert_eq!(&pc.tail, &text);
            let again = parse_comment(&pc.tail);
            prop_assert_eq!(again, pc);
        }

        #[test]
        fn derived_fields_have_expected_shape(text in "/\\* [a-z]{1,14}(-[a-z]{1,6})?(:[a-zA-Z0-9_|-]{0,20})? \\*/ .{0,20}") {
            let pc = parse_comment(&text);
            if let Some(lang) = &pc.lang {
                prop_assert!((2..=12).contains(&lang.len()));
                prop_assert!(lang.bytes().all(|b| b.is_ascii_lowercase()));
            }
            if let Some(p) = &pc.affected_property {
                if p.starts_with('P') {
                    prop_assert!(is_property_id(p));
                }
            }
        }
    }
}
