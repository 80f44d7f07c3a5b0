//! Seeded generator of labelled revision corpora.
//!
//! Edits come in sessions (one user, one item, consecutive edits) with
//! geometric lengths. Vandal sessions are rare, come mostly from anonymous
//! users and fresh accounts, favour descriptions and labels of popular
//! items, and each of their revisions independently shows overt damage
//! (offensive words, shouting, keyboard mash, wrong-language text, spam
//! links, blanking) or passes for an ordinary edit. Sessions that create
//! an entity are never vandalism.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use thiserror::Error;
use vandalscore_core::split::midnight;
use vandalscore_core::{Contributor, Geo, RawRevision, RevisionMetadata, TruthLabel};

use crate::ingest::{write_metadata_csv, write_revision_xml, write_truth_csv};
use crate::resources::{entries, samples, BAD_WORDS, LANGUAGE_SAMPLES};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    pub seed: u64,
    /// Expected share of vandalised revisions. The default of 1% is well
    /// above real rates so that small corpora hold enough positives.
    pub vandalism_rate: f64,
    /// Unix seconds; sessions start uniformly in `[start, end)`.
    pub start: i64,
    pub end: i64,
    pub mean_vandal_session: f64,
    pub mean_benign_session: f64,
    /// Share of benign sessions that begin by creating an item.
    pub creation_rate: f64,
    /// Chance that a vandal revision shows overt damage.
    pub overt_rate: f64,
    pub items: u64,
    pub registered_users: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: 10_000,
            seed: 1,
            vandalism_rate: 0.01,
            start: midnight(2015, 3, 1).expect("valid date"),
            end: midnight(2016, 7, 1).expect("valid date"),
            mean_vandal_session: 4.0,
            mean_benign_session: 2.5,
            creation_rate: 0.06,
            overt_rate: 0.4,
            items: 20_000,
            registered_users: 4_000,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::BadConfig(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.vandalism_rate) {
            return bad(format!(
                "vandalism rate {} outside [0, 1]",
                self.vandalism_rate
            ));
        }
        for (name, p) in [
            ("creation rate", self.creation_rate),
            ("overt rate", self.overt_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if self.mean_vandal_session < 1.0 || self.mean_benign_session < 1.0 {
            return bad("mean session lengths must be at least 1".into());
        }
        if self.start >= self.end {
            return bad("start must precede end".into());
        }
        if self.items < 10 || self.registered_users < 10 {
            return bad("need at least 10 items and 10 registered users".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub revisions: Vec<RawRevision>,
    pub metas: Vec<RevisionMetadata>,
    pub truth: Vec<TruthLabel>,
    pub privileged: Vec<String>,
    pub bots: Vec<String>,
}

pub const REVISIONS_FILE: &str = "revisions.xml";
pub const META_FILE: &str = "meta.csv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const PRIVILEGED_FILE: &str = "privileged.txt";
pub const BOTS_FILE: &str = "bots.txt";

impl SynthCorpus {
    pub fn revisions_xml(&self) -> String {
        let mut out = String::from("<mediawiki>\n");
        for r in &self.revisions {
            out.push_str(&write_revision_xml(r));
            out.push('\n');
        }
        out.push_str("</mediawiki>\n");
        out
    }

    pub fn write_to_dir(&self, dir: &Path) -> Result<(), SynthError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(REVISIONS_FILE), self.revisions_xml())?;
        fs::write(dir.join(META_FILE), write_metadata_csv(&self.metas))?;
        fs::write(dir.join(TRUTH_FILE), write_truth_csv(&self.truth))?;
        fs::write(dir.join(PRIVILEGED_FILE), lines(&self.privileged))?;
        fs::write(dir.join(BOTS_FILE), lines(&self.bots))?;
        Ok(())
    }
}

fn lines(items: &[String]) -> String {
    items.iter().map(|s| format!("{s}\n")).collect()
}

const LANGS: [&str; 15] = [
    "en", "de", "fr", "es", "it", "pt", "nl", "sv", "pl", "ru", "ja", "zh", "tr", "id", "fi",
];
const LANG_WEIGHTS: [u32; 15] = [40, 12, 10, 8, 5, 4, 4, 3, 3, 4, 2, 2, 1, 1, 1];

const FIRST: [&str; 24] = [
    "Anna", "Marta", "John", "Pierre", "Hans", "Luca", "Sofia", "Ivan", "Yuki", "Chen", "Ahmed",
    "Maria", "Carlos", "Eva", "Lars", "Olga", "Peter", "Aiko", "Jan", "Elena", "Tomas", "Nina",
    "Karl", "Rosa",
];
const LAST: [&str; 24] = [
    "Kowalski",
    "Schmidt",
    "Dubois",
    "Rossi",
    "Garcia",
    "Silva",
    "Jansen",
    "Andersson",
    "Ivanov",
    "Tanaka",
    "Wang",
    "Yilmaz",
    "Smith",
    "Brown",
    "Novak",
    "Virtanen",
    "Moreau",
    "Bianchi",
    "Santos",
    "Berg",
    "Horvat",
    "Weber",
    "Lopez",
    "Fischer",
];
const SYLLABLES: [&str; 16] = [
    "bren", "ford", "ka", "lin", "mor", "ton", "vel", "ster", "ari", "wick", "dal", "en", "ham",
    "or", "sel", "burg",
];
/// `(class id, share)` for the `P31` of generated items.
const CLASSES: [(u64, u32); 6] = [
    (5, 45),
    (515, 15),
    (16521, 15),
    (11424, 10),
    (532, 10),
    (4022, 5),
];
const CLAIM_PROPS: [&str; 10] = [
    "P569", "P570", "P27", "P106", "P17", "P131", "P625", "P18", "P856", "P214",
];
const MASH: &[u8] = b"asdfghjklqwertyuiopzxcvbnm";

#[derive(Debug, Clone, Copy)]
struct Place {
    continent: &'static str,
    country: &'static str,
    region: &'static str,
    county: &'static str,
    city: &'static str,
    timezone: &'static str,
    lang: &'static str,
    benign: u32,
    vandal: u32,
}

const fn place(
    c: (
        &'static str,
        &'static str,
        &'static str,
        &'static str,
        &'static str,
        &'static str,
    ),
    lang: &'static str,
    benign: u32,
    vandal: u32,
) -> Place {
    Place {
        continent: c.0,
        country: c.1,
        region: c.2,
        county: c.3,
        city: c.4,
        timezone: c.5,
        lang,
        benign,
        vandal,
    }
}

const PLACES: [Place; 18] = [
    place(
        (
            "NA",
            "US",
            "California",
            "Los Angeles County",
            "Los Angeles",
            "America/Los_Angeles",
        ),
        "en",
        6,
        14,
    ),
    place(
        (
            "NA",
            "US",
            "Texas",
            "Harris County",
            "Houston",
            "America/Chicago",
        ),
        "en",
        4,
        10,
    ),
    place(
        (
            "NA",
            "US",
            "New York",
            "Kings County",
            "Brooklyn",
            "America/New_York",
        ),
        "en",
        6,
        8,
    ),
    place(
        (
            "EU",
            "GB",
            "England",
            "Greater London",
            "London",
            "Europe/London",
        ),
        "en",
        8,
        10,
    ),
    place(
        (
            "OC",
            "AU",
            "New South Wales",
            "",
            "Sydney",
            "Australia/Sydney",
        ),
        "en",
        3,
        6,
    ),
    place(
        ("AS", "IN", "Maharashtra", "", "Mumbai", "Asia/Kolkata"),
        "en",
        4,
        14,
    ),
    place(
        ("EU", "DE", "Bavaria", "", "Munich", "Europe/Berlin"),
        "de",
        12,
        3,
    ),
    place(
        ("EU", "FR", "Ile-de-France", "", "Paris", "Europe/Paris"),
        "fr",
        10,
        3,
    ),
    place(
        ("EU", "ES", "Madrid", "", "Madrid", "Europe/Madrid"),
        "es",
        6,
        3,
    ),
    place(("EU", "IT", "Lazio", "", "Rome", "Europe/Rome"), "it", 5, 2),
    place(
        (
            "SA",
            "BR",
            "Sao Paulo",
            "",
            "Sao Paulo",
            "America/Sao_Paulo",
        ),
        "pt",
        4,
        8,
    ),
    place(
        (
            "EU",
            "NL",
            "North Holland",
            "",
            "Amsterdam",
            "Europe/Amsterdam",
        ),
        "nl",
        5,
        1,
    ),
    place(
        ("EU", "SE", "Stockholm", "", "Stockholm", "Europe/Stockholm"),
        "sv",
        4,
        1,
    ),
    place(
        ("EU", "PL", "Masovia", "", "Warsaw", "Europe/Warsaw"),
        "pl",
        4,
        2,
    ),
    place(
        ("EU", "RU", "Moscow", "", "Moscow", "Europe/Moscow"),
        "ru",
        5,
        4,
    ),
    place(("AS", "JP", "Tokyo", "", "Tokyo", "Asia/Tokyo"), "ja", 3, 1),
    place(
        ("AS", "ID", "Jakarta", "", "Jakarta", "Asia/Jakarta"),
        "id",
        2,
        6,
    ),
    place(
        ("AS", "TR", "Istanbul", "", "Istanbul", "Europe/Istanbul"),
        "tr",
        2,
        4,
    ),
];

impl Place {
    fn geo(&self) -> Geo {
        let o = |s: &str| (!s.is_empty()).then(|| s.to_string());
        Geo {
            continent: o(self.continent),
            country: o(self.country),
            region: o(self.region),
            county: o(self.county),
            city: o(self.city),
            timezone: o(self.timezone),
        }
    }
}

#[derive(Debug, Clone)]
enum Editor {
    Registered {
        id: u64,
        name: String,
        lang: &'static str,
    },
    Anonymous {
        ip: String,
        place: usize,
    },
}

impl Editor {
    fn lang(&self) -> &'static str {
        match self {
            Editor::Registered { lang, .. } => lang,
            Editor::Anonymous { place, .. } => PLACES[*place].lang,
        }
    }

    fn contributor(&self) -> Contributor {
        match self {
            Editor::Registered { id, name, .. } => Contributor::Registered {
                user_id: *id,
                user_name: name.clone(),
            },
            Editor::Anonymous { ip, .. } => Contributor::Anonymous {
                ip_address: ip.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Regular,
    Privileged,
    Bot,
    Fresh,
    Anonymous,
}

#[derive(Debug, Clone, Copy)]
enum Term {
    Label,
    Description,
    Alias,
    Sitelink,
}

#[derive(Debug, Clone, Default)]
struct Item {
    labels: Map<String, Value>,
    descriptions: Map<String, Value>,
    aliases: Map<String, Value>,
    sitelinks: Map<String, Value>,
    claims: Map<String, Value>,
}

impl Item {
    fn json(&self, id: &str) -> String {
        json!({
            "type": "item",
            "id": id,
            "labels": self.labels,
            "descriptions": self.descriptions,
            "aliases": self.aliases,
            "claims": self.claims,
            "sitelinks": self.sitelinks,
        })
        .to_string()
    }

    fn set_label(&mut self, lang: &str, text: &str) {
        self.labels
            .insert(lang.into(), json!({"language": lang, "value": text}));
    }

    fn set_description(&mut self, lang: &str, text: &str) {
        self.descriptions
            .insert(lang.into(), json!({"language": lang, "value": text}));
    }

    fn add_alias(&mut self, lang: &str, text: &str) {
        let list = self
            .aliases
            .entry(lang.to_string())
            .or_insert_with(|| Value::Array(Vec::new()));
        if let Value::Array(a) = list {
            a.push(json!({"language": lang, "value": text}));
        }
    }

    fn set_sitelink(&mut self, site: &str, title: &str) {
        self.sitelinks
            .insert(site.into(), json!({"site": site, "title": title}));
    }

    fn add_claim(&mut self, prop: &str, value: Value) {
        let snak = json!({
            "mainsnak": {"snaktype": "value", "property": prop, "datavalue": {"value": value}},
            "type": "statement",
            "rank": "normal"
        });
        let list = self
            .claims
            .entry(prop.to_string())
            .or_insert_with(|| Value::Array(Vec::new()));
        if let Value::Array(a) = list {
            a.push(snak);
        }
    }

    /// Applies a term edit and returns its comment, with `add` for a new
    /// term and `set` for a changed one.
    fn term_edit(&mut self, term: Term, lang: &str, text: &str) -> String {
        let (action, key, exists) = match term {
            Term::Label => (
                "wbsetlabel",
                lang.to_string(),
                self.labels.contains_key(lang),
            ),
            Term::Description => (
                "wbsetdescription",
                lang.to_string(),
                self.descriptions.contains_key(lang),
            ),
            Term::Alias => ("wbsetaliases", lang.to_string(), false),
            Term::Sitelink => {
                let site = format!("{lang}wiki");
                let exists = self.sitelinks.contains_key(&site);
                ("wbsetsitelink", site, exists)
            }
        };
        match term {
            Term::Label => self.set_label(lang, text),
            Term::Description => self.set_description(lang, text),
            Term::Alias => self.add_alias(lang, text),
            Term::Sitelink => self.set_sitelink(&key, text),
        }
        let sub = if exists { "set" } else { "add" };
        format!("/* {action}-{sub}:1|{key} */ {text}")
    }

    fn label(&self, lang: &str) -> Option<&str> {
        self.labels.get(lang)?.get("value")?.as_str()
    }
}

struct Vocab {
    words: HashMap<&'static str, Vec<String>>,
    bad: Vec<&'static str>,
}

impl Vocab {
    fn new() -> Vocab {
        let mut words: HashMap<&'static str, Vec<String>> = HashMap::new();
        for (lang, text) in samples(LANGUAGE_SAMPLES) {
            let list = words.entry(lang).or_default();
            if matches!(lang, "ja" | "zh") {
                let chars: Vec<char> = text.chars().filter(|c| c.is_alphabetic()).collect();
                list.extend(chars.chunks(3).map(|c| c.iter().collect::<String>()));
            } else {
                list.extend(
                    text.split_whitespace()
                        .map(|w| {
                            w.trim_matches(|c: char| !c.is_alphanumeric())
                                .to_lowercase()
                        })
                        .filter(|w| w.chars().count() > 2),
                );
            }
        }
        Vocab {
            words,
            bad: entries(BAD_WORDS).collect(),
        }
    }

    fn phrase(&self, rng: &mut ChaCha8Rng, lang: &str, min: usize, max: usize) -> String {
        let list = &self.words[lang];
        let n = rng.gen_range(min..=max);
        let sep = if matches!(lang, "ja" | "zh") { "" } else { " " };
        (0..n)
            .map(|_| list.choose(rng).expect("non-empty vocabulary").as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }
}

struct Generator {
    cfg: SynthConfig,
    rng: ChaCha8Rng,
    vocab: Vocab,
    items: HashMap<u64, Item>,
    next_item: u64,
    regular: Vec<Editor>,
    privileged: Vec<Editor>,
    bots: Vec<Editor>,
    next_fresh: u64,
    lang_pick: WeightedIndex<u32>,
    benign_place: WeightedIndex<u32>,
    vandal_place: WeightedIndex<u32>,
    class_pick: WeightedIndex<u32>,
}

struct Draft {
    ts: i64,
    seq: u64,
    item: u64,
    editor: usize,
    comment: String,
    entity: String,
    minor: bool,
    session: u64,
    geo: Option<Geo>,
    tags: Vec<String>,
    vandal: bool,
}

fn geometric(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    let p_more = 1.0 - 1.0 / mean;
    let mut n = 1;
    while n < 60 && rng.gen_bool(p_more) {
        n += 1;
    }
    n
}

impl Generator {
    fn new(cfg: SynthConfig) -> Generator {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let lang_pick = WeightedIndex::new(LANG_WEIGHTS).expect("positive weights");
        let user = |rng: &mut ChaCha8Rng, id: u64, name: String| Editor::Registered {
            id,
            name,
            lang: LANGS[lang_pick.sample(rng)],
        };
        let regular = (0..cfg.registered_users)
            .map(|k| {
                user(
                    &mut rng,
                    1000 + k,
                    format!("{}{}", FIRST[(k % 24) as usize], k),
                )
            })
            .collect();
        let privileged = (0..60)
            .map(|k| {
                user(
                    &mut rng,
                    100 + k,
                    format!("Admin{}", LAST[(k % 24) as usize]) + &k.to_string(),
                )
            })
            .collect();
        let bots = (0..30)
            .map(|k| {
                user(
                    &mut rng,
                    500 + k,
                    format!("{}{k}Bot", LAST[(k % 24) as usize]),
                )
            })
            .collect();
        Generator {
            next_item: cfg.items + 1,
            rng,
            vocab: Vocab::new(),
            items: HashMap::new(),
            regular,
            privileged,
            bots,
            next_fresh: 5_000_000,
            lang_pick: WeightedIndex::new(LANG_WEIGHTS).expect("positive weights"),
            benign_place: WeightedIndex::new(PLACES.map(|p| p.benign)).expect("positive weights"),
            vandal_place: WeightedIndex::new(PLACES.map(|p| p.vandal)).expect("positive weights"),
            class_pick: WeightedIndex::new(CLASSES.map(|c| c.1)).expect("positive weights"),
            cfg,
        }
    }

    fn name(&mut self, class: u64) -> String {
        let r = &mut self.rng;
        match class {
            5 => format!("{} {}", FIRST.choose(r).unwrap(), LAST.choose(r).unwrap()),
            16521 => {
                let g: String = (0..2).map(|_| *SYLLABLES.choose(r).unwrap()).collect();
                let s: String = (0..2).map(|_| *SYLLABLES.choose(r).unwrap()).collect();
                format!("{}{} {s}a", g[..1].to_uppercase(), &g[1..])
            }
            _ => {
                let s: String = (0..rng_len(r))
                    .map(|_| *SYLLABLES.choose(r).unwrap())
                    .collect();
                format!("{}{}", s[..1].to_uppercase(), &s[1..])
            }
        }
    }

    fn fresh_item(&mut self) -> Item {
        let class = CLASSES[self.class_pick.sample(&mut self.rng)].0;
        let label = self.name(class);
        let mut item = Item::default();
        item.set_label("en", &label);
        item.set_sitelink("enwiki", &label);
        let extra = self.rng.gen_range(0..4);
        for _ in 0..extra {
            let lang = LANGS[self.lang_pick.sample(&mut self.rng)];
            item.set_label(lang, &label);
            item.set_sitelink(&format!("{lang}wiki"), &label);
        }
        let desc = self.vocab.phrase(&mut self.rng, "en", 2, 5);
        item.set_description("en", &desc);
        item.add_claim(
            "P31",
            json!({"entity-type": "item", "numeric-id": class, "id": format!("Q{class}")}),
        );
        for _ in 0..self.rng.gen_range(0..6) {
            let p = CLAIM_PROPS.choose(&mut self.rng).unwrap();
            item.add_claim(p, json!(format!("value {}", self.rng.gen_range(0..10_000))));
        }
        item
    }

    fn item(&mut self, id: u64) -> &mut Item {
        if !self.items.contains_key(&id) {
            let item = self.fresh_item();
            self.items.insert(id, item);
        }
        self.items.get_mut(&id).expect("just inserted")
    }

    fn pick_item(&mut self, vandal: bool) -> u64 {
        let n = self.cfg.items as f64;
        // Popular items are the low ids; vandals lean on them harder.
        let skew = if vandal { 3.0 } else { 1.6 };
        let u: f64 = self.rng.gen();
        1 + (n * u.powf(skew)).floor().min(n - 1.0) as u64
    }

    fn editor(&mut self, kind: Kind) -> Editor {
        let r = &mut self.rng;
        match kind {
            Kind::Regular => {
                // A few heavy editors do most regular edits.
                let u: f64 = r.gen();
                let k = ((self.regular.len() as f64) * u.powi(3)) as usize;
                self.regular[k.min(self.regular.len() - 1)].clone()
            }
            Kind::Privileged => self.privileged.choose(r).unwrap().clone(),
            Kind::Bot => self.bots.choose(r).unwrap().clone(),
            Kind::Fresh => {
                self.next_fresh += 1;
                let name = format!(
                    "{}{}{}",
                    SYLLABLES.choose(r).unwrap(),
                    SYLLABLES.choose(r).unwrap(),
                    r.gen_range(10..9999)
                );
                Editor::Registered {
                    id: self.next_fresh,
                    name,
                    lang: LANGS[self.lang_pick.sample(r)],
                }
            }
            Kind::Anonymous => unreachable!("anonymous editors need a place"),
        }
    }

    fn anonymous(&mut self, vandal: bool) -> Editor {
        let place = if vandal {
            self.vandal_place.sample(&mut self.rng)
        } else {
            self.benign_place.sample(&mut self.rng)
        };
        let r = &mut self.rng;
        let ip = if r.gen_bool(0.8) {
            format!(
                "{}.{}.{}.{}",
                r.gen_range(1..224),
                r.gen_range(0..256),
                r.gen_range(0..256),
                r.gen_range(1..255)
            )
        } else {
            format!(
                "2001:db8:{:x}::{:x}",
                r.gen_range(0..0xffff),
                r.gen_range(1..0xffff)
            )
        };
        Editor::Anonymous { ip, place }
    }

    /// Comment, minor flag, and whether the text is careless.
    fn benign_edit(&mut self, item_id: u64, editor: &Editor, kind: Kind) -> (String, bool, bool) {
        let lang = if self.rng.gen_bool(0.7) {
            editor.lang()
        } else {
            LANGS[self.lang_pick.sample(&mut self.rng)]
        };
        let roll: f64 = self.rng.gen();
        if kind == Kind::Bot {
            let minor = self.rng.gen_bool(0.7);
            let prop = *CLAIM_PROPS.choose(&mut self.rng).unwrap();
            let v = self.rng.gen_range(1..100_000);
            let item = self.item(item_id);
            return if roll < 0.5 {
                item.add_claim(prop, json!(format!("Q{v}")));
                (
                    format!("/* wbcreateclaim-create:1| */ [[Property:{prop}]]: [[Q{v}]]"),
                    minor,
                    false,
                )
            } else if roll < 0.8 {
                let label = item.label("en").unwrap_or("Item").to_string();
                item.set_sitelink(&format!("{lang}wiki"), &label);
                (
                    format!("/* wbsetsitelink-add:1|{lang}wiki */ {label}"),
                    minor,
                    false,
                )
            } else {
                item.add_claim("P214", json!(v.to_string()));
                ("/* wbeditentity-update:0| */ ".to_string(), minor, false)
            };
        }
        if kind == Kind::Privileged && roll < 0.25 {
            let victim = if self.rng.gen_bool(0.6) {
                format!("{}.{}.{}.{}", self.rng.gen_range(1..224), 1, 2, 3)
            } else {
                format!("User{}", self.rng.gen_range(0..1000))
            };
            let rev = self.rng.gen_range(200_000_000..400_000_000u64);
            return (format!("/* undo:0||{rev}|{victim} */"), false, false);
        }
        let minor = self.rng.gen_bool(0.05);
        let text_label = {
            let item = self.item(item_id);
            item.sitelinks
                .get(&format!("{lang}wiki"))
                .and_then(|s| s.get("title"))
                .and_then(Value::as_str)
                .or_else(|| item.label("en"))
                .unwrap_or("Item")
                .to_string()
        };
        let sloppy = matches!(kind, Kind::Anonymous | Kind::Fresh) && self.rng.gen_bool(0.12)
            || self.rng.gen_bool(0.02);
        let desc = if sloppy {
            self.sloppy(lang)
        } else {
            self.vocab.phrase(&mut self.rng, lang, 2, 5)
        };
        let label = if sloppy { desc.clone() } else { text_label };
        let prop = *CLAIM_PROPS.choose(&mut self.rng).unwrap();
        let v = self.rng.gen_range(1..100_000);
        let item = self.item(item_id);
        let comment = if roll < 0.22 {
            item.term_edit(Term::Description, lang, &desc)
        } else if roll < 0.40 {
            item.term_edit(Term::Label, lang, &label)
        } else if roll < 0.48 {
            item.term_edit(Term::Alias, lang, &desc)
        } else if roll < 0.56 {
            item.term_edit(Term::Sitelink, lang, &label)
        } else if roll < 0.80 {
            item.add_claim(prop, json!(format!("Q{v}")));
            format!("/* wbcreateclaim-create:1| */ [[Property:{prop}]]: [[Q{v}]]")
        } else if roll < 0.88 {
            item.add_claim("P143", json!("Q328"));
            "/* wbsetreference-add:2| */ [[Property:P143]]: [[Q328]]".to_string()
        } else if roll < 0.94 {
            item.add_claim(prop, json!(v.to_string()));
            format!("/* wbsetclaim-update:2||1 */ [[Property:{prop}]]: {v}")
        } else {
            item.claims.remove(prop);
            format!("/* wbremoveclaims-remove:1| */ [[Property:{prop}]]: {v}")
        };
        (comment, minor, sloppy)
    }

    /// Careless but good-faith text: shouting, another language, a bare
    /// link, or a test edit.
    fn sloppy(&mut self, lang: &str) -> String {
        let r = &mut self.rng;
        match r.gen_range(0..4) {
            0 => self.vocab.phrase(r, lang, 1, 4).to_uppercase(),
            1 => {
                let other = LANGS[self.lang_pick.sample(r)];
                self.vocab.phrase(r, other, 2, 5)
            }
            2 => format!("http://www.{}.org", self.vocab.phrase(r, "en", 1, 1)),
            _ => ["test", "testing", "asdf", "x", "?"]
                .choose(r)
                .unwrap()
                .to_string(),
        }
    }

    fn damage(&mut self, lang: &str) -> String {
        let r = &mut self.rng;
        match r.gen_range(0..6) {
            0 => {
                let bad = &self.vocab.bad;
                let (a, b) = (bad.choose(r).unwrap(), bad.choose(r).unwrap());
                match r.gen_range(0..3) {
                    0 => format!("{} is a {a} {b}", FIRST.choose(r).unwrap()),
                    1 => format!("{a} {b} {a}"),
                    _ => format!("{} {a}", self.vocab.phrase(r, lang, 1, 3)),
                }
            }
            1 => self.vocab.phrase(r, "en", 2, 5).to_uppercase() + "!!!",
            2 => {
                let unit = *["ha", "lol", "xd", "yo"].choose(r).unwrap();
                unit.repeat(r.gen_range(3..8)) + &"!".repeat(r.gen_range(0..5))
            }
            3 => (0..r.gen_range(6..15))
                .map(|_| *MASH.choose(r).unwrap() as char)
                .collect(),
            4 => format!(
                "visit www.{}-{}.com now",
                self.vocab.phrase(r, "en", 1, 1),
                r.gen_range(10..99)
            ),
            _ => {
                let other = if lang == "en" { "de" } else { "en" };
                self.vocab.phrase(r, other, 3, 6)
            }
        }
    }

    fn vandal_edit(&mut self, item_id: u64, editor: &Editor) -> (String, Vec<&'static str>) {
        let lang = if self.rng.gen_bool(0.7) {
            "en"
        } else {
            editor.lang()
        };
        let overt = self.rng.gen_bool(self.cfg.overt_rate);
        let text = if overt {
            self.damage(lang)
        } else {
            self.vocab.phrase(&mut self.rng, lang, 1, 4)
        };
        let mut tags = Vec::new();
        if self.rng.gen_bool(if overt { 0.4 } else { 0.03 }) {
            tags.push("possible vandalism");
        }
        if self.rng.gen_bool(0.4) {
            tags.push("mobile edit");
        }
        let roll: f64 = self.rng.gen();
        let prop = *CLAIM_PROPS.choose(&mut self.rng).unwrap();
        let blank = overt && self.rng.gen_bool(0.08);
        let item = self.item(item_id);
        if blank {
            *item = Item::default();
            return ("/* wbeditentity-override:0| */ ".to_string(), tags);
        }
        let comment = if roll < 0.4 {
            item.term_edit(Term::Description, lang, &text)
        } else if roll < 0.65 {
            item.term_edit(Term::Label, lang, &text)
        } else if roll < 0.75 {
            item.term_edit(Term::Alias, lang, &text)
        } else if roll < 0.85 {
            item.term_edit(Term::Sitelink, lang, &text)
        } else {
            item.add_claim(prop, json!(text));
            format!("/* wbsetclaim-update:2||1 */ [[Property:{prop}]]: {text}")
        };
        (comment, tags)
    }

    fn run(mut self) -> SynthCorpus {
        let cfg = self.cfg.clone();
        let (lv, lb) = (cfg.mean_vandal_session, cfg.mean_benign_session);
        let r = cfg.vandalism_rate;
        let p_vandal = if r >= 1.0 {
            1.0
        } else {
            r * lb / (lv * (1.0 - r) + r * lb)
        };

        let mut editors: Vec<Editor> = Vec::new();
        let mut drafts: Vec<Draft> = Vec::with_capacity(cfg.n + 64);
        let mut session = 0u64;
        let mut seq = 0u64;
        while drafts.len() < cfg.n {
            session += 1;
            let vandal = self.rng.gen_bool(p_vandal);
            let kind = if vandal {
                match self.rng.gen_range(0..100) {
                    0..=59 => Kind::Anonymous,
                    60..=89 => Kind::Fresh,
                    _ => Kind::Regular,
                }
            } else {
                match self.rng.gen_range(0..100) {
                    0..=49 => Kind::Regular,
                    50..=57 => Kind::Privileged,
                    58..=72 => Kind::Bot,
                    73..=89 => Kind::Anonymous,
                    _ => Kind::Fresh,
                }
            };
            let editor = match kind {
                Kind::Anonymous => self.anonymous(vandal),
                k => self.editor(k),
            };
            let geo = match &editor {
                Editor::Anonymous { place, .. } => Some(PLACES[*place].geo()),
                Editor::Registered { .. } => None,
            };
            editors.push(editor.clone());
            let editor_idx = editors.len() - 1;

            let creates = !vandal && kind != Kind::Bot && self.rng.gen_bool(cfg.creation_rate);
            let item_id = if creates {
                self.next_item += 1;
                self.next_item
            } else {
                self.pick_item(vandal)
            };
            let len = geometric(&mut self.rng, if vandal { lv } else { lb });
            let mut ts = self.rng.gen_range(cfg.start..cfg.end);
            for k in 0..len {
                let mut tags: Vec<&'static str> = Vec::new();
                let (comment, minor) = if creates && k == 0 {
                    let item = self.fresh_item();
                    self.items.insert(item_id, item);
                    ("/* wbeditentity-create:0| */ ".to_string(), false)
                } else if vandal {
                    let (c, t) = self.vandal_edit(item_id, &editor);
                    tags = t;
                    (c, false)
                } else {
                    let (c, m, sloppy) = self.benign_edit(item_id, &editor, kind);
                    let casual = matches!(kind, Kind::Anonymous | Kind::Fresh);
                    if self.rng.gen_bool(if casual { 0.3 } else { 0.08 }) {
                        tags.push("mobile edit");
                    }
                    if self.rng.gen_bool(if sloppy { 0.25 } else { 0.003 }) {
                        tags.push("possible vandalism");
                    }
                    if kind == Kind::Bot && self.rng.gen_bool(0.5) {
                        tags.push("bot edit");
                    }
                    (c, m)
                };
                let newcomer = matches!(kind, Kind::Anonymous | Kind::Fresh);
                if newcomer && comment.starts_with("/* wbsetdescription") {
                    tags.push("new editor changing description");
                }
                let entity = self.item(item_id).json(&format!("Q{item_id}"));
                seq += 1;
                drafts.push(Draft {
                    ts,
                    seq,
                    item: item_id,
                    editor: editor_idx,
                    comment: comment.trim_end().to_string(),
                    entity,
                    minor,
                    session,
                    geo: geo.clone(),
                    tags: tags.into_iter().map(String::from).collect(),
                    vandal,
                });
                ts += if kind == Kind::Bot {
                    self.rng.gen_range(1..15)
                } else {
                    self.rng.gen_range(10..600)
                };
            }
        }
        drafts.truncate(cfg.n);
        drafts.sort_by_key(|d| (d.ts, d.seq));

        let mut last_of_item: HashMap<u64, u64> = HashMap::new();
        let mut corpus = SynthCorpus {
            revisions: Vec::with_capacity(drafts.len()),
            metas: Vec::with_capacity(drafts.len()),
            truth: Vec::with_capacity(drafts.len()),
            privileged: self.privileged.iter().map(name_of).collect(),
            bots: self.bots.iter().map(name_of).collect(),
        };
        for (i, d) in drafts.into_iter().enumerate() {
            let revision_id = 300_000_000 + i as u64;
            let parent_id = last_of_item.insert(d.item, revision_id);
            corpus.revisions.push(RawRevision {
                revision_id,
                parent_id,
                item_id: format!("Q{}", d.item),
                timestamp: d.ts,
                contributor: editors[d.editor].contributor(),
                comment: d.comment,
                entity_text: d.entity,
                is_minor: d.minor,
            });
            corpus.metas.push(RevisionMetadata {
                revision_id,
                session_id: Some(d.session),
                geo: d.geo,
                tags: d.tags,
            });
            corpus.truth.push(TruthLabel {
                revision_id,
                rollback_reverted: d.vandal,
            });
        }
        corpus
    }
}

fn rng_len(r: &mut ChaCha8Rng) -> usize {
    r.gen_range(2..4)
}

fn name_of(e: &Editor) -> String {
    match e {
        Editor::Registered { name, .. } => name.clone(),
        Editor::Anonymous { ip, .. } => ip.clone(),
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus, SynthError> {
    cfg.validate()?;
    Ok(Generator::new(cfg.clone()).run())
}

impl fmt::Display for SynthConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} seed={} vandalism_rate={} creation_rate={} overt_rate={}",
            self.n, self.seed, self.vandalism_rate, self.creation_rate, self.overt_rate
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            n: 400,
            seed,
            vandalism_rate: 0.05,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate(&small(1)).unwrap();
        let b = generate(&small(1)).unwrap();
        assert_eq!(a.revisions_xml(), b.revisions_xml());
        assert_eq!(a, b);
        assert_ne!(
            generate(&small(2)).unwrap().revisions_xml(),
            a.revisions_xml()
        );
    }

    #[test]
    fn zero_rate_has_no_vandalism() {
        let cfg = SynthConfig {
            vandalism_rate: 0.0,
            ..small(3)
        };
        let c = generate(&cfg).unwrap();
        assert_eq!(c.revisions.len(), 400);
        assert!(c.truth.iter().all(|t| !t.rollback_reverted));
    }

    #[test]
    fn creations_are_never_vandalism() {
        let c = generate(&SynthConfig {
            creation_rate: 0.5,
            vandalism_rate: 0.2,
            ..small(4)
        })
        .unwrap();
        let mut creations = 0;
        for (r, t) in c.revisions.iter().zip(&c.truth) {
            if r.comment.starts_with("/* wbeditentity-create") {
                creations += 1;
                assert!(!t.rollback_reverted);
            }
        }
        assert!(creations > 0);
    }

    #[test]
    fn ordered_and_unique() {
        let c = generate(&small(5)).unwrap();
        for w in c.revisions.windows(2) {
            assert!((w[0].timestamp, w[0].revision_id) < (w[1].timestamp, w[1].revision_id));
        }
    }

    #[test]
    fn bad_config() {
        for cfg in [
            SynthConfig { n: 0, ..small(1) },
            SynthConfig {
                vandalism_rate: 1.5,
                ..small(1)
            },
            SynthConfig {
                start: 10,
                end: 5,
                ..small(1)
            },
        ] {
            assert!(matches!(generate(&cfg), Err(SynthError::BadConfig(_))));
        }
    }
}
