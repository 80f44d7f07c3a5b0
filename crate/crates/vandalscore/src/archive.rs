//! On-disk state archive: a directory of TSV tables and a MANIFEST holding
//! the format version, schema hash and a checksum over every table.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;
use vandalscore_core::context::{CategoricalDict, StoreParts};
use vandalscore_core::{FeatureSchema, SlotKind, StateStore};

pub const STATE_MAGIC: &str = "vandalscore-state";
pub const STATE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("corrupt state: {0}")]
    CorruptState(String),
    #[error("state store must be frozen before saving")]
    NotFrozen,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn corrupt(msg: impl Into<String>) -> ArchiveError {
    ArchiveError::CorruptState(msg.into())
}

pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape_field(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => return Err(format!("bad escape \\{}", other.unwrap_or(' '))),
        }
    }
    Ok(out)
}

fn table<I>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = format!("{header}\n");
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| escape_field(c)).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

fn list<'a, I: IntoIterator<Item = &'a String>>(items: I) -> String {
    items.into_iter().map(|s| escape_field(s) + "\n").collect()
}

/// The `schema.tsv` table: one `slot, name, kind` row per vector slot.
pub fn schema_table(store: &StateStore) -> String {
    table(
        "slot\tname\tkind",
        store
            .schema()
            .slots()
            .iter()
            .enumerate()
            .map(|(i, s)| vec![i.to_string(), s.name.clone(), s.kind.as_str().to_string()]),
    )
}

/// File name and content of every table, in checksum order.
fn render(store: &StateStore) -> Vec<(String, String)> {
    let parts = store.to_parts();
    let mut files = vec![("schema.tsv".to_string(), schema_table(store))];
    for (var, dict) in &parts.dicts {
        files.push((
            format!("dict_{var}.tsv"),
            table(
                "value\tcode",
                dict.values()
                    .iter()
                    .enumerate()
                    .map(|(code, v)| vec![v.clone(), code.to_string()]),
            ),
        ));
    }
    let counts = |m: &BTreeMap<String, u64>, key: &str| {
        table(
            &format!("{key}\tcount"),
            m.iter().map(|(k, c)| vec![k.clone(), c.to_string()]),
        )
    };
    files.push((
        "user_counts.tsv".into(),
        counts(&parts.user_edit_counts, "user"),
    ));
    files.push((
        "item_counts.tsv".into(),
        counts(&parts.item_edit_counts, "item"),
    ));
    files.push(("privileged.txt".into(), list(&parts.privileged_users)));
    files.push(("tags.txt".into(), list(&parts.tag_vocabulary)));
    files.push(("bots.txt".into(), list(&parts.bot_names)));
    files
}

fn checksum(files: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    for (name, content) in files {
        h.update(name.as_bytes());
        h.update([0]);
        h.update((content.len() as u64).to_le_bytes());
        h.update(content.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn save_state(store: &StateStore, dir: &Path) -> Result<(), ArchiveError> {
    if !store.is_frozen() {
        return Err(ArchiveError::NotFrozen);
    }
    fs::create_dir_all(dir)?;
    let files = render(store);
    for (name, content) in &files {
        fs::write(dir.join(name), content)?;
    }
    let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
    let manifest = format!(
        "{STATE_MAGIC}\nversion\t{STATE_VERSION}\nschema_hash\t{:016x}\nfiles\t{}\nchecksum\t{}\n",
        store.schema().hash(),
        names.join(" "),
        checksum(&files)
    );
    fs::write(dir.join("MANIFEST"), manifest)?;
    Ok(())
}

struct Manifest {
    schema_hash: u64,
    files: Vec<String>,
    checksum: String,
}

fn parse_manifest(text: &str) -> Result<Manifest, ArchiveError> {
    let mut lines = text.lines();
    if lines.next() != Some(STATE_MAGIC) {
        return Err(corrupt("MANIFEST has no state header"));
    }
    let mut fields = BTreeMap::new();
    for line in lines {
        let (k, v) = line
            .split_once('\t')
            .ok_or_else(|| corrupt(format!("bad MANIFEST line {line:?}")))?;
        fields.insert(k, v);
    }
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| corrupt(format!("MANIFEST lacks {k}")))
    };
    let version: u32 = get("version")?
        .parse()
        .map_err(|_| corrupt("MANIFEST version is not a number"))?;
    if version != STATE_VERSION {
        return Err(corrupt(format!(
            "unsupported state version {version}, expected {STATE_VERSION}"
        )));
    }
    Ok(Manifest {
        schema_hash: u64::from_str_radix(get("schema_hash")?, 16)
            .map_err(|_| corrupt("MANIFEST schema hash is not hex"))?,
        files: get("files")?.split(' ').map(String::from).collect(),
        checksum: get("checksum")?.to_string(),
    })
}

fn rows(name: &str, content: &str, width: usize) -> Result<Vec<Vec<String>>, ArchiveError> {
    let mut lines = content.lines();
    lines
        .next()
        .ok_or_else(|| corrupt(format!("{name} has no header")))?;
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells = line
                .split('\t')
                .map(unescape_field)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| corrupt(format!("{name} line {}: {e}", i + 2)))?;
            if cells.len() != width {
                return Err(corrupt(format!(
                    "{name} line {}: {} columns, expected {width}",
                    i + 2,
                    cells.len()
                )));
            }
            Ok(cells)
        })
        .collect()
}

fn entries(name: &str, content: &str) -> Result<Vec<String>, ArchiveError> {
    content
        .lines()
        .map(|l| unescape_field(l).map_err(|e| corrupt(format!("{name}: {e}"))))
        .collect()
}

fn counts(name: &str, content: &str) -> Result<BTreeMap<String, u64>, ArchiveError> {
    rows(name, content, 2)?
        .into_iter()
        .map(|r| {
            let n = r[1]
                .parse()
                .map_err(|_| corrupt(format!("{name}: bad count {:?}", r[1])))?;
            Ok((r[0].clone(), n))
        })
        .collect()
}

pub fn load_state(dir: &Path) -> Result<StateStore, ArchiveError> {
    let manifest = fs::read_to_string(dir.join("MANIFEST"))?;
    let manifest = parse_manifest(&manifest)?;
    let mut files = Vec::with_capacity(manifest.files.len());
    for name in &manifest.files {
        if name.contains('/') || name.contains("..") {
            return Err(corrupt(format!("bad file name {name:?} in MANIFEST")));
        }
        let content = fs::read_to_string(dir.join(name))
            .map_err(|e| corrupt(format!("cannot read {name}: {e}")))?;
        files.push((name.clone(), content));
    }
    if checksum(&files) != manifest.checksum {
        return Err(corrupt("checksum mismatch"));
    }
    let file = |n: &str| {
        files
            .iter()
            .find(|(name, _)| name == n)
            .map(|(_, c)| c.as_str())
            .ok_or_else(|| corrupt(format!("{n} missing from archive")))
    };

    let mut parts = StoreParts::default();
    for (name, content) in &files {
        let Some(var) = name
            .strip_prefix("dict_")
            .and_then(|n| n.strip_suffix(".tsv"))
        else {
            continue;
        };
        let dict_rows = rows(name, content, 2)?
            .into_iter()
            .map(|r| {
                let code = r[1]
                    .parse()
                    .map_err(|_| corrupt(format!("{name}: bad code {:?}", r[1])))?;
                Ok((r[0].clone(), code))
            })
            .collect::<Result<Vec<(String, i64)>, ArchiveError>>()?;
        let dict =
            CategoricalDict::from_rows(dict_rows).map_err(|e| corrupt(format!("{name}: {e}")))?;
        parts.dicts.insert(var.to_string(), dict);
    }
    parts.user_edit_counts = counts("user_counts.tsv", file("user_counts.tsv")?)?;
    parts.item_edit_counts = counts("item_counts.tsv", file("item_counts.tsv")?)?;
    parts.privileged_users = entries("privileged.txt", file("privileged.txt")?)?
        .into_iter()
        .collect();
    parts.tag_vocabulary = entries("tags.txt", file("tags.txt")?)?;
    parts.bot_names = entries("bots.txt", file("bots.txt")?)?
        .into_iter()
        .collect::<BTreeSet<_>>();

    let store = StateStore::from_parts(parts).map_err(|e| corrupt(e.to_string()))?;

    let schema_rows = rows("schema.tsv", file("schema.tsv")?, 3)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            if r[0] != i.to_string() {
                return Err(corrupt(format!("schema.tsv: slot {} out of order", r[0])));
            }
            let kind = SlotKind::parse(&r[2])
                .ok_or_else(|| corrupt(format!("schema.tsv: bad kind {:?}", r[2])))?;
            Ok((r[1].clone(), kind))
        })
        .collect::<Result<Vec<_>, ArchiveError>>()?;
    let schema = FeatureSchema::from_rows(schema_rows).map_err(|e| corrupt(e.to_string()))?;
    if &schema != store.schema() {
        return Err(corrupt("schema.tsv disagrees with tags.txt"));
    }
    if schema.hash() != manifest.schema_hash {
        return Err(corrupt(format!(
            "schema hash {:016x} does not match MANIFEST {:016x}",
            schema.hash(),
            manifest.schema_hash
        )));
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn field_escaping_round_trips(s in "\\PC*|[\\t\\n\\r\\\\a]*") {
            let e = escape_field(&s);
            prop_assert!(!e.contains(['\t', '\n', '\r']));
            prop_assert_eq!(unescape_field(&e).unwrap(), s);
        }
    }

    #[test]
    fn bad_escape_rejected() {
        assert!(unescape_field("a\\x").is_err());
        assert!(unescape_field("a\\").is_err());
    }
}
