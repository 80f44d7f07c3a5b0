//! Revision XML, metadata and truth CSV, and the joined chronological
//! stream.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;

use chrono::{DateTime, Utc};
use quick_xml::escape::escape;
use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;
use vandalscore_core::{Contributor, Geo, RawRevision, RevisionMetadata, TruthLabel};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("missing field: {0}")]
    MissingField(&'static str),
    #[error("bad record: {0}")]
    BadRecord(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const META_HEADER: [&str; 9] = [
    "revisionId",
    "sessionId",
    "continent",
    "country",
    "region",
    "county",
    "city",
    "timezone",
    "tags",
];
pub const TAG_SEPARATOR: char = '|';

#[derive(Default)]
struct Fields {
    revision_id: Option<String>,
    parent_id: Option<String>,
    timestamp: Option<String>,
    user_name: Option<String>,
    user_id: Option<String>,
    ip: Option<String>,
    minor: bool,
    comment: String,
    text: String,
    title: Option<String>,
}

fn malformed(e: impl std::fmt::Display) -> IngestError {
    IngestError::MalformedXml(e.to_string())
}

/// Parses the first `<revision>` element in `xml`. A surrounding `<page>`
/// may supply the item id through `<title>`; otherwise it is the `id` of the
/// entity document.
pub fn parse_revision_xml(xml: &[u8]) -> Result<RawRevision, IngestError> {
    let text = std::str::from_utf8(xml).map_err(malformed)?;
    let mut reader = Reader::from_str(text);
    let mut path: Vec<Vec<u8>> = Vec::new();
    let mut buf = String::new();
    let mut f = Fields::default();
    let mut in_revision = false;

    loop {
        match reader.read_event().map_err(malformed)? {
            Event::Start(e) => {
                let name = e.local_name().as_ref().to_vec();
                if name == b"revision" {
                    in_revision = true;
                }
                path.push(name);
                buf.clear();
            }
            Event::Text(t) => buf.push_str(&t.unescape().map_err(malformed)?),
            Event::CData(c) => buf.push_str(std::str::from_utf8(&c).map_err(malformed)?),
            Event::Empty(e) => {
                if in_revision && e.local_name().as_ref() == b"minor" {
                    f.minor = true;
                }
            }
            Event::End(e) => {
                let leaf = path.pop().unwrap_or_default();
                if leaf != e.local_name().as_ref() {
                    return Err(malformed("mismatched end tag"));
                }
                let parent = path.last().map(Vec::as_slice);
                let value = std::mem::take(&mut buf);
                match (parent, leaf.as_slice()) {
                    (_, b"revision") => break,
                    (_, b"title") if !in_revision || parent == Some(b"revision") => {
                        f.title = Some(value)
                    }
                    (Some(b"revision"), b"id") => f.revision_id = Some(value),
                    (Some(b"revision"), b"parentid") => f.parent_id = Some(value),
                    (Some(b"revision"), b"timestamp") => f.timestamp = Some(value),
                    (Some(b"revision"), b"comment") => f.comment = value,
                    (Some(b"revision"), b"text") => f.text = value,
                    (Some(b"contributor"), b"username") => f.user_name = Some(value),
                    (Some(b"contributor"), b"id") => f.user_id = Some(value),
                    (Some(b"contributor"), b"ip") => f.ip = Some(value),
                    _ => {}
                }
            }
            Event::Eof => {
                if !in_revision {
                    return Err(malformed("no <revision> element"));
                }
                return Err(malformed("unexpected end of document"));
            }
            _ => {}
        }
    }
    finish(f)
}

fn parse_id(field: &'static str, s: &str) -> Result<u64, IngestError> {
    s.trim()
        .parse()
        .map_err(|_| IngestError::MalformedXml(format!("{field} is not an integer: {s:?}")))
}

fn finish(f: Fields) -> Result<RawRevision, IngestError> {
    let revision_id = parse_id(
        "revision id",
        &f.revision_id
            .ok_or(IngestError::MissingField("revision id"))?,
    )?;
    if revision_id == 0 {
        return Err(malformed("revision id must be positive"));
    }
    let ts = f.timestamp.ok_or(IngestError::MissingField("timestamp"))?;
    let timestamp = DateTime::parse_from_rfc3339(ts.trim())
        .map_err(|e| IngestError::MalformedXml(format!("bad timestamp {ts:?}: {e}")))?
        .timestamp();
    let contributor = match (f.user_name, f.ip) {
        (Some(user_name), None) => Contributor::Registered {
            user_id: parse_id(
                "user id",
                &f.user_id
                    .ok_or(IngestError::MissingField("contributor id"))?,
            )?,
            user_name,
        },
        (None, Some(ip_address)) => Contributor::Anonymous { ip_address },
        (Some(_), Some(_)) => return Err(malformed("contributor has both username and ip")),
        (None, None) => return Err(IngestError::MissingField("contributor")),
    };
    let parent_id = f.parent_id.map(|p| parse_id("parent id", &p)).transpose()?;
    let item_id = f
        .title
        .unwrap_or_else(|| entity_id(&f.text).unwrap_or_default());
    Ok(RawRevision {
        revision_id,
        parent_id,
        item_id,
        timestamp,
        contributor,
        comment: f.comment,
        entity_text: f.text,
        is_minor: f.minor,
    })
}

fn entity_id(text: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(text).ok()?;
    v.get("id")?.as_str().map(String::from)
}

pub fn format_timestamp(ts: i64) -> String {
    DateTime::<Utc>::from_timestamp(ts, 0)
        .unwrap_or_default()
        .format("%Y-%m-%dT%H:%M:%SZ")
        .to_string()
}

/// Serializes a revision in the format [`parse_revision_xml`] reads. A
/// `<title>` is written only when the item id cannot be recovered from the
/// entity document.
pub fn write_revision_xml(rev: &RawRevision) -> String {
    let mut out = String::with_capacity(rev.entity_text.len() + rev.comment.len() + 256);
    out.push_str("<revision>\n");
    if entity_id(&rev.entity_text).as_deref() != Some(rev.item_id.as_str()) {
        let _ = writeln!(out, "  <title>{}</title>", escape(rev.item_id.as_str()));
    }
    let _ = writeln!(out, "  <id>{}</id>", rev.revision_id);
    if let Some(p) = rev.parent_id {
        let _ = writeln!(out, "  <parentid>{p}</parentid>");
    }
    let _ = writeln!(
        out,
        "  <timestamp>{}</timestamp>",
        format_timestamp(rev.timestamp)
    );
    out.push_str("  <contributor>\n");
    match &rev.contributor {
        Contributor::Registered { user_id, user_name } => {
            let _ = writeln!(
                out,
                "    <username>{}</username>",
                escape(user_name.as_str())
            );
            let _ = writeln!(out, "    <id>{user_id}</id>");
        }
        Contributor::Anonymous { ip_address } => {
            let _ = writeln!(out, "    <ip>{}</ip>", escape(ip_address.as_str()));
        }
    }
    out.push_str("  </contributor>\n");
    if rev.is_minor {
        out.push_str("  <minor/>\n");
    }
    if !rev.comment.is_empty() {
        let _ = writeln!(out, "  <comment>{}</comment>", escape(rev.comment.as_str()));
    }
    out.push_str("  <model>wikibase-item</model>\n  <format>application/json</format>\n");
    let _ = writeln!(
        out,
        "  <text xml:space=\"preserve\">{}</text>",
        escape(rev.entity_text.as_str())
    );
    out.push_str("</revision>");
    out
}

fn opt(cell: &str) -> Option<String> {
    (!cell.is_empty()).then(|| cell.to_string())
}

fn meta_from_record(rec: &csv::StringRecord) -> Result<RevisionMetadata, IngestError> {
    if rec.len() != META_HEADER.len() {
        return Err(IngestError::BadRecord(format!(
            "expected {} columns, got {}",
            META_HEADER.len(),
            rec.len()
        )));
    }
    let revision_id = rec[0]
        .trim()
        .parse()
        .map_err(|_| IngestError::BadRecord(format!("bad revision id {:?}", &rec[0])))?;
    let session_id = match rec[1].trim() {
        "" => None,
        s => Some(
            s.parse()
                .map_err(|_| IngestError::BadRecord(format!("bad session id {s:?}")))?,
        ),
    };
    let geo = Geo {
        continent: opt(&rec[2]),
        country: opt(&rec[3]),
        region: opt(&rec[4]),
        county: opt(&rec[5]),
        city: opt(&rec[6]),
        timezone: opt(&rec[7]),
    };
    let mut tags: Vec<String> = Vec::new();
    for t in rec[8].split(TAG_SEPARATOR).filter(|t| !t.is_empty()) {
        if !tags.iter().any(|x| x == t) {
            tags.push(t.to_string());
        }
    }
    Ok(RevisionMetadata {
        revision_id,
        session_id,
        geo: (!geo.is_empty()).then_some(geo),
        tags,
    })
}

fn csv_reader<R: Read>(r: R, headers: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .from_reader(r)
}

/// One data line of the metadata CSV, without the header.
pub fn parse_metadata_line(line: &str) -> Result<RevisionMetadata, IngestError> {
    let line = line.trim_end_matches(['\r', '\n']);
    let mut rdr = csv_reader(line.as_bytes(), false);
    let rec = rdr
        .records()
        .next()
        .ok_or_else(|| IngestError::BadRecord("empty line".into()))?
        .map_err(|e| IngestError::BadRecord(e.to_string()))?;
    meta_from_record(&rec)
}

pub fn write_metadata_line(meta: &RevisionMetadata) -> String {
    let geo = meta.geo.clone().unwrap_or_default();
    let cell = |v: &Option<String>| v.clone().unwrap_or_default();
    let fields = [
        meta.revision_id.to_string(),
        meta.session_id.map(|s| s.to_string()).unwrap_or_default(),
        cell(&geo.continent),
        cell(&geo.country),
        cell(&geo.region),
        cell(&geo.county),
        cell(&geo.city),
        cell(&geo.timezone),
        meta.tags.join(&TAG_SEPARATOR.to_string()),
    ];
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&fields).expect("writing to memory");
    let mut bytes = w.into_inner().expect("writing to memory");
    bytes.pop();
    String::from_utf8(bytes).expect("fields are UTF-8")
}

/// Whole metadata file, header first.
pub fn parse_metadata_csv<R: Read>(r: R) -> Result<Vec<RevisionMetadata>, IngestError> {
    let mut rdr = csv_reader(r, true);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| IngestError::BadRecord(format!("line {}: {e}", i + 2)))?;
        out.push(
            meta_from_record(&rec)
                .map_err(|e| IngestError::BadRecord(format!("line {}: {e}", i + 2)))?,
        );
    }
    Ok(out)
}

pub fn write_metadata_csv(metas: &[RevisionMetadata]) -> String {
    let mut out = META_HEADER.join(",");
    out.push('\n');
    for m in metas {
        out.push_str(&write_metadata_line(m));
        out.push('\n');
    }
    out
}

pub fn parse_truth_csv<R: Read>(r: R) -> Result<Vec<TruthLabel>, IngestError> {
    let mut rdr = csv_reader(r, true);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| IngestError::BadRecord(format!("line {}: {e}", i + 2)))?;
        let bad = || IngestError::BadRecord(format!("line {}: {:?}", i + 2, rec));
        if rec.len() != 2 {
            return Err(bad());
        }
        let revision_id = rec[0].trim().parse().map_err(|_| bad())?;
        let rollback_reverted = match rec[1].trim() {
            "true" => true,
            "false" => false,
            _ => return Err(bad()),
        };
        out.push(TruthLabel {
            revision_id,
            rollback_reverted,
        });
    }
    Ok(out)
}

pub fn write_truth_csv(labels: &[TruthLabel]) -> String {
    let mut out = String::from("revisionId,rollbackReverted\n");
    for l in labels {
        let _ = writeln!(out, "{},{}", l.revision_id, l.rollback_reverted);
    }
    out
}

/// Byte ranges of the top-level `<revision>...</revision>` blocks.
pub fn revision_blocks(xml: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = xml;
    while let Some(start) = find_open_tag(rest) {
        let tail = &rest[start..];
        match tail.find("</revision>") {
            Some(end) => {
                let end = end + "</revision>".len();
                out.push(&tail[..end]);
                rest = &tail[end..];
            }
            None => {
                out.push(tail);
                break;
            }
        }
    }
    out
}

fn find_open_tag(s: &str) -> Option<usize> {
    let mut from = 0;
    while let Some(i) = s[from..].find("<revision") {
        let at = from + i;
        match s.as_bytes().get(at + "<revision".len()) {
            Some(b'>' | b' ' | b'\t' | b'\n' | b'\r' | b'/') => return Some(at),
            _ => from = at + 1,
        }
    }
    None
}

/// A revision joined with its metadata, plus the wire forms of both.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub rev: RawRevision,
    pub meta: RevisionMetadata,
    pub xml: String,
    pub meta_line: String,
}

#[derive(Debug)]
pub struct RecordError {
    /// Position of the block in the XML source.
    pub index: usize,
    pub error: IngestError,
}

#[derive(Debug, Default)]
pub struct Corpus {
    pub records: Vec<Record>,
    pub errors: Vec<RecordError>,
}

/// Joins revisions with metadata by revision id and orders them by
/// `(timestamp, revisionId)`. Revisions without metadata get an empty
/// record; unparsable revisions are reported and skipped.
pub fn stream_corpus(xml: &str, metas: Vec<RevisionMetadata>) -> Corpus {
    let mut by_id: HashMap<u64, RevisionMetadata> =
        metas.into_iter().map(|m| (m.revision_id, m)).collect();
    let mut corpus = Corpus::default();
    for (index, block) in revision_blocks(xml).into_iter().enumerate() {
        match parse_revision_xml(block.as_bytes()) {
            Ok(rev) => {
                let meta = by_id
                    .remove(&rev.revision_id)
                    .unwrap_or_else(|| RevisionMetadata::empty(rev.revision_id));
                corpus.records.push(Record {
                    meta_line: write_metadata_line(&meta),
                    xml: block.to_string(),
                    rev,
                    meta,
                });
            }
            Err(error) => {
                log::warn!("skipping revision block {index}: {error}");
                corpus.errors.push(RecordError { index, error });
            }
        }
    }
    corpus
        .records
        .sort_by_key(|r| (r.rev.timestamp, r.rev.revision_id));
    corpus
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_anonymous_revision() {
        let xml = b"<revision><id>7</id><timestamp>2016-03-01T00:00:00Z</timestamp>\
            <contributor><ip>1.2.3.4</ip></contributor></revision>";
        let rev = parse_revision_xml(xml).unwrap();
        assert_eq!(rev.revision_id, 7);
        assert!(!rev.contributor.is_registered());
        assert!(!rev.is_minor);
        assert_eq!(rev.comment, "");
        assert_eq!(rev.timestamp, 1_456_790_400);
    }

    #[test]
    fn registered_minor_in_page() {
        let xml = "<page><title>Q42</title><revision><id>9</id><parentid>8</parentid>\
            <timestamp>2016-03-01T17:45:00Z</timestamp><contributor><username>BotUser</username>\
            <id>55</id></contributor><minor/><comment>/* wbsetlabel-set:1|en */ a &amp; b</comment>\
            <text>{\"id\":\"Q1\"}</text></revision></page>";
        let rev = parse_revision_xml(xml.as_bytes()).unwrap();
        assert_eq!(
            rev.contributor,
            Contributor::Registered {
                user_id: 55,
                user_name: "BotUser".into()
            }
        );
        assert!(rev.is_minor);
        assert_eq!(rev.item_id, "Q42");
        assert_eq!(rev.parent_id, Some(8));
        assert_eq!(rev.comment, "/* wbsetlabel-set:1|en */ a & b");
        assert_eq!(rev.hour(), 17);
    }

    #[test]
    fn item_id_from_entity() {
        let xml = "<revision><id>1</id><timestamp>2016-03-01T00:00:00Z</timestamp>\
            <contributor><ip>::1</ip></contributor><text>{\"id\":\"Q5\",\"labels\":{}}</text></revision>";
        assert_eq!(parse_revision_xml(xml.as_bytes()).unwrap().item_id, "Q5");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_revision_xml(b"<revision><id>1</id>"),
            Err(IngestError::MalformedXml(_))
        ));
        assert!(matches!(
            parse_revision_xml(b"<revision><id>1</id></oops>"),
            Err(IngestError::MalformedXml(_))
        ));
        assert!(matches!(
            parse_revision_xml(
                b"<revision><timestamp>2016-03-01T00:00:00Z</timestamp><contributor><ip>x</ip></contributor></revision>"
            ),
            Err(IngestError::MissingField("revision id"))
        ));
        assert!(matches!(
            parse_revision_xml(
                b"<revision><id>3</id><contributor><ip>x</ip></contributor></revision>"
            ),
            Err(IngestError::MissingField("timestamp"))
        ));
    }

    #[test]
    fn metadata_lines() {
        let m = parse_metadata_line("7,100,,,,,,,").unwrap();
        assert_eq!(m.session_id, Some(100));
        assert_eq!(m.geo, None);
        assert!(m.tags.is_empty());

        let m = parse_metadata_line("7,100,EU,DE,,,,,abuse|newbie").unwrap();
        let geo = m.geo.unwrap();
        assert_eq!(geo.continent.as_deref(), Some("EU"));
        assert_eq!(geo.country.as_deref(), Some("DE"));
        assert_eq!(m.tags, ["abuse", "newbie"]);

        assert!(matches!(
            parse_metadata_line("7,100"),
            Err(IngestError::BadRecord(_))
        ));
        let m = parse_metadata_line("7,,,,,,,,").unwrap();
        assert_eq!(m.session_id, None);
    }

    #[test]
    fn metadata_line_round_trip_with_quoting() {
        let meta = RevisionMetadata {
            revision_id: 3,
            session_id: Some(9),
            geo: Some(Geo {
                city: Some("Washington, D.C.".into()),
                timezone: Some("America/New_York".into()),
                ..Default::default()
            }),
            tags: vec!["possible vandalism".into(), "mobile edit".into()],
        };
        assert_eq!(
            parse_metadata_line(&write_metadata_line(&meta)).unwrap(),
            meta
        );
    }

    #[test]
    fn truth_csv() {
        let t =
            parse_truth_csv("revisionId,rollbackReverted\n1,true\n2,false\n".as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert!(t[0].rollback_reverted && !t[1].rollback_reverted);
        assert!(parse_truth_csv("revisionId,rollbackReverted\n1,yes\n".as_bytes()).is_err());
    }

    #[test]
    fn blocks_are_split() {
        let xml = "<mediawiki><revision>a</revision>\n<revisions/><revision id=\"x\">b</revision></mediawiki>";
        assert_eq!(
            revision_blocks(xml),
            ["<revision>a</revision>", "<revision id=\"x\">b</revision>"]
        );
    }
}
