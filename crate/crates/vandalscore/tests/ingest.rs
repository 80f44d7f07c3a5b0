use proptest::prelude::*;
use vandalscore::ingest::{
    parse_metadata_line, parse_revision_xml, stream_corpus, write_metadata_line, write_revision_xml,
};
use vandalscore_core::{Contributor, Geo, RawRevision, RevisionMetadata};

fn text() -> impl Strategy<Value = String> {
    // Markup characters, quotes, commas, pipes and non-ASCII, but no
    // characters XML 1.0 cannot carry.
    "[a-zA-Z0-9 <>&\"',|/*:éß日本\\-\\[\\]{}]{0,30}"
}

fn contributor() -> impl Strategy<Value = Contributor> {
    prop_oneof![
        (1u64..10_000_000, "[A-Za-z][A-Za-z0-9 _.-]{0,15}[A-Za-z0-9]")
            .prop_map(|(user_id, user_name)| Contributor::Registered { user_id, user_name }),
        "[0-9]{1,3}\\.[0-9]{1,3}\\.[0-9]{1,3}\\.[0-9]{1,3}"
            .prop_map(|ip_address| Contributor::Anonymous { ip_address }),
    ]
}

prop_compose! {
    fn revision()(
        revision_id in 1u64..u64::MAX / 2,
        parent_id in proptest::option::of(1u64..1_000_000),
        item in 1u64..100_000_000,
        json_id in any::<bool>(),
        timestamp in 1_300_000_000i64..1_700_000_000,
        contributor in contributor(),
        comment in text(),
        body in text(),
        is_minor in any::<bool>(),
    ) -> RawRevision {
        let item_id = format!("Q{item}");
        let entity_text = if json_id {
            serde_json::json!({"id": item_id, "x": body}).to_string()
        } else {
            serde_json::json!({"x": body}).to_string()
        };
        RawRevision {
            revision_id,
            parent_id,
            item_id,
            timestamp,
            contributor,
            comment,
            entity_text,
            is_minor,
        }
    }
}

fn opt() -> impl Strategy<Value = Option<String>> {
    proptest::option::of("[A-Za-z ,\"'/_-]{1,12}")
}

prop_compose! {
    fn metadata()(
        revision_id in 1u64..u64::MAX / 2,
        session_id in proptest::option::of(any::<u64>()),
        geo in proptest::option::of((opt(), opt(), opt(), opt(), opt(), opt())),
        tags in proptest::collection::vec("[a-z][a-z ,\"-]{0,10}[a-z]", 0..4),
    ) -> RevisionMetadata {
        let geo = geo
            .map(|(continent, country, region, county, city, timezone)| Geo {
                continent, country, region, county, city, timezone,
            })
            .filter(|g| !g.is_empty());
        let mut tags = tags;
        tags.sort();
        tags.dedup();
        RevisionMetadata { revision_id, session_id, geo, tags }
    }
}

proptest! {
    #[test]
    fn revision_xml_round_trips(rev in revision()) {
        let xml = write_revision_xml(&rev);
        prop_assert_eq!(parse_revision_xml(xml.as_bytes()).unwrap(), rev);
    }

    #[test]
    fn metadata_line_round_trips(meta in metadata()) {
        let line = write_metadata_line(&meta);
        prop_assert!(!line.contains('\n'));
        let back = parse_metadata_line(&line).unwrap();
        prop_assert_eq!(back.revision_id, meta.revision_id);
        prop_assert_eq!(back.session_id, meta.session_id);
        prop_assert_eq!(back.geo, meta.geo);
        let mut tags = back.tags.clone();
        tags.sort();
        prop_assert_eq!(tags, meta.tags);
    }

    #[test]
    fn stream_keeps_every_parseable_revision_in_order(
        revs in proptest::collection::vec(revision(), 0..12),
        broken in proptest::collection::vec(any::<bool>(), 12),
    ) {
        let mut xml = String::from("<mediawiki>");
        let mut good = 0;
        for (rev, &b) in revs.iter().zip(&broken) {
            if b {
                xml.push_str("<revision><id>x</id></revision>");
            } else {
                xml.push_str(&write_revision_xml(rev));
                good += 1;
            }
        }
        xml.push_str("</mediawiki>");
        let corpus = stream_corpus(&xml, Vec::new());
        prop_assert_eq!(corpus.records.len(), good);
        prop_assert_eq!(corpus.errors.len(), revs.len() - good);
        for w in corpus.records.windows(2) {
            prop_assert!(
                (w[0].rev.timestamp, w[0].rev.revision_id) <= (w[1].rev.timestamp, w[1].rev.revision_id)
            );
        }
    }
}
