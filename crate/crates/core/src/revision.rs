//! Revision records as they come out of the dump and metadata files.

use alloc::string::String;
use alloc::vec::Vec;

/// Who made an edit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Contributor {
    Registered { user_id: u64, user_name: String },
    Anonymous { ip_address: String },
}

impl Contributor {
    pub fn is_registered(&self) -> bool {
        matches!(self, Contributor::Registered { .. })
    }

    pub fn user_name(&self) -> Option<&str> {
        match self {
            Contributor::Registered { user_name, .. } => Some(user_name),
            Contributor::Anonymous { .. } => None,
        }
    }
}

/// One revision of an entity: the post-edit entity document plus the
/// comment and contributor that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRevision {
    pub revision_id: u64,
    pub parent_id: Option<u64>,
    pub item_id: String,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    pub contributor: Contributor,
    pub comment: String,
    pub entity_text: String,
    pub is_minor: bool,
}

impl RawRevision {
    /// Hour of day (UTC) in `0..24`.
    pub fn hour(&self) -> u32 {
        (self.timestamp.rem_euclid(86_400) / 3_600) as u32
    }
}

/// Geolocation of an anonymous contributor's address.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Geo {
    pub continent: Option<String>,
    pub country: Option<String>,
    pub region: Option<String>,
    pub county: Option<String>,
    pub city: Option<String>,
    pub timezone: Option<String>,
}

impl Geo {
    pub fn is_empty(&self) -> bool {
        self.continent.is_none()
            && self.country.is_none()
            && self.region.is_none()
            && self.county.is_none()
            && self.city.is_none()
            && self.timezone.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RevisionMetadata {
    pub revision_id: u64,
    /// Consecutive edits by the same user on the same item share a session.
    pub session_id: Option<u64>,
    pub geo: Option<Geo>,
    /// Tags in file order, without duplicates.
    pub tags: Vec<String>,
}

impl RevisionMetadata {
    /// Metadata for a revision that had no row in the metadata file.
    pub fn empty(revision_id: u64) -> Self {
        RevisionMetadata {
            revision_id,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruthLabel {
    pub revision_id: u64,
    pub rollback_reverted: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hour_is_utc_clock_hour() {
        // 2016-03-01T17:45:00Z
        let rev = RawRevision {
            revision_id: 1,
            parent_id: None,
            item_id: String::new(),
            timestamp: 1_456_854_300,
            contributor: Contributor::Anonymous {
                ip_address: "1.2.3.4".into(),
            },
            comment: String::new(),
            entity_text: String::new(),
            is_minor: false,
        };
        assert_eq!(rev.hour(), 17);
    }
}
