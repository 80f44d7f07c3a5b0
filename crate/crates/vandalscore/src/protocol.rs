//! Length-prefixed frames of the evaluation protocol.
//!
//! Each frame is a header line `WSDM/1 <TYPE> <revisionId|0> <length>\n`
//! followed by exactly `length` payload bytes.

use std::fmt;
use std::io::{self, BufRead, Read, Write};

use thiserror::Error;

pub const VERSION: &str = "WSDM/1";
pub const META_SEPARATOR: &str = "\n--META--\n";
/// Upper bound on a payload; larger declared lengths are violations.
pub const MAX_PAYLOAD: usize = 64 << 20;
const MAX_HEADER: usize = 128;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("connection lost: {0}")]
    ConnectionLost(#[source] io::Error),
    #[error("protocol violation: {0}")]
    Violation(String),
}

impl From<io::Error> for ProtocolError {
    fn from(e: io::Error) -> Self {
        ProtocolError::ConnectionLost(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Hello,
    Revision,
    Score,
    End,
}

impl FrameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FrameKind::Hello => "HELLO",
            FrameKind::Revision => "REVISION",
            FrameKind::Score => "SCORE",
            FrameKind::End => "END",
        }
    }

    pub fn parse(s: &str) -> Option<FrameKind> {
        Some(match s {
            "HELLO" => FrameKind::Hello,
            "REVISION" => FrameKind::Revision,
            "SCORE" => FrameKind::Score,
            "END" => FrameKind::End,
            _ => return None,
        })
    }
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub kind: FrameKind,
    pub revision_id: u64,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn hello(token: &str) -> Frame {
        Frame {
            kind: FrameKind::Hello,
            revision_id: 0,
            payload: token.as_bytes().to_vec(),
        }
    }

    pub fn revision(revision_id: u64, xml: &str, meta_line: &str) -> Frame {
        Frame {
            kind: FrameKind::Revision,
            revision_id,
            payload: revision_payload(xml, meta_line).into_bytes(),
        }
    }

    pub fn score(revision_id: u64, score: f64) -> Frame {
        Frame {
            kind: FrameKind::Score,
            revision_id,
            payload: format_score(score).into_bytes(),
        }
    }

    pub fn end(note: &str) -> Frame {
        Frame {
            kind: FrameKind::End,
            revision_id: 0,
            payload: note.as_bytes().to_vec(),
        }
    }

    pub fn payload_str(&self) -> Result<&str, ProtocolError> {
        std::str::from_utf8(&self.payload)
            .map_err(|_| ProtocolError::Violation(format!("{} payload is not UTF-8", self.kind)))
    }

    /// The score carried by a SCORE frame.
    pub fn score_value(&self) -> Result<f64, ProtocolError> {
        let text = self.payload_str()?;
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(ProtocolError::Violation(format!(
                "score {text:?} is not a finite number"
            ))),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!(
            "{VERSION} {} {} {}\n",
            self.kind,
            self.revision_id,
            self.payload.len()
        )
        .into_bytes();
        out.extend_from_slice(&self.payload);
        out
    }
}

pub fn format_score(score: f64) -> String {
    format!("{score:.9}")
}

pub fn revision_payload(xml: &str, meta_line: &str) -> String {
    format!("{xml}{META_SEPARATOR}{meta_line}")
}

/// Splits a REVISION payload into its XML block and metadata line. A
/// payload without the separator is all XML.
pub fn split_revision_payload(payload: &str) -> (&str, Option<&str>) {
    match payload.rfind(META_SEPARATOR) {
        Some(i) => (&payload[..i], Some(&payload[i + META_SEPARATOR.len()..])),
        None => (payload, None),
    }
}

pub fn write_frame<W: Write>(w: &mut W, frame: &Frame) -> Result<(), ProtocolError> {
    w.write_all(&frame.to_bytes())?;
    Ok(())
}

/// Next frame, or `None` on a clean end of stream between frames.
pub fn read_frame<R: BufRead>(r: &mut R) -> Result<Option<Frame>, ProtocolError> {
    let mut header = Vec::with_capacity(48);
    let n = r
        .by_ref()
        .take(MAX_HEADER as u64)
        .read_until(b'\n', &mut header)?;
    if n == 0 {
        return Ok(None);
    }
    if header.last() != Some(&b'\n') {
        if n >= MAX_HEADER {
            return Err(ProtocolError::Violation("header line too long".into()));
        }
        return Err(ProtocolError::ConnectionLost(
            io::ErrorKind::UnexpectedEof.into(),
        ));
    }
    header.pop();
    let header = std::str::from_utf8(&header)
        .map_err(|_| ProtocolError::Violation("header is not UTF-8".into()))?;
    let parts: Vec<&str> = header.split(' ').collect();
    let bad = || ProtocolError::Violation(format!("bad frame header {header:?}"));
    if parts.len() != 4 || parts[0] != VERSION {
        return Err(bad());
    }
    let kind = FrameKind::parse(parts[1])
        .ok_or_else(|| ProtocolError::Violation(format!("unknown frame type {:?}", parts[1])))?;
    let revision_id: u64 = parts[2].parse().map_err(|_| bad())?;
    let len: usize = parts[3].parse().map_err(|_| bad())?;
    if len > MAX_PAYLOAD {
        return Err(ProtocolError::Violation(format!(
            "payload of {len} bytes is too large"
        )));
    }
    let mut payload = vec![0; len];
    r.read_exact(&mut payload)?;
    Ok(Some(Frame {
        kind,
        revision_id,
        payload,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_is_bit_exact() {
        let f = Frame::score(7, 0.5);
        assert_eq!(f.to_bytes(), b"WSDM/1 SCORE 7 11\n0.500000000");
        assert_eq!(Frame::hello("tok").to_bytes(), b"WSDM/1 HELLO 0 3\ntok");
    }

    #[test]
    fn bad_frames() {
        let read = |b: &[u8]| read_frame(&mut io::Cursor::new(b.to_vec()));
        assert!(matches!(read(b""), Ok(None)));
        assert!(matches!(
            read(b"WSDM/1 PING 0 0\n"),
            Err(ProtocolError::Violation(_))
        ));
        assert!(matches!(
            read(b"WSDM/2 END 0 0\n"),
            Err(ProtocolError::Violation(_))
        ));
        assert!(matches!(
            read(b"WSDM/1 END 0 5\nab"),
            Err(ProtocolError::ConnectionLost(_))
        ));
        assert!(matches!(
            read(b"WSDM/1 END 0"),
            Err(ProtocolError::ConnectionLost(_))
        ));
        let nan = Frame {
            kind: FrameKind::Score,
            revision_id: 1,
            payload: b"NaN".to_vec(),
        };
        assert!(nan.score_value().is_err());
    }

    #[test]
    fn payload_split() {
        let p = revision_payload("<revision/>", "7,1,,,,,,,");
        assert_eq!(
            split_revision_payload(&p),
            ("<revision/>", Some("7,1,,,,,,,"))
        );
        assert_eq!(split_revision_payload("<x/>"), ("<x/>", None));
    }

    proptest! {
        #[test]
        fn frames_round_trip(
            kind in 0usize..4,
            id in any::<u64>(),
            payload in proptest::collection::vec(any::<u8>(), 0..300),
        ) {
            let kinds = [FrameKind::Hello, FrameKind::Revision, FrameKind::Score, FrameKind::End];
            let f = Frame { kind: kinds[kind], revision_id: id, payload };
            let mut bytes = f.to_bytes();
            bytes.extend(Frame::end("").to_bytes());
            let mut cur = io::Cursor::new(bytes);
            prop_assert_eq!(read_frame(&mut cur).unwrap(), Some(f));
            prop_assert_eq!(read_frame(&mut cur).unwrap(), Some(Frame::end("")));
            prop_assert_eq!(read_frame(&mut cur).unwrap(), None);
        }

        #[test]
        fn score_text_within_half_nano(s in -2000.0f64..2000.0) {
            let back: f64 = format_score(s).parse().unwrap();
            prop_assert!((back - s).abs() <= 5e-10 + 1e-12);
        }
    }
}
