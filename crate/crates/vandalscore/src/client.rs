//! Scoring client for the evaluation protocol.

use std::io::{BufReader, BufWriter, Write};
use std::net::{Shutdown, TcpStream, ToSocketAddrs};
use std::thread;
use std::time::Duration;

use thiserror::Error;
use vandalscore_core::engine::SessionScorer;
use vandalscore_core::{RawRevision, RevisionMetadata, ScoringEngine};

use crate::ingest::{parse_metadata_line, parse_revision_xml, IngestError};
use crate::protocol::{
    read_frame, split_revision_payload, write_frame, Frame, FrameKind, ProtocolError,
};

/// Answer for revisions that cannot be parsed or scored.
pub const DEFAULT_SCORE: f64 = 0.5;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("connection lost after {attempts} attempts: {source}")]
    ConnectionLost {
        attempts: u32,
        #[source]
        source: ProtocolError,
    },
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
}

/// Revision and metadata from a REVISION payload. Without a metadata line
/// the revision gets an empty record.
pub fn parse_payload(payload: &str) -> Result<(RawRevision, RevisionMetadata), IngestError> {
    let (xml, meta_line) = split_revision_payload(payload);
    let rev = parse_revision_xml(xml.as_bytes())?;
    let meta = match meta_line {
        Some(line) => {
            let meta = parse_metadata_line(line)?;
            if meta.revision_id != rev.revision_id {
                return Err(IngestError::BadRecord(format!(
                    "metadata for revision {} sent with revision {}",
                    meta.revision_id, rev.revision_id
                )));
            }
            meta
        }
        None => RevisionMetadata::empty(rev.revision_id),
    };
    Ok((rev, meta))
}

/// Final score for one wire payload; never fails.
pub fn score_payload(scorer: &mut SessionScorer<'_>, payload: &[u8]) -> f64 {
    let parsed = std::str::from_utf8(payload)
        .map_err(|e| IngestError::MalformedXml(e.to_string()))
        .and_then(parse_payload);
    match parsed {
        Ok((rev, meta)) => scorer.score(&rev, &meta).unwrap_or_else(|e| {
            log::warn!("revision {}: scoring failed: {e}", rev.revision_id);
            DEFAULT_SCORE
        }),
        Err(e) => {
            log::warn!("unparsable revision: {e}");
            DEFAULT_SCORE
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClientOptions {
    pub token: String,
    pub max_reconnects: u32,
    pub retry_delay: Duration,
    /// Drop the first connection after this many scores, as a crashed
    /// client would. For exercising resumption.
    pub crash_after: Option<usize>,
}

impl Default for ClientOptions {
    fn default() -> Self {
        ClientOptions {
            token: String::new(),
            max_reconnects: 5,
            retry_delay: Duration::from_millis(200),
            crash_after: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClientSummary {
    pub scored: usize,
    pub reconnects: u32,
    pub end_note: String,
}

enum Outcome {
    Finished(String),
    Crashed,
}

/// Scores revisions one at a time until the server sends END. Lost
/// connections are retried with a fresh HELLO; session means restart on
/// every new connection.
pub fn run_client<A: ToSocketAddrs>(
    addr: A,
    engine: &ScoringEngine,
    opts: &ClientOptions,
) -> Result<ClientSummary, ClientError> {
    let addrs: Vec<_> = addr
        .to_socket_addrs()
        .map_err(|e| ClientError::ConnectionLost {
            attempts: 0,
            source: e.into(),
        })?
        .collect();
    let mut summary = ClientSummary::default();
    let mut crash_after = opts.crash_after;
    let mut attempts = 0;
    loop {
        attempts += 1;
        let result = TcpStream::connect(&addrs[..])
            .map_err(ProtocolError::from)
            .and_then(|stream| {
                session(
                    stream,
                    engine,
                    &opts.token,
                    crash_after.take(),
                    &mut summary.scored,
                )
            });
        let err = match result {
            Ok(Outcome::Finished(note)) => {
                summary.end_note = note;
                return Ok(summary);
            }
            Ok(Outcome::Crashed) => {
                log::info!(
                    "client dropped its connection after {} scores",
                    summary.scored
                );
                None
            }
            Err(ProtocolError::Violation(v)) => return Err(ClientError::ProtocolViolation(v)),
            Err(e) => Some(e),
        };
        if summary.reconnects >= opts.max_reconnects {
            return Err(ClientError::ConnectionLost {
                attempts,
                source: err.unwrap_or_else(|| {
                    ProtocolError::ConnectionLost(std::io::ErrorKind::ConnectionAborted.into())
                }),
            });
        }
        if let Some(e) = err {
            log::warn!("connection lost ({e}); reconnecting");
            thread::sleep(opts.retry_delay);
        }
        summary.reconnects += 1;
    }
}

fn session(
    stream: TcpStream,
    engine: &ScoringEngine,
    token: &str,
    crash_after: Option<usize>,
    scored: &mut usize,
) -> Result<Outcome, ProtocolError> {
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream.try_clone()?);
    write_frame(&mut writer, &Frame::hello(token))?;
    writer.flush()?;

    let mut scorer = SessionScorer::new(engine);
    let mut here = 0usize;
    loop {
        let frame = read_frame(&mut reader)?.ok_or_else(|| {
            ProtocolError::ConnectionLost(std::io::ErrorKind::UnexpectedEof.into())
        })?;
        match frame.kind {
            FrameKind::Revision => {
                let score = score_payload(&mut scorer, &frame.payload);
                write_frame(&mut writer, &Frame::score(frame.revision_id, score))?;
                writer.flush()?;
                *scored += 1;
                here += 1;
                if crash_after == Some(here) {
                    let _ = stream.shutdown(Shutdown::Both);
                    return Ok(Outcome::Crashed);
                }
            }
            FrameKind::End => {
                return Ok(Outcome::Finished(
                    String::from_utf8_lossy(&frame.payload).into_owned(),
                ))
            }
            other => {
                return Err(ProtocolError::Violation(format!(
                    "unexpected {other} frame from server"
                )))
            }
        }
    }
}
