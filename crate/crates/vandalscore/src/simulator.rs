//! Replays a corpus to one scoring client with a bounded number of
//! revisions outstanding, and reports ranking quality and latency.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};
use std::time::{Duration, Instant};

use thiserror::Error;
use vandalscore_core::metrics::{pr_auc, roc_auc};

use crate::ingest::Record;
use crate::protocol::{read_frame, write_frame, Frame, FrameKind, ProtocolError};

pub const DEFAULT_WINDOW: usize = 16;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("client misbehaved: {0}")]
    ClientMisbehavior(String),
    #[error("client disconnected {0} times; giving up")]
    TooManyReconnects(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct SimulatorOptions {
    pub window: usize,
    /// Required HELLO token; any token is accepted when `None`.
    pub token: Option<String>,
    pub max_reconnects: u32,
}

impl Default for SimulatorOptions {
    fn default() -> Self {
        SimulatorOptions {
            window: DEFAULT_WINDOW,
            token: None,
            max_reconnects: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LatencyStats {
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
}

impl LatencyStats {
    pub fn from_samples(samples: &mut [Duration]) -> LatencyStats {
        if samples.is_empty() {
            return LatencyStats::default();
        }
        samples.sort_unstable();
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        let at = |q: f64| ms(samples[((samples.len() - 1) as f64 * q).round() as usize]);
        LatencyStats {
            mean_ms: samples.iter().map(|&d| ms(d)).sum::<f64>() / samples.len() as f64,
            p50_ms: at(0.5),
            p99_ms: at(0.99),
            max_ms: ms(*samples.last().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub scored: usize,
    pub max_outstanding: usize,
    pub reconnects: u32,
    pub roc_auc: Option<f64>,
    pub pr_auc: Option<f64>,
    pub latency: LatencyStats,
    pub seconds: f64,
    pub throughput: f64,
    /// `(revisionId, score)` in corpus order.
    pub scores: Vec<(u64, f64)>,
}

struct Replay<'a> {
    records: &'a [Record],
    index: HashMap<u64, usize>,
    window: usize,
    next: usize,
    outstanding: BTreeMap<u64, Instant>,
    max_outstanding: usize,
    scores: Vec<Option<f64>>,
    scored: usize,
    latencies: Vec<Duration>,
}

impl Replay<'_> {
    fn send(&mut self, w: &mut impl Write, i: usize) -> Result<(), ProtocolError> {
        let r = &self.records[i];
        write_frame(w, &Frame::revision(r.rev.revision_id, &r.xml, &r.meta_line))?;
        self.outstanding.insert(r.rev.revision_id, Instant::now());
        self.max_outstanding = self.max_outstanding.max(self.outstanding.len());
        assert!(
            self.outstanding.len() <= self.window,
            "outstanding window exceeded"
        );
        Ok(())
    }

    fn fill(&mut self, w: &mut impl Write) -> Result<(), ProtocolError> {
        while self.outstanding.len() < self.window && self.next < self.records.len() {
            self.send(w, self.next)?;
            self.next += 1;
        }
        Ok(())
    }

    fn done(&self) -> bool {
        self.scored == self.records.len()
    }
}

/// Why a connection ended early.
enum Stop {
    Lost,
    Fatal(SimError),
}

impl From<ProtocolError> for Stop {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::ConnectionLost(_) => Stop::Lost,
            ProtocolError::Violation(v) => Stop::Fatal(SimError::ClientMisbehavior(v)),
        }
    }
}

impl From<std::io::Error> for Stop {
    fn from(_: std::io::Error) -> Self {
        Stop::Lost
    }
}

fn misbehave(w: &mut impl Write, msg: String) -> Stop {
    let _ = write_frame(w, &Frame::end(&format!("error: {msg}")));
    let _ = w.flush();
    Stop::Fatal(SimError::ClientMisbehavior(msg))
}

/// Serves `records` in order to clients accepted on `listener` until every
/// revision has a score. A client that drops out may reconnect; revisions
/// it had not answered are sent again.
pub fn run_simulator(
    listener: &TcpListener,
    records: &[Record],
    truth: &HashMap<u64, bool>,
    opts: &SimulatorOptions,
) -> Result<SimReport, SimError> {
    let window = opts.window.max(1);
    let mut replay = Replay {
        records,
        index: records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.rev.revision_id, i))
            .collect(),
        window,
        next: 0,
        outstanding: BTreeMap::new(),
        max_outstanding: 0,
        scores: vec![None; records.len()],
        scored: 0,
        latencies: Vec::with_capacity(records.len()),
    };
    let mut started = None;
    let mut reconnects = 0;
    loop {
        let (stream, peer) = listener.accept()?;
        log::info!("client connected from {peer}");
        match serve_connection(stream, &mut replay, opts, &mut started) {
            Ok(()) => break,
            Err(Stop::Fatal(e)) => return Err(e),
            Err(Stop::Lost) => {
                reconnects += 1;
                if reconnects > opts.max_reconnects {
                    return Err(SimError::TooManyReconnects(reconnects));
                }
                log::warn!(
                    "client disconnected with {} revisions outstanding",
                    replay.outstanding.len()
                );
            }
        }
    }

    let seconds = started.map_or(0.0, |s: Instant| s.elapsed().as_secs_f64());
    let scores: Vec<(u64, f64)> = records
        .iter()
        .zip(&replay.scores)
        .map(|(r, s)| (r.rev.revision_id, s.expect("every revision scored")))
        .collect();
    let (labelled, labels): (Vec<f64>, Vec<bool>) = scores
        .iter()
        .filter_map(|(id, s)| truth.get(id).map(|&y| (*s, y)))
        .unzip();
    Ok(SimReport {
        scored: replay.scored,
        max_outstanding: replay.max_outstanding,
        reconnects,
        roc_auc: roc_auc(&labelled, &labels).ok(),
        pr_auc: pr_auc(&labelled, &labels).ok(),
        latency: LatencyStats::from_samples(&mut replay.latencies),
        seconds,
        throughput: if seconds > 0.0 {
            replay.scored as f64 / seconds
        } else {
            0.0
        },
        scores,
    })
}

fn serve_connection(
    stream: TcpStream,
    replay: &mut Replay<'_>,
    opts: &SimulatorOptions,
    started: &mut Option<Instant>,
) -> Result<(), Stop> {
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut w = BufWriter::new(stream);

    let hello = match read_frame(&mut reader) {
        Ok(Some(f)) => f,
        Ok(None) | Err(ProtocolError::ConnectionLost(_)) => return Err(Stop::Lost),
        Err(ProtocolError::Violation(v)) => return Err(misbehave(&mut w, v)),
    };
    if hello.kind != FrameKind::Hello {
        return Err(misbehave(
            &mut w,
            format!("expected HELLO, got {}", hello.kind),
        ));
    }
    if let Some(token) = &opts.token {
        if hello.payload != token.as_bytes() {
            return Err(misbehave(&mut w, "bad token".into()));
        }
    }
    started.get_or_insert_with(Instant::now);

    let mut resend: Vec<usize> = replay
        .outstanding
        .keys()
        .map(|id| replay.index[id])
        .collect();
    resend.sort_unstable();
    for i in resend {
        replay.send(&mut w, i)?;
    }
    replay.fill(&mut w)?;
    if replay.done() {
        write_frame(&mut w, &Frame::end(""))?;
        w.flush()?;
        return Ok(());
    }
    w.flush()?;

    loop {
        let frame = match read_frame(&mut reader) {
            Ok(Some(f)) => f,
            Ok(None) | Err(ProtocolError::ConnectionLost(_)) => return Err(Stop::Lost),
            Err(ProtocolError::Violation(v)) => return Err(misbehave(&mut w, v)),
        };
        if frame.kind != FrameKind::Score {
            return Err(misbehave(
                &mut w,
                format!("unexpected {} frame", frame.kind),
            ));
        }
        let Some(sent) = replay.outstanding.remove(&frame.revision_id) else {
            return Err(misbehave(
                &mut w,
                format!(
                    "score for revision {} which is not outstanding",
                    frame.revision_id
                ),
            ));
        };
        let score = match frame.score_value() {
            Ok(s) => s,
            Err(e) => return Err(misbehave(&mut w, e.to_string())),
        };
        replay.latencies.push(sent.elapsed());
        replay.scores[replay.index[&frame.revision_id]] = Some(score);
        replay.scored += 1;
        if replay.done() {
            write_frame(&mut w, &Frame::end(""))?;
            w.flush()?;
            return Ok(());
        }
        replay.fill(&mut w)?;
        w.flush()?;
    }
}
