//! Batch training, scoring, evaluation and timing over a corpus directory.

use std::collections::HashMap;
use std::fs::{self, File};
use std::path::Path;
use std::time::Instant;

use thiserror::Error;
use vandalscore_core::engine::{build_state, EngineError};
use vandalscore_core::gbm::{train, Dataset, GbmError};
use vandalscore_core::metrics::{pr_auc, roc_auc, MetricError};
use vandalscore_core::split::{Partition, TimeSplit};
use vandalscore_core::{GbmParams, Resources, ScoringEngine, SessionScorer};

use crate::client::{parse_payload, DEFAULT_SCORE};
use crate::ingest::{parse_metadata_csv, parse_truth_csv, stream_corpus, IngestError, Record};
use crate::protocol::revision_payload;
use crate::resources::read_name_list;
use crate::synth::{
    SynthCorpus, BOTS_FILE, META_FILE, PRIVILEGED_FILE, REVISIONS_FILE, TRUTH_FILE,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Model(#[from] GbmError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{0}")]
    Empty(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Records in stream order with their labels and the user lists that go
/// into the state store.
#[derive(Debug, Default)]
pub struct LabeledCorpus {
    pub records: Vec<Record>,
    pub labels: HashMap<u64, bool>,
    pub privileged: Vec<String>,
    pub bots: Vec<String>,
    /// Revision blocks that failed to parse.
    pub skipped: usize,
}

impl LabeledCorpus {
    /// Parses the serialized forms, so the records match what a corpus
    /// directory written from `synth` would load.
    pub fn from_synth(c: &SynthCorpus) -> Self {
        let corpus = stream_corpus(&c.revisions_xml(), c.metas.clone());
        LabeledCorpus {
            skipped: corpus.errors.len(),
            records: corpus.records,
            labels: c
                .truth
                .iter()
                .map(|t| (t.revision_id, t.rollback_reverted))
                .collect(),
            privileged: c.privileged.clone(),
            bots: c.bots.clone(),
        }
    }

    /// Records of one partition, in stream order. An empty partition is
    /// logged, not an error.
    pub fn partition(&self, split: &TimeSplit, p: Partition) -> Vec<Record> {
        let out: Vec<Record> = self
            .records
            .iter()
            .filter(|r| split.assign(r.rev.timestamp) == Some(p))
            .cloned()
            .collect();
        if out.is_empty() {
            log::warn!("{} partition is empty", p.as_str());
        }
        out
    }
}

/// Loads `revisions.xml`, `meta.csv` and `truth.csv` from `dir`, plus the
/// optional `privileged.txt` and `bots.txt`.
pub fn load_corpus(dir: &Path) -> Result<LabeledCorpus, HarnessError> {
    let xml = fs::read_to_string(dir.join(REVISIONS_FILE))?;
    let metas = match File::open(dir.join(META_FILE)) {
        Ok(f) => parse_metadata_csv(f)?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    let labels = match File::open(dir.join(TRUTH_FILE)) {
        Ok(f) => parse_truth_csv(f)?
            .into_iter()
            .map(|t| (t.revision_id, t.rollback_reverted))
            .collect(),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => HashMap::new(),
        Err(e) => return Err(e.into()),
    };
    let optional = |name: &str| {
        let path = dir.join(name);
        read_name_list(path.exists().then_some(path.as_path()))
    };
    let corpus = stream_corpus(&xml, metas);
    Ok(LabeledCorpus {
        skipped: corpus.errors.len(),
        records: corpus.records,
        labels,
        privileged: optional(PRIVILEGED_FILE)?,
        bots: optional(BOTS_FILE)?,
    })
}

/// Builds the state from `train_records`, featurizes the labelled ones and
/// fits the model. Unlabelled revisions still count toward frequencies.
pub fn train_engine(
    train_records: &[Record],
    labels: &HashMap<u64, bool>,
    privileged: &[String],
    bots: &[String],
    resources: &Resources,
    params: &GbmParams,
) -> Result<ScoringEngine, HarnessError> {
    let store = build_state(
        train_records.iter().map(|r| (&r.rev, &r.meta)),
        privileged.iter().cloned(),
        bots.iter().cloned(),
        resources,
    )
    .map_err(EngineError::from)?;
    let mut rows = Vec::with_capacity(train_records.len());
    let mut y = Vec::with_capacity(train_records.len());
    for r in train_records {
        let Some(&label) = labels.get(&r.rev.revision_id) else {
            continue;
        };
        let (_, v) = vandalscore_core::engine::featurize(&r.rev, &r.meta, resources, &store)
            .map_err(EngineError::from)?;
        rows.push(v);
        y.push(label);
    }
    if rows.is_empty() {
        return Err(HarnessError::Empty("no labelled training revisions".into()));
    }
    let data = Dataset::from_vectors(&rows)?;
    let model = train(&data, &y, params)?;
    Ok(ScoringEngine::new(resources.clone(), store, model)?)
}

/// Final scores in stream order, with fresh session means.
pub fn score_batch(engine: &ScoringEngine, records: &[Record]) -> Vec<f64> {
    let mut scorer = SessionScorer::new(engine);
    records
        .iter()
        .map(|r| {
            scorer.score(&r.rev, &r.meta).unwrap_or_else(|e| {
                log::warn!("revision {}: {e}", r.rev.revision_id);
                DEFAULT_SCORE
            })
        })
        .collect()
}

/// Model probabilities without session smoothing.
pub fn raw_scores(engine: &ScoringEngine, records: &[Record]) -> Vec<f64> {
    records
        .iter()
        .map(|r| match engine.raw_score(&r.rev, &r.meta) {
            Ok((_, s)) => s,
            Err(e) => {
                log::warn!("revision {}: {e}", r.rev.revision_id);
                DEFAULT_SCORE
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub revisions: usize,
    pub vandalism: usize,
    pub roc_auc: f64,
    pub pr_auc: f64,
}

/// ROC-AUC and PR-AUC over the records that have a label.
pub fn evaluate(
    scores: &[f64],
    records: &[Record],
    labels: &HashMap<u64, bool>,
) -> Result<MetricReport, HarnessError> {
    let mut s = Vec::with_capacity(records.len());
    let mut y = Vec::with_capacity(records.len());
    for (score, r) in scores.iter().zip(records) {
        if let Some(&label) = labels.get(&r.rev.revision_id) {
            s.push(*score);
            y.push(label);
        }
    }
    if s.is_empty() {
        return Err(HarnessError::Empty(
            "no labelled revisions to evaluate".into(),
        ));
    }
    Ok(MetricReport {
        revisions: s.len(),
        vandalism: y.iter().filter(|&&b| b).count(),
        roc_auc: roc_auc(&s, &y)?,
        pr_auc: pr_auc(&s, &y)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchReport {
    pub revisions: usize,
    pub seconds: f64,
    pub throughput: f64,
}

/// Times the full per-revision path: wire payload parse, featurization,
/// prediction and session smoothing.
pub fn benchmark(engine: &ScoringEngine, records: &[Record]) -> BenchReport {
    let payloads: Vec<String> = records
        .iter()
        .map(|r| revision_payload(&r.xml, &r.meta_line))
        .collect();
    let mut scorer = SessionScorer::new(engine);
    let started = Instant::now();
    let mut sink = 0.0;
    for p in &payloads {
        sink += match parse_payload(p) {
            Ok((rev, meta)) => scorer.score(&rev, &meta).unwrap_or(DEFAULT_SCORE),
            Err(_) => DEFAULT_SCORE,
        };
    }
    let seconds = started.elapsed().as_secs_f64();
    log::debug!("benchmark checksum {sink}");
    BenchReport {
        revisions: payloads.len(),
        seconds,
        throughput: payloads.len() as f64 / seconds.max(1e-9),
    }
}
