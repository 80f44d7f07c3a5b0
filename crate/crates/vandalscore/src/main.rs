use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use vandalscore::archive::{load_state, save_state, schema_table};
use vandalscore::client::{run_client, ClientOptions};
use vandalscore::harness::{
    benchmark, evaluate, load_corpus, raw_scores, score_batch, train_engine, LabeledCorpus,
};
use vandalscore::ingest::Record;
use vandalscore::model_io::{load_model, save_model};
use vandalscore::resources::bundled;
use vandalscore::simulator::{run_simulator, SimulatorOptions, DEFAULT_WINDOW};
use vandalscore::synth::{generate, SynthConfig};
use vandalscore_core::engine::featurize;
use vandalscore_core::split::{Partition, TimeSplit};
use vandalscore_core::{GbmParams, ScoringEngine};

#[derive(Parser)]
#[command(
    name = "vandalscore",
    version,
    about = "Vandalism scoring for Wikidata revisions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Part {
    Train,
    Validation,
    Test,
    All,
}

impl Part {
    fn select(self, corpus: &LabeledCorpus) -> Vec<Record> {
        let p = match self {
            Part::Train => Partition::Train,
            Part::Validation => Partition::Validation,
            Part::Test => Partition::Test,
            Part::All => return corpus.records.clone(),
        };
        corpus.partition(&TimeSplit::default(), p)
    }
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    state: PathBuf,
}

impl EngineArgs {
    fn load(&self) -> Result<ScoringEngine> {
        let store = load_state(&self.state)
            .with_context(|| format!("loading state from {}", self.state.display()))?;
        let model = load_model(&self.model)
            .with_context(|| format!("loading model from {}", self.model.display()))?;
        Ok(ScoringEngine::new(bundled(), store, model)?)
    }
}

#[derive(Args)]
struct Endpoint {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 5000)]
    port: u16,
}

impl Endpoint {
    fn addr(&self) -> String {
        format!("{}:{}", self.host, self.port)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic labelled corpus directory.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.01)]
        vandalism_rate: f64,
    },
    /// Count revisions and vandalism per time partition.
    Split {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Write the feature matrix of a partition as CSV.
    Extract {
        #[arg(long)]
        corpus: PathBuf,
        /// Existing state directory; built from the training partition when absent.
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        partition: Part,
        #[arg(long)]
        out: PathBuf,
        /// Also write the feature schema (slot, name, kind) to this path.
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Build the state from the training partition and fit the model.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 200)]
        rounds: u32,
        #[arg(long, default_value_t = 7)]
        depth: u32,
        #[arg(long, default_value_t = 0.3)]
        learning_rate: f64,
        /// Also write the feature schema (slot, name, kind) to this path.
        #[arg(long)]
        schema: Option<PathBuf>,
    },
    /// Score a partition and write `revisionId,score`.
    Score {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, value_enum, default_value = "test")]
        partition: Part,
        /// Skip session smoothing.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// ROC-AUC and PR-AUC of a scores file against the corpus labels.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        scores: PathBuf,
    },
    /// Connect to an evaluation server and answer its revisions.
    ServeClient {
        #[command(flatten)]
        endpoint: Endpoint,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, default_value = "")]
        token: String,
    },
    /// Replay a partition to one scoring client over the socket protocol.
    SimulateServer {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        endpoint: Endpoint,
        #[arg(long, value_enum, default_value = "test")]
        partition: Part,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long)]
        token: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve `POST /score`.
    ServeHttp {
        #[command(flatten)]
        endpoint: Endpoint,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Time the per-revision scoring path over a partition.
    Benchmark {
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        engine: EngineArgs,
        #[arg(long, value_enum, default_value = "test")]
        partition: Part,
    },
}

fn write_scores(path: &Path, scores: impl IntoIterator<Item = (u64, f64)>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["revisionId", "score"])?;
    for (id, s) in scores {
        w.write_record([id.to_string(), format!("{s:.9}")])?;
    }
    w.flush()?;
    Ok(())
}

fn read_scores(path: &Path) -> Result<HashMap<u64, f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = HashMap::new();
    for row in r.records() {
        let row = row?;
        let (Some(id), Some(s)) = (row.get(0), row.get(1)) else {
            bail!("short row in {}", path.display());
        };
        out.insert(id.trim().parse()?, s.trim().parse()?);
    }
    Ok(out)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Synth {
            out,
            n,
            seed,
            vandalism_rate,
        } => {
            let cfg = SynthConfig {
                n,
                seed,
                vandalism_rate,
                ..SynthConfig::default()
            };
            generate(&cfg)?.write_to_dir(&out)?;
            log::info!("wrote {} revisions to {}", n, out.display());
        }
        Command::Split { corpus } => {
            let corpus = load_corpus(&corpus)?;
            let split = TimeSplit::default();
            let mut counts: HashMap<Option<Partition>, (usize, usize)> = HashMap::new();
            for r in &corpus.records {
                let c = counts.entry(split.assign(r.rev.timestamp)).or_default();
                c.0 += 1;
                c.1 += usize::from(corpus.labels.get(&r.rev.revision_id) == Some(&true));
            }
            for p in Partition::ALL {
                let (n, v) = counts.get(&Some(p)).copied().unwrap_or_default();
                println!("{}\t{n}\t{v}", p.as_str());
            }
            let (n, v) = counts.get(&None).copied().unwrap_or_default();
            println!("outside\t{n}\t{v}");
        }
        Command::Extract {
            corpus,
            state,
            partition,
            out,
            schema,
        } => {
            let corpus = load_corpus(&corpus)?;
            let res = bundled();
            let store = match &state {
                Some(dir) if dir.join("MANIFEST").exists() => load_state(dir)?,
                _ => {
                    let train = Part::Train.select(&corpus);
                    let store = vandalscore_core::engine::build_state(
                        train.iter().map(|r| (&r.rev, &r.meta)),
                        corpus.privileged.iter().cloned(),
                        corpus.bots.iter().cloned(),
                        &res,
                    )?;
                    if let Some(dir) = &state {
                        save_state(&store, dir)?;
                    }
                    store
                }
            };
            if let Some(path) = &schema {
                fs::write(path, schema_table(&store))?;
            }
            let mut w = csv::Writer::from_path(&out)?;
            let mut header = vec!["revisionId".to_string(), "label".to_string()];
            header.extend(store.schema().slots().iter().map(|s| s.name.clone()));
            w.write_record(&header)?;
            for r in partition.select(&corpus) {
                let (_, v) = featurize(&r.rev, &r.meta, &res, &store)?;
                let label = match corpus.labels.get(&r.rev.revision_id) {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "",
                };
                let mut row = vec![r.rev.revision_id.to_string(), label.to_string()];
                row.extend(v.values.iter().map(f64::to_string));
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        Command::Train {
            corpus,
            model,
            state,
            rounds,
            depth,
            learning_rate,
            schema,
        } => {
            let corpus = load_corpus(&corpus)?;
            let params = GbmParams {
                rounds,
                max_depth: depth,
                learning_rate,
                ..GbmParams::default()
            };
            let train = Part::Train.select(&corpus);
            log::info!("training on {} revisions", train.len());
            let engine = train_engine(
                &train,
                &corpus.labels,
                &corpus.privileged,
                &corpus.bots,
                &bundled(),
                &params,
            )?;
            save_state(engine.store(), &state)?;
            save_model(engine.model(), &model)?;
            if let Some(path) = &schema {
                fs::write(path, schema_table(engine.store()))?;
            }
        }
        Command::Score {
            corpus,
            engine,
            partition,
            raw,
            out,
        } => {
            let corpus = load_corpus(&corpus)?;
            let engine = engine.load()?;
            let records = partition.select(&corpus);
            let scores = if raw {
                raw_scores(&engine, &records)
            } else {
                score_batch(&engine, &records)
            };
            write_scores(&out, records.iter().map(|r| r.rev.revision_id).zip(scores))?;
        }
        Command::Evaluate { corpus, scores } => {
            let corpus = load_corpus(&corpus)?;
            let scores = read_scores(&scores)?;
            let records: Vec<Record> = corpus
                .records
                .iter()
                .filter(|r| scores.contains_key(&r.rev.revision_id))
                .cloned()
                .collect();
            let s: Vec<f64> = records.iter().map(|r| scores[&r.rev.revision_id]).collect();
            let report = evaluate(&s, &records, &corpus.labels)?;
            println!(
                "revisions\t{}\nvandalism\t{}\nroc_auc\t{:.6}\npr_auc\t{:.6}",
                report.revisions, report.vandalism, report.roc_auc, report.pr_auc
            );
        }
        Command::ServeClient {
            endpoint,
            engine,
            token,
        } => {
            let engine = engine.load()?;
            let opts = ClientOptions {
                token,
                ..ClientOptions::default()
            };
            let summary = run_client(endpoint.addr(), &engine, &opts)?;
            log::info!(
                "scored {} revisions, {} reconnects, server said {:?}",
                summary.scored,
                summary.reconnects,
                summary.end_note
            );
        }
        Command::SimulateServer {
            corpus,
            endpoint,
            partition,
            window,
            token,
            out,
        } => {
            let corpus = load_corpus(&corpus)?;
            let records = partition.select(&corpus);
            let listener = TcpListener::bind(endpoint.addr())?;
            log::info!(
                "replaying {} revisions on {}",
                records.len(),
                endpoint.addr()
            );
            let opts = SimulatorOptions {
                window,
                token,
                ..SimulatorOptions::default()
            };
            let report = run_simulator(&listener, &records, &corpus.labels, &opts)?;
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "scored\t{}", report.scored)?;
            writeln!(stdout, "max_outstanding\t{}", report.max_outstanding)?;
            writeln!(stdout, "reconnects\t{}", report.reconnects)?;
            if let (Some(roc), Some(pr)) = (report.roc_auc, report.pr_auc) {
                writeln!(stdout, "roc_auc\t{roc:.6}\npr_auc\t{pr:.6}")?;
            }
            writeln!(stdout, "throughput\t{:.1}", report.throughput)?;
            writeln!(
                stdout,
                "latency_ms\tmean {:.3} p50 {:.3} p99 {:.3} max {:.3}",
                report.latency.mean_ms,
                report.latency.p50_ms,
                report.latency.p99_ms,
                report.latency.max_ms
            )?;
            if let Some(out) = out {
                write_scores(&out, report.scores)?;
            }
        }
        Command::ServeHttp { endpoint, engine } => {
            let engine = engine.load()?;
            let server = tiny_http::Server::http(endpoint.addr())
                .map_err(|e| anyhow::anyhow!("cannot bind {}: {e}", endpoint.addr()))?;
            log::info!("listening on http://{}/score", endpoint.addr());
            vandalscore::http::serve_http(&server, &engine, None);
        }
        Command::Benchmark {
            corpus,
            engine,
            partition,
        } => {
            let corpus = load_corpus(&corpus)?;
            let engine = engine.load()?;
            let records = partition.select(&corpus);
            if records.is_empty() {
                bail!("partition has no revisions");
            }
            let b = benchmark(&engine, &records);
            println!(
                "revisions\t{}\nseconds\t{:.3}\nthroughput\t{:.1}",
                b.revisions, b.seconds, b.throughput
            );
        }
    }
    Ok(())
}
