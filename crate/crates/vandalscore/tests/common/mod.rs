#![allow(dead_code)]

use std::sync::OnceLock;

use vandalscore::harness::{train_engine, LabeledCorpus};
use vandalscore::resources::bundled;
use vandalscore::synth::{generate, SynthConfig};
use vandalscore_core::split::{Partition, TimeSplit};
use vandalscore_core::{GbmParams, ScoringEngine};

pub struct Fixture {
    pub corpus: LabeledCorpus,
    pub engine: ScoringEngine,
}

/// A small corpus and a quickly trained engine, shared by a test binary.
pub fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let synth = generate(&SynthConfig {
            n: 4000,
            seed: 99,
            vandalism_rate: 0.05,
            ..SynthConfig::default()
        })
        .unwrap();
        let corpus = LabeledCorpus::from_synth(&synth);
        let train = corpus.partition(&TimeSplit::default(), Partition::Train);
        let params = GbmParams {
            rounds: 25,
            max_depth: 5,
            ..GbmParams::default()
        };
        let engine = train_engine(
            &train,
            &corpus.labels,
            &corpus.privileged,
            &corpus.bots,
            &bundled(),
            &params,
        )
        .unwrap();
        Fixture { corpus, engine }
    })
}
