//! Streaming vandalism scorer: corpus ingest, state and model persistence,
//! the socket evaluation protocol (client and simulator), an HTTP endpoint,
//! a synthetic corpus generator and the batch harness behind the CLI.

pub mod archive;
pub mod client;
pub mod harness;
pub mod http;
pub mod ingest;
pub mod model_io;
pub mod protocol;
pub mod resources;
pub mod simulator;
pub mod synth;

pub use vandalscore_core as core;
