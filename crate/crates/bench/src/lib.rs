//! Command-line harness around `multipath-core`: run configuration, the HTTP
//! text client, the external prover bridge, dataset files, the pipeline
//! stages and report writers.

pub mod config;
pub mod dataset;
pub mod error;
pub mod http;
pub mod pipeline;
pub mod prover;
pub mod report;

pub use config::RunConfig;
pub use error::{BenchError, ExitCode};
