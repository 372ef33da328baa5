//! File-based pipeline around the `sentilogit` library: each stage reads
//! the previous stage's artifacts from a working directory and writes its
//! own, and a full run adds a manifest of input and output hashes.

pub mod error;
pub mod inputs;
pub mod pipeline;
pub mod report;
pub mod stages;

pub use error::{ErrorClass, PipelineError, Stage};
pub use pipeline::{run, PipelineConfig, RunManifest, RunSummary};
