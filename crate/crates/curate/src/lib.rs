//! File formats, audio IO, catalog ingest and the staged curation pipeline
//! built on `curate-core`.

pub mod config;
pub mod error;
pub mod external;
pub mod formats;
pub mod ingest;
pub mod jsonl;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod wav;

pub use error::{Error, Result};
