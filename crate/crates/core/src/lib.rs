//! Core algorithms for curating audiobook speech into a TTS training corpus.
//!
//! Everything here is pure and allocation-only (`no_std` + `alloc`): the
//! record model, resampling and silence trimming, spectral bandwidth
//! estimation, pause-based segmentation, transcript restoration and
//! validation, and subset/split construction. File formats, audio decoding,
//! HTTP and orchestration live in the `curate` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod audio;
pub mod bandwidth;
pub mod catalog;
pub mod curation;
mod error;
mod fft;
pub mod record;
pub mod rng;
pub mod segmentation;
pub mod text;
pub mod time;

pub use error::{Error, Result};
pub use record::{ChapterRecord, Gender, SubsetSpec, TextSource, UtteranceRecord};
pub use time::Seconds;
