//! Audiobook catalog metadata and speaker opt-out handling.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CatalogChapter {
    pub chapter_id: String,
    pub audio_url: String,
    pub reader_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CatalogEntry {
    pub book_id: String,
    pub title: String,
    pub language: String,
    pub chapters: Vec<CatalogChapter>,
}

/// Parses an exclusion list: one speaker id per line, `#` comments.
pub fn parse_exclusions(src: &str) -> BTreeSet<String> {
    src.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(ToString::to_string)
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExclusionReport {
    pub chapters_removed: usize,
    pub books_removed: usize,
}

/// Drops every chapter with an excluded reader, then every book left
/// without chapters.
pub fn apply_exclusions(
    entries: Vec<CatalogEntry>,
    excluded: &BTreeSet<String>,
) -> (Vec<CatalogEntry>, ExclusionReport) {
    let mut report = ExclusionReport::default();
    let mut out = Vec::with_capacity(entries.len());
    for mut e in entries {
        let before = e.chapters.len();
        e.chapters
            .retain(|c| !c.reader_ids.iter().any(|r| excluded.contains(r)));
        report.chapters_removed += before - e.chapters.len();
        if e.chapters.is_empty() && before > 0 {
            report.books_removed += 1;
        } else {
            out.push(e);
        }
    }
    (out, report)
}
