//! Utterance and chapter manifests.
//!
//! One JSON object per line. Known fields are written in the declaration
//! order of [`UtteranceRecord`]; unknown fields survive a read/write round
//! trip and follow in key order.

use std::collections::BTreeSet;
use std::path::Path;

use curate_core::{ChapterRecord, UtteranceRecord};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::jsonl::{read_jsonl, write_jsonl};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    #[serde(flatten)]
    pub record: UtteranceRecord,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl From<UtteranceRecord> for ManifestRow {
    fn from(record: UtteranceRecord) -> Self {
        ManifestRow {
            record,
            extra: Map::new(),
        }
    }
}

/// Reads a manifest, validating each record and rejecting duplicate ids.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let rows: Vec<(usize, ManifestRow)> = read_jsonl(path)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let err = |source| Error::Record {
            path: path.to_path_buf(),
            line,
            source,
        };
        row.record.validate().map_err(err)?;
        if !seen.insert(row.record.utterance_id.clone()) {
            return Err(err(curate_core::Error::Duplicate(row.record.utterance_id)));
        }
        out.push(row);
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<UtteranceRecord>> {
    Ok(read_manifest(path)?.into_iter().map(|r| r.record).collect())
}

pub fn write_manifest(rows: &[ManifestRow], path: &Path) -> Result<()> {
    write_jsonl(path, rows)
}

pub fn write_records(records: &[UtteranceRecord], path: &Path) -> Result<()> {
    write_jsonl(path, records)
}

pub fn read_chapters(path: &Path) -> Result<Vec<ChapterRecord>> {
    let rows: Vec<(usize, ChapterRecord)> = read_jsonl(path)?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(rows.len());
    for (line, ch) in rows {
        let err = |source| Error::Record {
            path: path.to_path_buf(),
            line,
            source,
        };
        ch.validate().map_err(err)?;
        if !seen.insert(ch.chapter_id.clone()) {
            return Err(err(curate_core::Error::Duplicate(ch.chapter_id)));
        }
        out.push(ch);
    }
    Ok(out)
}

pub fn write_chapters(chapters: &[ChapterRecord], path: &Path) -> Result<()> {
    write_jsonl(path, chapters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use curate_core::{Gender, Seconds, TextSource};
    use proptest::prelude::*;
    use serde_json::json;

    fn chapter() -> ChapterRecord {
        ChapterRecord {
            chapter_id: "c1".into(),
            book_id: "b1".into(),
            speaker_id: "s1".into(),
            audio_path: "c1.flac".into(),
            sample_rate_hz: 44_100,
            bandwidth_hz: Some(12_000),
            book_text_path: None,
            gender: Gender::Female,
        }
    }

    fn row(id: &str) -> ManifestRow {
        UtteranceRecord::new(
            id,
            &chapter(),
            Seconds::ZERO,
            Seconds::from_ticks(20_000),
            "hello there",
        )
        .into()
    }

    #[test]
    fn duplicate_id_reports_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        write_manifest(&[row("a"), row("b"), row("a")], &p).unwrap();
        match read_manifest(&p) {
            Err(Error::Record { line: 3, source, .. }) => assert!(matches!(source, curate_core::Error::Duplicate(_))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_record_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        let mut bad = row("a");
        bad.record.duration_s = Seconds::ZERO;
        write_manifest(&[row("ok"), bad], &p).unwrap();
        assert!(matches!(read_manifest(&p), Err(Error::Record { line: 2, .. })));
    }

    proptest! {
        #[test]
        fn round_trip_keeps_known_and_extra_fields(
            offset in 0i64..100_000_000,
            duration in 1i64..1_000_000,
            bw in proptest::option::of(0u32..30_000),
            cer in proptest::option::of(0.0f64..500.0),
            speakers in proptest::option::of(1u32..5),
            text in "[A-Za-z ,.'\"]{1,40}",
            extra_n in any::<i64>(),
            extra_s in "\\PC{0,12}",
        ) {
            let mut r = row("u_0001");
            r.record.offset_s = Seconds::from_ticks(offset);
            r.record.duration_s = Seconds::from_ticks(duration);
            r.record.bandwidth_hz = bw;
            r.record.cer_pct = cer;
            r.record.num_speakers = speakers;
            r.record.text = text;
            r.record.text_source = Some(TextSource::BookMatch);
            r.extra.insert("zz_note".into(), json!(extra_s));
            r.extra.insert("aa_count".into(), json!(extra_n));
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("m.jsonl");
            write_manifest(std::slice::from_ref(&r), &p).unwrap();
            let back = read_manifest(&p).unwrap();
            prop_assert_eq!(&back, &vec![r]);
            // a second write is byte-identical
            let q = dir.path().join("m2.jsonl");
            write_manifest(&back, &q).unwrap();
            prop_assert_eq!(std::fs::read(&p).unwrap(), std::fs::read(&q).unwrap());
        }
    }
}
