//! Readers for the externally produced inputs: forced alignments, ASR
//! hypotheses, speaker counts, similarity scores and predicted text.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use curate_core::curation::{SimilarityMap, SpeakerCount};
use curate_core::segmentation::AlignmentToken;
use curate_core::Seconds;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::jsonl::read_jsonl;

/// One aligned word as aligners usually emit it, times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordTiming {
    pub word: String,
    pub start: f64,
    pub end: f64,
}

impl From<&WordTiming> for AlignmentToken {
    fn from(w: &WordTiming) -> Self {
        AlignmentToken {
            word: w.word.clone(),
            start_s: Seconds::from_secs_f64(w.start),
            end_s: Seconds::from_secs_f64(w.end),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlignmentRow {
    pub utterance_id: String,
    pub alignment: Vec<WordTiming>,
}

pub type Alignments = BTreeMap<String, Vec<AlignmentToken>>;

fn convert(words: &[WordTiming]) -> Vec<AlignmentToken> {
    words.iter().map(AlignmentToken::from).collect()
}

/// Loads word alignments keyed by utterance id from a directory of
/// `{utterance_id}.json` arrays, a `.ctm` file, or a JSONL file of
/// [`AlignmentRow`]s.
pub fn read_alignments(path: &Path) -> Result<Alignments> {
    if path.is_dir() {
        return read_alignment_dir(path);
    }
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext.eq_ignore_ascii_case("ctm") {
        let src = fs::read_to_string(path).map_err(io_err(path))?;
        return parse_ctm(&src).map_err(|(line, message)| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        });
    }
    let mut out = Alignments::new();
    for (line, row) in read_jsonl::<AlignmentRow>(path)? {
        if out.insert(row.utterance_id.clone(), convert(&row.alignment)).is_some() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("duplicate alignment for {}", row.utterance_id),
            });
        }
    }
    Ok(out)
}

fn read_alignment_dir(dir: &Path) -> Result<Alignments> {
    let mut out = Alignments::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let src = fs::read_to_string(&path).map_err(io_err(&path))?;
        let words: Vec<WordTiming> = serde_json::from_str(&src).map_err(|e| Error::Parse {
            path: path.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        out.insert(id.to_string(), convert(&words));
    }
    Ok(out)
}

/// `utt channel start duration word [confidence]` per line; `;;` starts a
/// comment.
pub fn parse_ctm(src: &str) -> std::result::Result<Alignments, (usize, String)> {
    let mut out = Alignments::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with(";;") {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 5 {
            return Err((i + 1, format!("expected at least 5 fields, got {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| (i + 1, format!("`{s}`: {e}")));
        let start = num(f[2])?;
        let dur = num(f[3])?;
        out.entry(f[0].to_string()).or_default().push(AlignmentToken {
            word: f[4].to_string(),
            start_s: Seconds::from_secs_f64(start),
            end_s: Seconds::from_secs_f64(start + dur),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hypothesis {
    pub utterance_id: String,
    pub hyp_text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictedText {
    pub utterance_id: String,
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Similarity {
    pub context_id: String,
    pub target_id: String,
    pub sim: f64,
}

fn keyed<T: serde::de::DeserializeOwned>(path: &Path, key: impl Fn(&T) -> &str) -> Result<BTreeMap<String, T>> {
    let mut out = BTreeMap::new();
    for (line, row) in read_jsonl::<T>(path)? {
        let k = key(&row).to_string();
        if out.contains_key(&k) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("duplicate entry for {k}"),
            });
        }
        out.insert(k, row);
    }
    Ok(out)
}

/// ASR hypotheses keyed by utterance id.
pub fn read_hypotheses(path: &Path) -> Result<BTreeMap<String, String>> {
    Ok(keyed(path, |h: &Hypothesis| &h.utterance_id)?
        .into_iter()
        .map(|(k, h)| (k, h.hyp_text))
        .collect())
}

/// Externally punctuated text for transcripts that had no book match.
pub fn read_predicted_text(path: &Path) -> Result<BTreeMap<String, String>> {
    Ok(keyed(path, |p: &PredictedText| &p.utterance_id)?
        .into_iter()
        .map(|(k, p)| (k, p.text))
        .collect())
}

/// Diarization counts in file order; duplicates are left for
/// `apply_speaker_counts` to report.
pub fn read_speaker_counts(path: &Path) -> Result<Vec<SpeakerCount>> {
    Ok(read_jsonl(path)?.into_iter().map(|(_, c)| c).collect())
}

pub fn read_similarities(path: &Path) -> Result<SimilarityMap> {
    let mut out = SimilarityMap::new();
    for (line, s) in read_jsonl::<Similarity>(path)? {
        if !s.sim.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("similarity {} is not finite", s.sim),
            });
        }
        out.insert((s.context_id, s.target_id), s.sim);
    }
    Ok(out)
}
