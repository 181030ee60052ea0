//! Splitting long utterances at the longest pause after a sentence end.
//!
//! Alignment tokens pair positionally with the transcript's words (chunks
//! that are pure punctuation are skipped). A word ending in a period that is
//! not an abbreviation, followed by a gap of at least `min_pause`, is a
//! candidate; the longest candidate wins and the utterance is cut at its
//! midpoint. Ties are broken with a generator seeded per utterance.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::rng::{fnv1a64, SplitMix64};
use crate::text::{align, is_pc, strip_pc};
use crate::time::Seconds;
use crate::{Error, Result, UtteranceRecord};

/// Shortest gap that may end a sentence.
pub const DEFAULT_MIN_PAUSE: Seconds = Seconds::from_ticks(800);

const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

/// Closing marks that may follow a sentence-final period.
const CLOSERS: &[char] = &['\'', '"', '`', '\u{2019}', '\u{201d}', ')', ']'];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentToken {
    pub word: String,
    pub start_s: Seconds,
    pub end_s: Seconds,
}

/// Word timings for one utterance, time-ordered and non-overlapping.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlignmentTrack {
    tokens: Vec<AlignmentToken>,
}

impl AlignmentTrack {
    pub fn new(tokens: Vec<AlignmentToken>) -> Result<Self> {
        for (i, t) in tokens.iter().enumerate() {
            if t.start_s > t.end_s {
                return Err(Error::Invariant {
                    field: "alignment",
                    reason: format!("token {i} `{}` ends before it starts", t.word),
                });
            }
            if i > 0 && tokens[i - 1].end_s > t.start_s {
                return Err(Error::Invariant {
                    field: "alignment",
                    reason: format!("token {i} `{}` overlaps its predecessor", t.word),
                });
            }
        }
        Ok(AlignmentTrack { tokens })
    }

    pub fn tokens(&self) -> &[AlignmentToken] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Shifts every token by `-origin`, e.g. from the chapter timeline to
    /// the utterance timeline.
    pub fn rebased(&self, origin: Seconds) -> Self {
        let tokens = self
            .tokens
            .iter()
            .map(|t| AlignmentToken {
                word: t.word.clone(),
                start_s: t.start_s - origin,
                end_s: t.end_s - origin,
            })
            .collect();
        AlignmentTrack { tokens }
    }
}

/// Case-insensitive set of words whose trailing period is not a sentence end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Abbreviations(BTreeSet<String>);

impl Default for Abbreviations {
    fn default() -> Self {
        Self::parse(DEFAULT_ABBREVIATIONS)
    }
}

impl Abbreviations {
    /// One word per line; `#` starts a comment; periods are ignored.
    pub fn parse(src: &str) -> Self {
        let words = src
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|w| w.trim_matches('.').to_lowercase())
            .collect();
        Abbreviations(words)
    }

    pub fn contains(&self, word: &str) -> bool {
        let core = word.trim_matches(is_pc).to_lowercase();
        self.0.contains(&core)
    }
}

/// A gap between two aligned words that follows a sentence end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pause {
    pub start_s: Seconds,
    pub end_s: Seconds,
    /// Index of the period-final word among the transcript's whitespace
    /// chunks.
    pub word_index: usize,
}

impl Pause {
    pub fn gap(&self) -> Seconds {
        self.end_s - self.start_s
    }

    /// Midpoint, rounded down to the 100 µs grid.
    pub fn midpoint(&self) -> Seconds {
        Seconds::from_ticks((self.start_s.ticks() + self.end_s.ticks()).div_euclid(2))
    }
}

fn ends_sentence(word: &str) -> bool {
    word.trim_end_matches(CLOSERS).ends_with('.')
}

/// Gaps after period-final, non-abbreviation words that last at least
/// `min_pause`.
pub fn find_candidate_pauses(
    track: &AlignmentTrack,
    transcript: &str,
    min_pause: Seconds,
    abbreviations: &Abbreviations,
) -> Result<Vec<Pause>> {
    let words: Vec<(usize, &str)> = transcript
        .split_whitespace()
        .enumerate()
        .filter(|(_, w)| w.chars().any(|c| !is_pc(c)))
        .collect();
    if words.len() != track.len() {
        return Err(Error::TokenMismatch {
            alignment: track.len(),
            transcript: words.len(),
        });
    }
    let mut pauses = Vec::new();
    for (k, pair) in track.tokens.windows(2).enumerate() {
        let (word_index, word) = words[k];
        if !ends_sentence(word) || abbreviations.contains(word) {
            continue;
        }
        let pause = Pause {
            start_s: pair[0].end_s,
            end_s: pair[1].start_s,
            word_index,
        };
        if pause.gap() >= min_pause {
            pauses.push(pause);
        }
    }
    Ok(pauses)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitDecision {
    pub split_point_s: Option<Seconds>,
    pub candidate_pauses: Vec<Pause>,
    pub chosen_index: Option<usize>,
}

impl SplitDecision {
    pub fn chosen(&self) -> Option<&Pause> {
        self.chosen_index.map(|i| &self.candidate_pauses[i])
    }
}

/// Seed for an utterance's tie-break generator.
pub fn split_seed(utterance_id: &str, global_seed: u64) -> u64 {
    fnv1a64(utterance_id.as_bytes()) ^ global_seed
}

/// Picks the longest pause, breaking ties uniformly at random.
pub fn choose_split(pauses: Vec<Pause>, rng_seed: u64) -> SplitDecision {
    let Some(longest) = pauses.iter().map(Pause::gap).max() else {
        return SplitDecision::default();
    };
    let ties: Vec<usize> = (0..pauses.len()).filter(|&i| pauses[i].gap() == longest).collect();
    let pick = match ties.len() {
        1 => ties[0],
        n => ties[SplitMix64::new(rng_seed).below(n as u64) as usize],
    };
    SplitDecision {
        split_point_s: Some(pauses[pick].midpoint()),
        candidate_pauses: pauses,
        chosen_index: Some(pick),
    }
}

/// Cuts `rec` in two at the decision's split point. `split_point_s` is
/// relative to the start of the utterance.
pub fn apply_split(rec: &UtteranceRecord, decision: &SplitDecision) -> Result<Vec<UtteranceRecord>> {
    let (Some(split), Some(pause)) = (decision.split_point_s, decision.chosen()) else {
        return Ok(alloc::vec![rec.clone()]);
    };
    if split <= Seconds::ZERO || split >= rec.duration_s {
        return Err(Error::SplitOutOfRange {
            split_s: split.as_secs_f64(),
            duration_s: rec.duration_s.as_secs_f64(),
        });
    }
    let words: Vec<&str> = rec.text.split_whitespace().collect();
    let cut = pause.word_index + 1;
    if cut >= words.len() {
        return Err(Error::Invariant {
            field: "text",
            reason: format!(
                "split after word {} leaves no text for the second part",
                pause.word_index
            ),
        });
    }
    let (text_a, text_b) = (words[..cut].join(" "), words[cut..].join(" "));
    let (raw_a, raw_b) = split_raw_text(&rec.raw_text, &text_a, &rec.text);

    let child = |suffix: &str, offset: Seconds, duration: Seconds, text: String, raw: String| {
        let mut c = rec.clone();
        c.utterance_id = format!("{}_{suffix}", rec.utterance_id);
        c.offset_s = offset;
        c.duration_s = duration;
        c.text = text;
        c.raw_text = raw;
        c.wer_pct = None;
        c.cer_pct = None;
        c
    };
    Ok(alloc::vec![
        child("a", rec.offset_s, split, text_a, raw_a),
        child("b", rec.offset_s + split, rec.duration_s - split, text_b, raw_b),
    ])
}

/// Splits the unpunctuated transcript where it aligns to the boundary of
/// `text_a` within `text`.
fn split_raw_text(raw: &str, text_a: &str, text: &str) -> (String, String) {
    let norm = strip_pc(text);
    let norm: Vec<&str> = norm.split(' ').filter(|w| !w.is_empty()).collect();
    let boundary = strip_pc(text_a).split(' ').filter(|w| !w.is_empty()).count();
    let raw_words: Vec<&str> = raw.split_whitespace().collect();
    let raw_lower: Vec<String> = raw_words.iter().map(|w| strip_pc(w)).collect();
    let raw_lower: Vec<&str> = raw_lower.iter().map(String::as_str).collect();
    let cut = align(&norm, &raw_lower)
        .iter()
        .take_while(|(i, _)| i.is_none_or(|i| i < boundary))
        .filter(|(_, j)| j.is_some())
        .count();
    (raw_words[..cut].join(" "), raw_words[cut..].join(" ").to_string())
}
