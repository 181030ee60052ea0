//! Punctuation restoration by locating a transcript inside the book text.

use alloc::string::String;
use alloc::vec::Vec;

use super::markup::{self, Prepared};
use super::strip::{collapse_whitespace, span_tokens, strip_pc};
use crate::rng::fnv1a64;

const BASE: u64 = 0x100_0000_01b3;

/// A transcript located in the chapter text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptMatch {
    /// Byte range into the original chapter text.
    pub book_span: (usize, usize),
    /// Punctuated slice of the book covering the match, markup removed and
    /// whitespace collapsed.
    pub restored_text: String,
    /// How many times the transcript occurs; the first occurrence is used.
    pub occurrences: usize,
}

#[derive(Debug, Clone)]
struct Token {
    norm: String,
    hash: u64,
    start: usize,
    end: usize,
}

/// Tokenized chapter text, built once and queried for every utterance of the
/// chapter.
#[derive(Debug, Clone)]
pub struct BookIndex {
    prepared: Prepared,
    tokens: Vec<Token>,
}

impl BookIndex {
    pub fn new(chapter_text: &str) -> Self {
        let prepared = markup::prepare(chapter_text);
        let tokens = span_tokens(prepared.text())
            .into_iter()
            .map(|t| Token {
                hash: fnv1a64(t.norm.as_bytes()),
                norm: t.norm,
                start: t.start,
                end: t.end,
            })
            .collect();
        BookIndex { prepared, tokens }
    }

    pub fn token_count(&self) -> usize {
        self.tokens.len()
    }

    /// Finds `transcript` as a whole-token substring of the stripped book.
    pub fn find(&self, transcript: &str) -> Option<TranscriptMatch> {
        let query = strip_pc(transcript);
        let q: Vec<&str> = query.split(' ').filter(|w| !w.is_empty()).collect();
        let n = q.len();
        if n == 0 || n > self.tokens.len() {
            return None;
        }
        let qh: Vec<u64> = q.iter().map(|w| fnv1a64(w.as_bytes())).collect();
        let target = poly_hash(qh.iter().copied());
        let top = BASE.wrapping_pow(n as u32 - 1);
        let mut h = poly_hash(self.tokens[..n].iter().map(|t| t.hash));

        let mut first = None;
        let mut occurrences = 0;
        for i in 0..=self.tokens.len() - n {
            if i > 0 {
                let out = self.tokens[i - 1].hash;
                let inn = self.tokens[i + n - 1].hash;
                h = h
                    .wrapping_sub(out.wrapping_mul(top))
                    .wrapping_mul(BASE)
                    .wrapping_add(inn);
            }
            if h == target && self.tokens[i..i + n].iter().zip(&q).all(|(t, w)| t.norm == *w) {
                occurrences += 1;
                first.get_or_insert(i);
            }
        }
        let i = first?;
        let (s, e) = (self.tokens[i].start, self.tokens[i + n - 1].end);
        Some(TranscriptMatch {
            book_span: self.prepared.original_range(s, e),
            restored_text: collapse_whitespace(&self.prepared.text()[s..e]),
            occurrences,
        })
    }
}

fn poly_hash(hashes: impl Iterator<Item = u64>) -> u64 {
    hashes.fold(0u64, |acc, h| acc.wrapping_mul(BASE).wrapping_add(h))
}

/// One-off lookup; use [`BookIndex`] when matching many transcripts against
/// the same chapter.
pub fn match_transcript(transcript: &str, chapter_text: &str) -> Option<TranscriptMatch> {
    BookIndex::new(chapter_text).find(transcript)
}
