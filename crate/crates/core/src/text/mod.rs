//! Transcript text: punctuation stripping, restoration from book text,
//! formatting cleanup, spoken-form normalization and error rates.

mod edit;
mod markup;
mod matching;
mod normalize;
mod strip;

pub use edit::{align, edit_stats, levenshtein, passes_cer_gate, EditStats, DEFAULT_MAX_CER_PCT};
pub use matching::{match_transcript, BookIndex, TranscriptMatch};
pub use normalize::{clean_formatting, normalize_spoken, NormalizationRules, Normalized};
pub use strip::{collapse_whitespace, is_pc, span_tokens, strip_pc, SpanToken};
