use alloc::string::String;
use alloc::vec::Vec;

use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

/// Punctuation as far as PC stripping is concerned: every Unicode `P*`
/// character plus backtick and ASCII quotes.
pub fn is_pc(c: char) -> bool {
    matches!(c, '`' | '"' | '\'') || c.general_category_group() == GeneralCategoryGroup::Punctuation
}

pub(crate) fn is_symbol(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Symbol
}

/// Lowercases, removes punctuation, collapses whitespace and trims.
pub fn strip_pc(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for chunk in text.split_whitespace() {
        let start = out.len();
        if start > 0 {
            out.push(' ');
        }
        let body = out.len();
        push_stripped(&mut out, chunk);
        if out.len() == body {
            out.truncate(start);
        }
    }
    out
}

fn push_stripped(out: &mut String, chunk: &str) {
    for c in chunk.chars().filter(|&c| !is_pc(c)) {
        out.extend(c.to_lowercase());
    }
}

/// Collapses whitespace runs to single spaces and trims the ends.
pub fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, w) in text.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(w);
    }
    out
}

/// A whitespace-delimited chunk of text together with its PC-stripped form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanToken {
    pub norm: String,
    /// Byte range of the whole chunk, punctuation included.
    pub start: usize,
    pub end: usize,
}

/// Tokens of `strip_pc(text)` with the byte span of the chunk each came
/// from. Chunks that are pure punctuation produce no token.
pub fn span_tokens(text: &str) -> Vec<SpanToken> {
    let mut tokens = Vec::new();
    let mut chunk_start = None;
    let flush = |start: usize, end: usize, tokens: &mut Vec<SpanToken>| {
        let mut norm = String::new();
        push_stripped(&mut norm, &text[start..end]);
        if !norm.is_empty() {
            tokens.push(SpanToken { norm, start, end });
        }
    };
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), chunk_start) {
            (true, Some(s)) => {
                flush(s, i, &mut tokens);
                chunk_start = None;
            }
            (false, None) => chunk_start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = chunk_start {
        flush(s, text.len(), &mut tokens);
    }
    tokens
}
