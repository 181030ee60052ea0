//! HTML tag and entity handling with a byte map back to the source text.

use alloc::string::String;
use alloc::vec::Vec;

/// Entities that stand for a space. They are kept as a bare word (`nbsp`)
/// because transcribers read them aloud; artifact rules delete them later.
const SPACE_ENTITIES: &[&str] = &["nbsp", "ensp", "emsp", "thinsp"];

const CHAR_ENTITIES: &[(&str, char)] = &[
    ("amp", '&'),
    ("quot", '"'),
    ("apos", '\''),
    ("lt", '<'),
    ("gt", '>'),
    ("mdash", '\u{2014}'),
    ("ndash", '\u{2013}'),
    ("lsquo", '\u{2018}'),
    ("rsquo", '\u{2019}'),
    ("ldquo", '\u{201c}'),
    ("rdquo", '\u{201d}'),
    ("hellip", '\u{2026}'),
    ("shy", '\u{ad}'),
];

const MAX_TAG_LEN: usize = 512;
const MAX_ENTITY_LEN: usize = 12;

/// Text with tags blanked and entities resolved. Every output byte knows the
/// source byte range it came from.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    text: String,
    src_start: Vec<usize>,
    src_end: Vec<usize>,
}

impl Prepared {
    pub(crate) fn text(&self) -> &str {
        &self.text
    }

    pub(crate) fn into_text(self) -> String {
        self.text
    }

    /// Maps a non-empty output byte range to the source range covering it.
    pub(crate) fn original_range(&self, start: usize, end: usize) -> (usize, usize) {
        debug_assert!(start < end);
        (self.src_start[start], self.src_end[end - 1])
    }

    fn push(&mut self, s: &str, from: usize, to: usize) {
        self.text.push_str(s);
        for _ in 0..s.len() {
            self.src_start.push(from);
            self.src_end.push(to);
        }
    }
}

pub(crate) fn prepare(input: &str) -> Prepared {
    let mut out = Prepared {
        text: String::with_capacity(input.len()),
        src_start: Vec::with_capacity(input.len()),
        src_end: Vec::with_capacity(input.len()),
    };
    let bytes = input.as_bytes();
    let mut i = 0;
    while i < input.len() {
        let rest = &input[i..];
        if bytes[i] == b'<' {
            if let Some(len) = tag_len(rest) {
                out.push(" ", i, i + len);
                i += len;
                continue;
            }
        } else if bytes[i] == b'&' {
            if let Some((len, replacement)) = entity(rest) {
                match replacement {
                    Entity::Char(c) => {
                        let mut buf = [0u8; 4];
                        out.push(c.encode_utf8(&mut buf), i, i + len);
                    }
                    Entity::Word(w) => {
                        out.push(" ", i, i + len);
                        out.push(w, i, i + len);
                        out.push(" ", i, i + len);
                    }
                }
                i += len;
                continue;
            }
        }
        let c = rest.chars().next().expect("non-empty");
        let n = c.len_utf8();
        out.push(&rest[..n], i, i + n);
        i += n;
    }
    out
}

fn tag_len(s: &str) -> Option<usize> {
    let b = s.as_bytes();
    let second = *b.get(1)?;
    if !(second.is_ascii_alphabetic() || matches!(second, b'/' | b'!' | b'?')) {
        return None;
    }
    let end = b
        .iter()
        .take(MAX_TAG_LEN)
        .skip(1)
        .position(|&c| c == b'>' || c == b'<')?;
    (b[end + 1] == b'>').then_some(end + 2)
}

enum Entity<'a> {
    Char(char),
    Word(&'a str),
}

fn entity(s: &str) -> Option<(usize, Entity<'_>)> {
    let semi = s.as_bytes().iter().take(MAX_ENTITY_LEN).position(|&c| c == b';')?;
    let name = &s[1..semi];
    let len = semi + 1;
    if let Some(num) = name.strip_prefix('#') {
        let code = match num.strip_prefix(['x', 'X']) {
            Some(hex) => u32::from_str_radix(hex, 16).ok()?,
            None => num.parse().ok()?,
        };
        return Some((len, Entity::Char(char::from_u32(code)?)));
    }
    if name.is_empty() || !name.bytes().all(|c| c.is_ascii_alphanumeric()) {
        return None;
    }
    let lower = name.to_ascii_lowercase();
    if let Some(&(_, c)) = CHAR_ENTITIES.iter().find(|(n, _)| *n == lower) {
        return Some((len, Entity::Char(c)));
    }
    let word = SPACE_ENTITIES.iter().find(|n| **n == lower)?;
    Some((len, Entity::Word(word)))
}
