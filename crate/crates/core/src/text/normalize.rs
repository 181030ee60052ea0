//! Formatting cleanup and rule-based spoken-form normalization.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::markup;
use super::strip::{collapse_whitespace, is_pc, is_symbol};
use crate::{Error, Result};

const DEFAULT_RULES: &str = include_str!("../../data/normalization.rules");

#[derive(Debug, Clone, PartialEq, Eq)]
struct Expansion {
    spoken: String,
    needs_period: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Artifact {
    pattern: Vec<String>,
    replacement: String,
}

/// Abbreviation expansions and artifact deletions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizationRules {
    expansions: BTreeMap<String, Expansion>,
    artifacts: Vec<Artifact>,
}

impl Default for NormalizationRules {
    fn default() -> Self {
        Self::parse(DEFAULT_RULES).expect("bundled rules parse")
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Expansions,
    Artifacts,
}

impl NormalizationRules {
    pub fn empty() -> Self {
        NormalizationRules {
            expansions: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    /// Parses the rules format: `[expansions]` lines `token<TAB>expansion`,
    /// `[artifacts]` lines `pattern` or `pattern<TAB>replacement`, `#`
    /// comments.
    pub fn parse(src: &str) -> Result<Self> {
        let mut rules = Self::empty();
        let mut section = Section::None;
        for (idx, raw) in src.lines().enumerate() {
            let line_no = idx + 1;
            let err = |reason: &str| Error::Rules {
                line: line_no,
                reason: reason.to_string(),
            };
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            match line.trim() {
                "[expansions]" => {
                    section = Section::Expansions;
                    continue;
                }
                "[artifacts]" => {
                    section = Section::Artifacts;
                    continue;
                }
                s if s.starts_with('[') => return Err(err("unknown section")),
                _ => {}
            }
            let (left, right) = match line.split_once('\t') {
                Some((l, r)) => (l.trim(), Some(r.trim())),
                None => (line.trim(), None),
            };
            match section {
                Section::None => return Err(err("rule outside a section")),
                Section::Expansions => {
                    let spoken = right
                        .filter(|r| !r.is_empty())
                        .ok_or_else(|| err("expected token<TAB>expansion"))?;
                    if left.contains(char::is_whitespace) {
                        return Err(err("abbreviation must be a single token"));
                    }
                    let needs_period = left.ends_with('.');
                    let key = left.trim_end_matches('.').to_lowercase();
                    if key.is_empty() {
                        return Err(err("empty abbreviation"));
                    }
                    let exp = Expansion {
                        spoken: collapse_whitespace(spoken),
                        needs_period,
                    };
                    if rules.expansions.insert(key, exp).is_some() {
                        return Err(err("duplicate abbreviation"));
                    }
                }
                Section::Artifacts => {
                    let pattern: Vec<String> = left.split_whitespace().map(str::to_lowercase).collect();
                    if pattern.is_empty() {
                        return Err(err("empty artifact pattern"));
                    }
                    let replacement = collapse_whitespace(right.unwrap_or(""));
                    if replacement.len() >= left.len() {
                        return Err(err("artifact replacement must be shorter than its pattern"));
                    }
                    rules.artifacts.push(Artifact { pattern, replacement });
                }
            }
        }
        rules.check_expansions_are_final()?;
        Ok(rules)
    }

    /// Expansions must not themselves contain abbreviations, otherwise
    /// normalization would not be idempotent.
    fn check_expansions_are_final(&self) -> Result<()> {
        for (key, exp) in &self.expansions {
            for word in exp.spoken.split(' ') {
                if self.lookup(word).is_some() {
                    return Err(Error::Rules {
                        line: 0,
                        reason: format!("expansion of `{key}` contains abbreviation `{word}`"),
                    });
                }
            }
        }
        Ok(())
    }

    fn lookup<'t>(&self, token: &'t str) -> Option<(&Expansion, Parts<'t>)> {
        let parts = Parts::of(token);
        let exp = self.expansions.get(&parts.body.to_lowercase())?;
        if exp.needs_period && !parts.has_period() {
            return None;
        }
        Some((exp, parts))
    }
}

/// A whitespace token split into leading punctuation, the word, and the
/// trailing punctuation run.
struct Parts<'a> {
    lead: &'a str,
    body: &'a str,
    tail: &'a str,
}

impl<'a> Parts<'a> {
    fn of(token: &'a str) -> Parts<'a> {
        let body_start = token
            .char_indices()
            .find(|&(_, c)| !is_pc(c) || c == '&')
            .map_or(token.len(), |(i, _)| i);
        let (lead, rest) = token.split_at(body_start);
        let body_end = rest
            .char_indices()
            .rev()
            .take_while(|&(_, c)| is_pc(c))
            .last()
            .map_or(rest.len(), |(i, _)| i);
        let (body, tail) = rest.split_at(body_end);
        Parts { lead, body, tail }
    }

    fn has_period(&self) -> bool {
        self.tail.starts_with('.')
    }
}

fn match_case(source: &str, spoken: &str) -> String {
    let mut letters = source.chars().filter(|c| c.is_alphabetic());
    let Some(first) = letters.next() else {
        return spoken.to_string();
    };
    let rest: Vec<char> = letters.collect();
    if first.is_uppercase() && !rest.is_empty() && rest.iter().all(|c| c.is_uppercase()) {
        return spoken.to_uppercase();
    }
    if first.is_uppercase() {
        let mut chars = spoken.chars();
        if let Some(c) = chars.next() {
            return c.to_uppercase().chain(chars).collect();
        }
    }
    spoken.to_string()
}

fn remove_artifacts(text: &str, artifacts: &[Artifact]) -> String {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let lowered: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let mut out: Vec<&str> = Vec::with_capacity(tokens.len());
    let mut i = 0;
    'scan: while i < tokens.len() {
        for a in artifacts {
            let n = a.pattern.len();
            if lowered.get(i..i + n).is_some_and(|w| w == a.pattern.as_slice()) {
                if !a.replacement.is_empty() {
                    out.push(&a.replacement);
                }
                i += n;
                continue 'scan;
            }
        }
        out.push(tokens[i]);
        i += 1;
    }
    out.join(" ")
}

/// Removes HTML tags, resolves entities, and deletes layout artifacts such
/// as stray `nbsp` or `p p` tokens. Applied until nothing changes, so the
/// result is a fixpoint.
pub fn clean_formatting(text: &str, rules: &NormalizationRules) -> String {
    let mut current = collapse_whitespace(text);
    loop {
        let next = remove_artifacts(&markup::prepare(&current).into_text(), &rules.artifacts);
        if next == current {
            return next;
        }
        current = next;
    }
}

/// Output of [`normalize_spoken`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Normalized {
    pub text: String,
    /// Tokens with digits or symbols that no rule covers, left unchanged.
    pub flagged: Vec<String>,
}

fn needs_verbalizing(token: &str) -> bool {
    token
        .chars()
        .any(|c| c.is_numeric() || is_symbol(c) || matches!(c, '%' | '&' | '#' | '@'))
}

/// Expands abbreviations from the rule table, copying the capitalization of
/// the written form. The abbreviation's own period is dropped except on the
/// final token, where it also ends the sentence.
pub fn normalize_spoken(text: &str, rules: &NormalizationRules) -> Normalized {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut out = Normalized::default();
    let mut pieces: Vec<String> = Vec::with_capacity(tokens.len());
    for (i, token) in tokens.iter().enumerate() {
        match rules.lookup(token) {
            Some((exp, parts)) => {
                let last = i + 1 == tokens.len();
                let tail = match parts.has_period() && !last {
                    true => &parts.tail[1..],
                    false => parts.tail,
                };
                pieces.push(format!("{}{}{}", parts.lead, match_case(parts.body, &exp.spoken), tail));
            }
            None => {
                if needs_verbalizing(token) {
                    out.flagged.push(token.to_string());
                }
                pieces.push(token.to_string());
            }
        }
    }
    out.text = pieces.join(" ");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn rules() -> NormalizationRules {
        NormalizationRules::default()
    }

    #[test]
    fn artifact_examples() {
        assert_eq!(clean_formatting("anxiety nbsp it is", &rules()), "anxiety it is");
        assert_eq!(clean_formatting("<i>word</i>", &rules()), "word");
        assert_eq!(
            clean_formatting("plain text, nothing odd.", &rules()),
            "plain text, nothing odd."
        );
        assert_eq!(clean_formatting("end. p p Next", &rules()), "end. Next");
        assert_eq!(clean_formatting("a&amp;nbsp;b", &rules()), "a b");
        assert_eq!(clean_formatting("p  p p", &rules()), "p");
    }

    #[test]
    fn expansion_examples() {
        let r = rules();
        assert_eq!(normalize_spoken("mr Allen", &r).text, "mister Allen");
        assert_eq!(normalize_spoken("mrs Evangelina", &r).text, "misses Evangelina");
        assert_eq!(normalize_spoken("Mrs. Evangelina", &r).text, "Misses Evangelina");
        assert_eq!(normalize_spoken("MR. SMITH", &r).text, "MISTER SMITH");
        assert_eq!(
            normalize_spoken("tankards, &c., of gold", &r).text,
            "tankards, et cetera, of gold"
        );
        assert_eq!(
            normalize_spoken("apples, pears, etc.", &r).text,
            "apples, pears, et cetera."
        );
        assert_eq!(
            normalize_spoken("``Dr. Jekyll,'' she said", &r).text,
            "``Doctor Jekyll,'' she said"
        );
        let plain = "nothing to see here.";
        assert_eq!(normalize_spoken(plain, &r).text, plain);
    }

    #[test]
    fn period_required_keys() {
        let r = rules();
        assert_eq!(normalize_spoken("St. Paul", &r).text, "Saint Paul");
        assert_eq!(normalize_spoken("st paul", &r).text, "st paul");
    }

    #[test]
    fn flags_digits_and_symbols() {
        let n = normalize_spoken("Chapter 12 cost $5 & more", &rules());
        assert_eq!(n.text, "Chapter 12 cost $5 & more");
        assert_eq!(n.flagged, ["12", "$5", "&"]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            NormalizationRules::parse("mr\tmister"),
            Err(Error::Rules { line: 1, .. })
        ));
        assert!(matches!(
            NormalizationRules::parse("[expansions]\nmr"),
            Err(Error::Rules { line: 2, .. })
        ));
        assert!(matches!(
            NormalizationRules::parse("[bogus]"),
            Err(Error::Rules { line: 1, .. })
        ));
        assert!(NormalizationRules::parse("[expansions]\nmr\tmister\nmr\tmaster").is_err());
        assert!(NormalizationRules::parse("[expansions]\ndr\tdr who").is_err());
        assert!(NormalizationRules::parse("[artifacts]\nab\tabc").is_err());
        let r = NormalizationRules::parse("# c\n\n[artifacts]\nfoo bar\tx\n").unwrap();
        assert_eq!(clean_formatting("a FOO bar b", &r), "a x b");
    }

    fn texts() -> impl Strategy<Value = String> {
        prop::collection::vec(
            prop::sample::select(vec![
                "Mr.", "mrs", "Dr", "&c.", "etc.,", "St.", "nbsp", "p", "<b>", "</b>", "&amp;", "&nbsp;", "word",
                "Hello,", "42", "``", "''", "vs.",
            ]),
            0..25,
        )
        .prop_map(|v| v.join(" "))
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(s in texts()) {
            let once = clean_formatting(&s, &rules());
            prop_assert_eq!(clean_formatting(&once, &rules()), once.clone());
        }

        #[test]
        fn normalize_is_idempotent(s in texts()) {
            let once = normalize_spoken(&s, &rules()).text;
            prop_assert_eq!(normalize_spoken(&once, &rules()).text, once.clone());
        }
    }
}
