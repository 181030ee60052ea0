//! Levenshtein distances and WER/CER.

use alloc::vec;
use alloc::vec::Vec;

use super::strip::strip_pc;
use crate::{Error, Result};

/// Unit-cost edit distance, two rows of memory.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Word and character edit counts of a hypothesis against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EditStats {
    pub word_edits: usize,
    pub ref_words: usize,
    pub char_edits: usize,
    pub ref_chars: usize,
    pub wer_pct: f64,
    pub cer_pct: f64,
}

/// Compares `strip_pc(reference)` with `strip_pc(hypothesis)`: words are
/// whitespace tokens, characters include the separating spaces.
pub fn edit_stats(reference: &str, hypothesis: &str) -> Result<EditStats> {
    let r = strip_pc(reference);
    let h = strip_pc(hypothesis);
    if r.is_empty() {
        return Err(Error::EmptyReference);
    }
    let rw: Vec<&str> = r.split(' ').collect();
    let hw: Vec<&str> = h.split(' ').filter(|w| !w.is_empty()).collect();
    let rc: Vec<char> = r.chars().collect();
    let hc: Vec<char> = h.chars().collect();
    let word_edits = levenshtein(&rw, &hw);
    let char_edits = levenshtein(&rc, &hc);
    Ok(EditStats {
        word_edits,
        ref_words: rw.len(),
        char_edits,
        ref_chars: rc.len(),
        wer_pct: 100.0 * word_edits as f64 / rw.len() as f64,
        cer_pct: 100.0 * char_edits as f64 / rc.len() as f64,
    })
}

pub const DEFAULT_MAX_CER_PCT: f64 = 100.0;

/// True when the CER is strictly below `max_cer_pct`.
pub fn passes_cer_gate(stats: &EditStats, max_cer_pct: f64) -> bool {
    stats.cer_pct < max_cer_pct
}

/// Optimal alignment of two sequences as index pairs; `None` marks an
/// insertion or deletion. Full matrix, meant for short token sequences.
pub fn align<T: PartialEq>(a: &[T], b: &[T]) -> Vec<(Option<usize>, Option<usize>)> {
    let w = b.len() + 1;
    let mut d = vec![0usize; (a.len() + 1) * w];
    for (j, cell) in d.iter_mut().take(w).enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        d[i * w] = i;
        for j in 1..w {
            let sub = d[(i - 1) * w + j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i * w + j] = sub.min(d[(i - 1) * w + j] + 1).min(d[i * w + j - 1] + 1);
        }
    }
    let (mut i, mut j) = (a.len(), b.len());
    let mut path = Vec::with_capacity(a.len().max(b.len()));
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 && here == d[(i - 1) * w + j - 1] + usize::from(a[i - 1] != b[j - 1]) {
            path.push((Some(i - 1), Some(j - 1)));
            i -= 1;
            j -= 1;
        } else if i > 0 && here == d[(i - 1) * w + j] + 1 {
            path.push((Some(i - 1), None));
            i -= 1;
        } else {
            path.push((None, Some(j - 1)));
            j -= 1;
        }
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn oracle(a: &[char], b: &[char]) -> usize {
        let mut m = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for (i, row) in m.iter_mut().enumerate() {
            row[0] = i;
        }
        for (j, cell) in m[0].iter_mut().enumerate() {
            *cell = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let c = if a[i - 1] == b[j - 1] { 0 } else { 1 };
                m[i][j] = (m[i - 1][j - 1] + c).min(m[i - 1][j] + 1).min(m[i][j - 1] + 1);
            }
        }
        m[a.len()][b.len()]
    }

    #[test]
    fn examples() {
        let s = edit_stats("the cat sat", "the cat sat").unwrap();
        assert_eq!((s.wer_pct, s.cer_pct), (0.0, 0.0));
        let s = edit_stats("a b c", "a c").unwrap();
        assert_eq!(s.word_edits, 1);
        assert!((s.wer_pct - 33.333).abs() < 0.01);
        let s = edit_stats("ab", "xyz qq").unwrap();
        assert_eq!(s.char_edits, 6);
        assert!(s.cer_pct > 100.0);
        assert_eq!(edit_stats(" ,. ", "x"), Err(Error::EmptyReference));
    }

    #[test]
    fn punctuation_and_case_ignored() {
        let s = edit_stats("Hello, World!", "hello world").unwrap();
        assert_eq!((s.word_edits, s.char_edits), (0, 0));
        let s = edit_stats("a b", "").unwrap();
        assert_eq!((s.word_edits, s.char_edits), (2, 3));
    }

    #[test]
    fn gate_is_exclusive() {
        let at = |cer_pct| EditStats {
            word_edits: 0,
            ref_words: 1,
            char_edits: 0,
            ref_chars: 1,
            wer_pct: 0.0,
            cer_pct,
        };
        assert!(passes_cer_gate(&at(99.9), DEFAULT_MAX_CER_PCT));
        assert!(!passes_cer_gate(&at(100.0), DEFAULT_MAX_CER_PCT));
        assert!(!passes_cer_gate(&at(250.0), DEFAULT_MAX_CER_PCT));
    }

    #[test]
    fn align_recovers_distance() {
        let a: Vec<char> = "kitten".chars().collect();
        let b: Vec<char> = "sitting".chars().collect();
        let path = align(&a, &b);
        let cost = path
            .iter()
            .filter(|p| match p {
                (Some(i), Some(j)) => a[*i] != b[*j],
                _ => true,
            })
            .count();
        assert_eq!(cost, 3);
        assert_eq!(
            path.iter().filter_map(|p| p.0).collect::<Vec<_>>(),
            (0..6).collect::<Vec<_>>()
        );
        assert_eq!(
            path.iter().filter_map(|p| p.1).collect::<Vec<_>>(),
            (0..7).collect::<Vec<_>>()
        );
    }

    proptest! {
        #[test]
        fn matches_oracle(a in "[abc]{0,12}", b in "[abc]{0,12}") {
            let a: Vec<char> = a.chars().collect();
            let b: Vec<char> = b.chars().collect();
            let d = levenshtein(&a, &b);
            prop_assert_eq!(d, oracle(&a, &b));
            prop_assert!(d <= a.len().max(b.len()));
        }

        #[test]
        fn word_edits_bounded(r in "[a-c ]{1,30}", h in "[a-c ]{0,30}") {
            if let Ok(s) = edit_stats(&r, &h) {
                let hw = strip_pc(&h).split_whitespace().count();
                prop_assert!(s.word_edits <= s.ref_words + hw);
                prop_assert_eq!(edit_stats(&r, &r).unwrap().word_edits, 0);
            }
        }
    }
}
