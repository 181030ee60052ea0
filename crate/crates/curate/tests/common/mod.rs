//! Synthetic corpus: chapter audio, book text with markup, raw transcripts,
//! alignments, ASR hypotheses, predicted text and diarization counts.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use curate::formats::{AlignmentRow, WordTiming};
use curate::jsonl::write_jsonl;
use curate::manifest::{write_chapters, write_records};
use curate_core::audio::AudioBuffer;
use curate_core::rng::SplitMix64;
use curate_core::{ChapterRecord, Gender, Seconds, UtteranceRecord};
use serde_json::json;

pub const SOURCE_RATE: u32 = 48_000;
const WORD_S: f64 = 0.25;
const GAP_S: f64 = 0.05;
const SENTENCE_PAUSE_S: f64 = 0.4;
const EDGE_SILENCE_S: f64 = 0.8;
const BETWEEN_S: f64 = 0.3;

const WORDS: &[&str] = &[
    "river", "stone", "light", "garden", "morning", "quiet", "window", "letter", "bright", "water", "silver", "forest",
    "candle", "winter", "paper", "shadow", "harbor", "meadow", "thunder", "velvet",
];

/// One written token: as printed in the book, after normalization, and as
/// an aligner would emit it.
#[derive(Clone)]
struct Token {
    book: String,
    normalized: String,
    spoken: String,
    /// Silence after this word.
    gap_after: f64,
}

fn word(book: &str, normalized: &str, spoken: &str) -> Token {
    Token {
        book: book.into(),
        normalized: normalized.into(),
        spoken: spoken.into(),
        gap_after: GAP_S,
    }
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

fn sentence(rng: &mut SplitMix64, with_title: bool, with_number_abbrev: bool) -> Vec<Token> {
    let n = 3 + rng.below(4) as usize;
    let mut toks = Vec::new();
    if with_title {
        toks.push(word("Mr.", "Mister", "mister"));
        toks.push(word("Allen", "Allen", "allen"));
    }
    for i in 0..n {
        let w = WORDS[rng.below(WORDS.len() as u64) as usize];
        let first = toks.is_empty();
        let shown = if first { capitalize(w) } else { w.to_string() };
        let comma = i == 1 && rng.below(2) == 0;
        let book = if comma { format!("{shown},") } else { shown };
        toks.push(word(&book, &book, w));
    }
    if with_number_abbrev {
        // "No." followed by a long pause must not end the sentence
        let mut no = word("No.", "No.", "no");
        no.gap_after = SENTENCE_PAUSE_S;
        toks.insert(1, no);
    }
    let last = toks.last_mut().unwrap();
    last.book.push('.');
    last.normalized.push('.');
    toks
}

pub struct UttPlan {
    pub id: String,
    pub split: bool,
    pub in_book: bool,
}

pub struct Corpus {
    pub root: PathBuf,
    pub config: PathBuf,
    pub utterances: Vec<UttPlan>,
}

fn join(tokens: &[Token], f: impl Fn(&Token) -> &str) -> String {
    tokens.iter().map(f).collect::<Vec<_>>().join(" ")
}

fn hyp_of(tokens: &[Token]) -> String {
    join(tokens, |t| t.spoken.as_str())
}

/// Writes a corpus of `n` utterances over three chapters under `root`, plus
/// `pipeline.toml` pointing at it with the given worker count.
pub fn synth_corpus(root: &Path, n: usize, seed: u64, workers: usize) -> Corpus {
    fs::create_dir_all(root.join("audio")).unwrap();
    fs::create_dir_all(root.join("books")).unwrap();
    let mut rng = SplitMix64::new(seed);
    let n_chapters = 3;
    let mut chapters: Vec<ChapterRecord> = (0..n_chapters)
        .map(|c| ChapterRecord {
            chapter_id: format!("ch{c}"),
            book_id: format!("b{c}"),
            speaker_id: format!("spk{c}"),
            audio_path: format!("ch{c}.wav"),
            sample_rate_hz: SOURCE_RATE,
            bandwidth_hz: None,
            book_text_path: Some(format!("ch{c}.html")),
            gender: if c % 2 == 0 { Gender::Female } else { Gender::Male },
        })
        .collect();
    let mut audio: Vec<Vec<f32>> = vec![Vec::new(); n_chapters];
    let mut books: Vec<String> = vec![String::from("<html><body>\n"); n_chapters];
    let mut records = Vec::new();
    let mut alignments = Vec::new();
    let mut hyps = Vec::new();
    let mut counts = Vec::new();
    let mut predicted = Vec::new();
    let mut plans = Vec::new();

    for i in 0..n {
        let c = i % n_chapters;
        let ch = &chapters[c];
        let id = format!("{}_{:04}", ch.chapter_id, i / n_chapters);
        let split = i % 2 == 0;
        let in_book = i % 10 != 9;
        let mut s1 = sentence(&mut rng, i % 5 == 1, i % 4 == 1);
        let s2 = sentence(&mut rng, false, false);
        s1.last_mut().unwrap().gap_after = if split { SENTENCE_PAUSE_S } else { GAP_S };
        let tokens: Vec<Token> = s1.iter().chain(&s2).cloned().collect();

        // audio: silence, one tone burst per word, silence
        let buf = &mut audio[c];
        if buf.is_empty() {
            buf.extend(std::iter::repeat_n(0.0, (0.5 * SOURCE_RATE as f64) as usize));
        }
        let samples = |s: f64| (s * SOURCE_RATE as f64).round() as usize;
        let offset = buf.len();
        buf.extend(std::iter::repeat_n(0.0, samples(EDGE_SILENCE_S)));
        let mut timings = Vec::new();
        let top_hz = 2_000.0 + 5_000.0 * c as f64;
        for (k, t) in tokens.iter().enumerate() {
            let start = buf.len();
            let f = 300.0 + (top_hz - 300.0) * ((i * 7 + k * 3) % 11) as f64 / 10.0;
            let amp = 0.2 + 0.1 * ((k % 3) as f64);
            let w = 2.0 * std::f64::consts::PI * f / SOURCE_RATE as f64;
            buf.extend((0..samples(WORD_S)).map(|j| (amp * (w * j as f64).sin()) as f32));
            let end = buf.len();
            let gap = if k + 1 == tokens.len() { 0.0 } else { t.gap_after };
            buf.extend(std::iter::repeat_n(0.0, samples(gap)));
            timings.push(WordTiming {
                word: t.spoken.clone(),
                start: start as f64 / SOURCE_RATE as f64,
                end: end as f64 / SOURCE_RATE as f64,
            });
        }
        buf.extend(std::iter::repeat_n(0.0, samples(EDGE_SILENCE_S)));
        let duration = buf.len() - offset;
        buf.extend(std::iter::repeat_n(0.0, samples(BETWEEN_S)));

        let book_text = join(&tokens, |t| t.book.as_str());
        let normalized = join(&tokens, |t| t.normalized.as_str());
        let raw = curate_core::text::strip_pc(&book_text);
        if in_book {
            books[c].push_str(&format!("<p>{book_text}</p>\n<p>&nbsp;</p>\n"));
        } else if i % 20 == 9 {
            predicted.push(json!({ "utterance_id": id, "text": normalized }));
        }

        let mut rec = UtteranceRecord::new(
            id.clone(),
            ch,
            Seconds::from_samples(offset, SOURCE_RATE),
            Seconds::from_samples(duration, SOURCE_RATE),
            raw,
        );
        rec.gender = ch.gender;
        records.push(rec);
        alignments.push(AlignmentRow {
            utterance_id: id.clone(),
            alignment: timings,
        });

        let mut hyp_for = |uid: String, toks: &[Token]| {
            let mut h = hyp_of(toks);
            if i % 7 == 3 {
                h = h.replacen(&toks[0].spoken, "the", 1);
            }
            if i == 13 {
                h = "zq ".repeat(4 * toks.len());
            }
            hyps.push(json!({ "utterance_id": uid, "hyp_text": h }));
            let n = if i % 6 == 5 { 2 } else { 1 };
            counts.push(json!({ "utterance_id": uid, "num_speakers": n }));
        };
        hyp_for(id.clone(), &tokens);
        if split {
            hyp_for(format!("{id}_a"), &s1);
            hyp_for(format!("{id}_b"), &s2);
        }
        plans.push(UttPlan { id, split, in_book });
    }

    for (c, ch) in chapters.iter_mut().enumerate() {
        let buf = AudioBuffer::mono(std::mem::take(&mut audio[c]), SOURCE_RATE).unwrap();
        curate::wav::save_pcm(&buf, &root.join("audio").join(&ch.audio_path)).unwrap();
        books[c].push_str("</body></html>\n");
        fs::write(root.join("books").join(ch.book_text_path.as_ref().unwrap()), &books[c]).unwrap();
    }
    write_chapters(&chapters, &root.join("chapters.jsonl")).unwrap();
    write_records(&records, &root.join("raw.jsonl")).unwrap();
    write_jsonl(&root.join("alignments.jsonl"), &alignments).unwrap();
    write_jsonl(&root.join("hypotheses.jsonl"), &hyps).unwrap();
    write_jsonl(&root.join("speaker_counts.jsonl"), &counts).unwrap();
    write_jsonl(&root.join("predicted.jsonl"), &predicted).unwrap();

    let config = root.join("pipeline.toml");
    fs::write(
        &config,
        format!(
            "seed = 7\nworkers = {workers}\n\n[paths]\nmanifest = \"raw.jsonl\"\noutput = \"out\"\n\
             chapters = \"chapters.jsonl\"\naudio_root = \"audio\"\nbook_text_root = \"books\"\n\
             predicted_text = \"predicted.jsonl\"\nalignments = \"alignments.jsonl\"\n\
             hypotheses = \"hypotheses.jsonl\"\nspeaker_counts = \"speaker_counts.jsonl\"\n"
        ),
    )
    .unwrap();
    Corpus {
        root: root.to_path_buf(),
        config,
        utterances: plans,
    }
}
