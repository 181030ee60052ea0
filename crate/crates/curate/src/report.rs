//! Rendering of corpus statistics: JSON, a text table and CSV histograms.

use std::fmt::Write as _;
use std::path::Path;

use curate_core::curation::{Histogram, StatsAccumulator, StatsReport};
use curate_core::UtteranceRecord;
use rayon::prelude::*;

use crate::error::Result;
use crate::jsonl::write_atomic;

/// Same result as `corpus_stats`, reduced over the current rayon pool.
pub fn par_corpus_stats(records: &[UtteranceRecord]) -> StatsReport {
    records
        .par_iter()
        .fold(StatsAccumulator::default, |mut acc, r| {
            acc.add(r);
            acc
        })
        .reduce(StatsAccumulator::default, |mut a, b| {
            a.merge(&b);
            a
        })
        .finish()
}

pub fn to_json(stats: &StatsReport) -> String {
    let mut s = serde_json::to_string_pretty(stats).expect("stats serialize");
    s.push('\n');
    s
}

fn bin_label(h: &Histogram, i: usize) -> String {
    format!("[{}, {})", h.bin_start(i), h.bin_start(i + 1))
}

/// Summary lines followed by every non-empty histogram bin.
pub fn render_table(stats: &StatsReport) -> String {
    let mut s = String::new();
    let rows: [(&str, String); 8] = [
        ("utterances", stats.utterances.to_string()),
        ("speakers", stats.speakers.to_string()),
        ("total hours", format!("{:.3}", stats.total_hours)),
        ("multi-speaker hours", format!("{:.3}", stats.multi_speaker_hours)),
        ("book match", stats.book_match_utterances.to_string()),
        ("predicted pc", stats.predicted_pc_utterances.to_string()),
        ("no text source", stats.unknown_source_utterances.to_string()),
        ("book match ratio", format!("{:.4}", stats.book_match_ratio)),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<22}{v:>14}");
    }
    for (name, h) in stats.histograms() {
        let _ = writeln!(s, "\n{name}");
        for (i, &c) in h.counts.iter().enumerate() {
            if c > 0 {
                let _ = writeln!(s, "  {:<22}{c:>12}", bin_label(h, i));
            }
        }
        if let Some(from) = h.overflow_from {
            if h.overflow > 0 {
                let _ = writeln!(s, "  {:<22}{:>12}", format!(">= {from}"), h.overflow);
            }
        }
        if h.missing > 0 {
            let _ = writeln!(s, "  {:<22}{:>12}", "missing", h.missing);
        }
    }
    s
}

/// `histogram,bin_start,bin_end,count`; the overflow row has an empty
/// `bin_end`, the missing row empty bounds.
pub fn to_csv(stats: &StatsReport) -> String {
    let mut s = String::from("histogram,bin_start,bin_end,count\n");
    for (name, h) in stats.histograms() {
        for (i, &c) in h.counts.iter().enumerate() {
            let _ = writeln!(s, "{name},{},{},{c}", h.bin_start(i), h.bin_start(i + 1));
        }
        if let Some(from) = h.overflow_from {
            let _ = writeln!(s, "{name},{from},,{}", h.overflow);
        }
        let _ = writeln!(s, "{name},,,{}", h.missing);
    }
    s
}

/// `stats.json`, `stats.txt` and `stats.csv` under `dir`.
pub fn write_stats(stats: &StatsReport, dir: &Path) -> Result<()> {
    write_atomic(&dir.join("stats.json"), to_json(stats).as_bytes())?;
    write_atomic(&dir.join("stats.txt"), render_table(stats).as_bytes())?;
    write_atomic(&dir.join("stats.csv"), to_csv(stats).as_bytes())
}
