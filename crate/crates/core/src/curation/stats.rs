//! Corpus statistics with mergeable fixed-bin histograms.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::time::TICKS_PER_SECOND;
use crate::{TextSource, UtteranceRecord};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

const SECONDS_PER_HOUR: f64 = 3600.0;
const DURATION_BIN_TICKS: i64 = TICKS_PER_SECOND / 2;
const BANDWIDTH_BIN_HZ: u32 = 250;
const RATE_BINS: usize = 100;

/// Counts per fixed-width bin. Bin `i` covers `[i * bin_width, (i + 1) *
/// bin_width)`. Values at or above `overflow_from` go to `overflow`, records
/// lacking the value to `missing`, so the total always equals the number of
/// records added.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub overflow_from: Option<f64>,
    pub overflow: u64,
    pub missing: u64,
}

impl Histogram {
    fn new(bin_width: f64, bins: Option<usize>) -> Self {
        Histogram {
            bin_width,
            counts: bins.map(|n| alloc::vec![0; n]).unwrap_or_default(),
            overflow_from: bins.map(|n| n as f64 * bin_width),
            overflow: 0,
            missing: 0,
        }
    }

    fn add_bin(&mut self, i: usize) {
        if self.overflow_from.is_some() && i >= self.counts.len() {
            self.overflow += 1;
            return;
        }
        if i >= self.counts.len() {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow + self.missing
    }

    /// Lower edge of bin `i`.
    pub fn bin_start(&self, i: usize) -> f64 {
        i as f64 * self.bin_width
    }

    pub fn merge(&mut self, other: &Histogram) {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.overflow += other.overflow;
        self.missing += other.missing;
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct StatsReport {
    pub utterances: u64,
    pub speakers: u64,
    pub total_hours: f64,
    pub multi_speaker_hours: f64,
    pub book_match_utterances: u64,
    pub predicted_pc_utterances: u64,
    pub unknown_source_utterances: u64,
    /// Share of utterances whose text was restored from the book.
    pub book_match_ratio: f64,
    pub duration_s: Histogram,
    pub bandwidth_hz: Histogram,
    pub wer_pct: Histogram,
    pub cer_pct: Histogram,
}

impl StatsReport {
    pub fn histograms(&self) -> [(&'static str, &Histogram); 4] {
        [
            ("duration_s", &self.duration_s),
            ("bandwidth_hz", &self.bandwidth_hz),
            ("wer_pct", &self.wer_pct),
            ("cer_pct", &self.cer_pct),
        ]
    }
}

/// Running totals; [`merge`](Self::merge) is associative and commutative so
/// partial results from parallel workers can be combined in any grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsAccumulator {
    utterances: u64,
    speakers: BTreeSet<String>,
    total_ticks: i128,
    multi_ticks: i128,
    sources: [u64; 3],
    duration: Histogram,
    bandwidth: Histogram,
    wer: Histogram,
    cer: Histogram,
}

impl Default for StatsAccumulator {
    fn default() -> Self {
        StatsAccumulator {
            utterances: 0,
            speakers: BTreeSet::new(),
            total_ticks: 0,
            multi_ticks: 0,
            sources: [0; 3],
            duration: Histogram::new(DURATION_BIN_TICKS as f64 / TICKS_PER_SECOND as f64, None),
            bandwidth: Histogram::new(BANDWIDTH_BIN_HZ as f64, None),
            wer: Histogram::new(1.0, Some(RATE_BINS)),
            cer: Histogram::new(1.0, Some(RATE_BINS)),
        }
    }
}

fn add_rate(h: &mut Histogram, v: Option<f64>) {
    match v {
        Some(p) if p >= 0.0 => h.add_bin(libm::floor(p) as usize),
        _ => h.missing += 1,
    }
}

impl StatsAccumulator {
    pub fn add(&mut self, r: &UtteranceRecord) {
        self.utterances += 1;
        if !self.speakers.contains(&r.speaker_id) {
            self.speakers.insert(r.speaker_id.clone());
        }
        let ticks = r.duration_s.ticks();
        self.total_ticks += ticks as i128;
        if r.num_speakers.is_some_and(|n| n > 1) {
            self.multi_ticks += ticks as i128;
        }
        let src = match r.text_source {
            Some(TextSource::BookMatch) => 0,
            Some(TextSource::PredictedPc) => 1,
            None => 2,
        };
        self.sources[src] += 1;
        self.duration
            .add_bin(ticks.max(0).div_euclid(DURATION_BIN_TICKS) as usize);
        match r.bandwidth_hz {
            Some(b) => self.bandwidth.add_bin((b / BANDWIDTH_BIN_HZ) as usize),
            None => self.bandwidth.missing += 1,
        }
        add_rate(&mut self.wer, r.wer_pct);
        add_rate(&mut self.cer, r.cer_pct);
    }

    pub fn merge(&mut self, other: &StatsAccumulator) {
        self.utterances += other.utterances;
        self.speakers.extend(other.speakers.iter().cloned());
        self.total_ticks += other.total_ticks;
        self.multi_ticks += other.multi_ticks;
        for (a, b) in self.sources.iter_mut().zip(other.sources) {
            *a += b;
        }
        self.duration.merge(&other.duration);
        self.bandwidth.merge(&other.bandwidth);
        self.wer.merge(&other.wer);
        self.cer.merge(&other.cer);
    }

    pub fn finish(self) -> StatsReport {
        let hours = |t: i128| t as f64 / TICKS_PER_SECOND as f64 / SECONDS_PER_HOUR;
        let ratio = match self.utterances {
            0 => 0.0,
            n => self.sources[0] as f64 / n as f64,
        };
        StatsReport {
            utterances: self.utterances,
            speakers: self.speakers.len() as u64,
            total_hours: hours(self.total_ticks),
            multi_speaker_hours: hours(self.multi_ticks),
            book_match_utterances: self.sources[0],
            predicted_pc_utterances: self.sources[1],
            unknown_source_utterances: self.sources[2],
            book_match_ratio: ratio,
            duration_s: self.duration,
            bandwidth_hz: self.bandwidth,
            wer_pct: self.wer,
            cer_pct: self.cer,
        }
    }
}

pub fn corpus_stats(records: &[UtteranceRecord]) -> StatsReport {
    let mut acc = StatsAccumulator::default();
    for r in records {
        acc.add(r);
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::fixtures::utterance;
    use crate::time::Seconds;
    use alloc::format;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn empty_corpus() {
        let s = corpus_stats(&[]);
        assert_eq!((s.utterances, s.speakers, s.total_hours), (0, 0, 0.0));
        assert!(s.histograms().iter().all(|(_, h)| h.total() == 0));
        assert_eq!(s.book_match_ratio, 0.0);
    }

    #[test]
    fn two_ten_second_records() {
        let rs = vec![utterance("a", "s", 10.0), utterance("b", "s", 10.0)];
        let s = corpus_stats(&rs);
        assert!((s.total_hours * 3600.0 - 20.0).abs() < 1e-9);
        assert_eq!(s.duration_s.counts[20], 2);
        assert_eq!(s.duration_s.bin_start(20), 10.0);
        assert_eq!(s.speakers, 1);
        assert_eq!(s.wer_pct.missing, 2);
    }

    #[test]
    fn rate_bins_and_overflow() {
        let mut rs = Vec::new();
        for (i, cer) in [0.0, 0.99, 1.0, 99.99, 100.0, 250.0].into_iter().enumerate() {
            let mut r = utterance(&format!("u{i}"), "s", 1.0);
            r.cer_pct = Some(cer);
            r.num_speakers = Some(if i == 0 { 2 } else { 1 });
            r.text_source = Some(TextSource::BookMatch);
            rs.push(r);
        }
        let s = corpus_stats(&rs);
        assert_eq!(s.cer_pct.counts[0], 2);
        assert_eq!(s.cer_pct.counts[1], 1);
        assert_eq!(s.cer_pct.counts[99], 1);
        assert_eq!(s.cer_pct.overflow, 2);
        assert_eq!(s.cer_pct.overflow_from, Some(100.0));
        assert!((s.multi_speaker_hours * 3600.0 - 1.0).abs() < 1e-9);
        assert_eq!(s.book_match_ratio, 1.0);
    }

    fn arb_record() -> impl Strategy<Value = UtteranceRecord> {
        (
            0u32..8,
            1i64..400_000,
            prop::option::of(0u32..24_000),
            prop::option::of(0.0f64..300.0),
            prop::option::of(0u32..4),
        )
            .prop_map(|(spk, ticks, bw, rate, n)| {
                let mut r = utterance("u", &format!("s{spk}"), 1.0);
                r.duration_s = Seconds::from_ticks(ticks);
                r.bandwidth_hz = bw;
                r.wer_pct = rate;
                r.cer_pct = rate.map(|x| x / 2.0);
                r.num_speakers = n;
                r
            })
    }

    proptest! {
        #[test]
        fn conservation(rs in prop::collection::vec(arb_record(), 0..80)) {
            let s = corpus_stats(&rs);
            for (_, h) in s.histograms() {
                prop_assert_eq!(h.total(), rs.len() as u64);
            }
            let secs: f64 = rs.iter().map(|r| r.duration_s.as_secs_f64()).sum();
            prop_assert!((s.total_hours * 3600.0 - secs).abs() <= 1e-6 * secs.max(1.0));
        }

        #[test]
        fn merge_matches_sequential(rs in prop::collection::vec(arb_record(), 0..60), cut in 0usize..60) {
            let cut = cut.min(rs.len());
            let mut left = StatsAccumulator::default();
            rs[..cut].iter().for_each(|r| left.add(r));
            let mut right = StatsAccumulator::default();
            rs[cut..].iter().for_each(|r| right.add(r));
            let mut rl = right.clone();
            rl.merge(&left);
            left.merge(&right);
            let whole = corpus_stats(&rs);
            prop_assert_eq!(left.finish(), whole.clone());
            prop_assert_eq!(rl.finish(), whole);
        }
    }
}
