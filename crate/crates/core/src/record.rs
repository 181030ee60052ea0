//! Corpus data model shared by every stage.

use alloc::format;
use alloc::string::String;

use crate::error::{invariant, Error, Result};
use crate::time::Seconds;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Where an utterance's punctuated text came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TextSource {
    /// Restored by locating the transcript in the chapter's book text.
    BookMatch,
    /// Punctuation supplied by an external predictor (or left absent).
    PredictedPc,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Gender {
    #[cfg_attr(feature = "serde", serde(rename = "m"))]
    Male,
    #[cfg_attr(feature = "serde", serde(rename = "f"))]
    Female,
    #[default]
    Unknown,
}

/// One manifest row. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct UtteranceRecord {
    pub utterance_id: String,
    pub book_id: String,
    pub chapter_id: String,
    pub speaker_id: String,
    pub audio_path: String,
    pub offset_s: Seconds,
    pub duration_s: Seconds,
    #[cfg_attr(feature = "serde", serde(default))]
    pub text: String,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub text_source: Option<TextSource>,
    pub raw_text: String,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub bandwidth_hz: Option<u32>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub wer_pct: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub cer_pct: Option<f64>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub num_speakers: Option<u32>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub gender: Gender,
}

impl UtteranceRecord {
    /// A record as it arrives from an upstream ASR corpus: only identity,
    /// span and the unpunctuated transcript are known.
    pub fn new(
        utterance_id: impl Into<String>,
        chapter: &ChapterRecord,
        offset_s: Seconds,
        duration_s: Seconds,
        raw_text: impl Into<String>,
    ) -> Self {
        let raw_text = raw_text.into();
        UtteranceRecord {
            utterance_id: utterance_id.into(),
            book_id: chapter.book_id.clone(),
            chapter_id: chapter.chapter_id.clone(),
            speaker_id: chapter.speaker_id.clone(),
            audio_path: chapter.audio_path.clone(),
            offset_s,
            duration_s,
            text: raw_text.clone(),
            text_source: None,
            raw_text,
            bandwidth_hz: None,
            wer_pct: None,
            cer_pct: None,
            num_speakers: None,
            gender: Gender::Unknown,
        }
    }

    pub fn end_s(&self) -> Seconds {
        self.offset_s + self.duration_s
    }

    /// Checks the per-record invariants that do not need chapter context.
    pub fn validate(&self) -> Result<()> {
        if self.utterance_id.is_empty() {
            return Err(invariant("utterance_id", "must not be empty"));
        }
        if self.offset_s < Seconds::ZERO {
            return Err(invariant("offset_s", format!("{} < 0", self.offset_s)));
        }
        if self.duration_s <= Seconds::ZERO {
            return Err(invariant("duration_s", format!("{} <= 0", self.duration_s)));
        }
        for (field, v) in [("wer_pct", self.wer_pct), ("cer_pct", self.cer_pct)] {
            if let Some(v) = v {
                if v < 0.0 || !v.is_finite() {
                    return Err(invariant(field, format!("{v} is not a finite percentage")));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn require_bandwidth(&self) -> Result<u32> {
        self.bandwidth_hz.ok_or_else(|| Error::MissingField {
            utterance_id: self.utterance_id.clone(),
            field: "bandwidth_hz",
            stage: "bandwidth",
        })
    }

    pub(crate) fn require_cer(&self) -> Result<f64> {
        self.cer_pct.ok_or_else(|| Error::MissingField {
            utterance_id: self.utterance_id.clone(),
            field: "cer_pct",
            stage: "validate",
        })
    }

    pub(crate) fn require_speakers(&self) -> Result<u32> {
        self.num_speakers.ok_or_else(|| Error::MissingField {
            utterance_id: self.utterance_id.clone(),
            field: "num_speakers",
            stage: "speakers",
        })
    }
}

/// Chapter-level metadata; bandwidth is estimated once per chapter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ChapterRecord {
    pub chapter_id: String,
    pub book_id: String,
    pub speaker_id: String,
    pub audio_path: String,
    pub sample_rate_hz: u32,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub bandwidth_hz: Option<u32>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub book_text_path: Option<String>,
    #[cfg_attr(feature = "serde", serde(default))]
    pub gender: Gender,
}

impl ChapterRecord {
    pub fn nyquist_hz(&self) -> u32 {
        self.sample_rate_hz / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.chapter_id.is_empty() {
            return Err(invariant("chapter_id", "must not be empty"));
        }
        if self.sample_rate_hz == 0 {
            return Err(invariant("sample_rate_hz", "must be positive"));
        }
        if let Some(bw) = self.bandwidth_hz {
            if bw == 0 || bw > self.nyquist_hz() {
                return Err(invariant(
                    "bandwidth_hz",
                    format!("{bw} Hz outside (0, {}] Hz", self.nyquist_hz()),
                ));
            }
        }
        Ok(())
    }
}

/// Declarative gates defining a corpus subset.
///
/// `max_cer_pct = inf` and `max_num_speakers = None` disable those gates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SubsetSpec {
    pub min_bandwidth_hz: u32,
    /// Exclusive upper bound on CER.
    pub max_cer_pct: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub max_num_speakers: Option<u32>,
    pub target_sample_rate_hz: u32,
}

impl SubsetSpec {
    /// Full-bandwidth 22.05 kHz subset.
    pub fn khz22() -> Self {
        SubsetSpec {
            min_bandwidth_hz: 11_000,
            max_cer_pct: 100.0,
            max_num_speakers: None,
            target_sample_rate_hz: 22_050,
        }
    }

    /// 44.1 kHz subset with the 13 kHz bandwidth floor.
    pub fn khz44() -> Self {
        SubsetSpec {
            min_bandwidth_hz: 13_000,
            max_cer_pct: 100.0,
            max_num_speakers: None,
            target_sample_rate_hz: 44_100,
        }
    }

    /// Admits every record, including those without metrics.
    pub fn open() -> Self {
        SubsetSpec {
            min_bandwidth_hz: 0,
            max_cer_pct: f64::INFINITY,
            max_num_speakers: None,
            target_sample_rate_hz: 44_100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_cer_pct.is_nan() || self.max_cer_pct < 0.0 {
            return Err(invariant("max_cer_pct", "must be non-negative"));
        }
        if self.target_sample_rate_hz == 0 {
            return Err(invariant("target_sample_rate_hz", "must be positive"));
        }
        if self.min_bandwidth_hz > self.target_sample_rate_hz / 2 {
            return Err(invariant(
                "min_bandwidth_hz",
                format!(
                    "{} Hz exceeds the Nyquist frequency of {} Hz",
                    self.min_bandwidth_hz, self.target_sample_rate_hz
                ),
            ));
        }
        Ok(())
    }
}
