//! Pipeline configuration, read from a single TOML document.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Every threshold defaults to the published pipeline's value.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

/// Processing stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Text,
    Audio,
    Bandwidth,
    Segment,
    Validate,
    Speakers,
    Stats,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Text,
        Stage::Audio,
        Stage::Bandwidth,
        Stage::Segment,
        Stage::Validate,
        Stage::Speakers,
        Stage::Stats,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Text => "text",
            Stage::Audio => "audio",
            Stage::Bandwidth => "bandwidth",
            Stage::Segment => "segment",
            Stage::Validate => "validate",
            Stage::Speakers => "speakers",
            Stage::Stats => "stats",
        }
    }

    /// 1-based position, used to prefix stage outputs.
    pub fn ordinal(self) -> usize {
        self as usize + 1
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s.trim())
            .ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StageToggles {
    pub text: bool,
    pub audio: bool,
    pub bandwidth: bool,
    pub segment: bool,
    pub validate: bool,
    pub speakers: bool,
    pub stats: bool,
}

impl Default for StageToggles {
    fn default() -> Self {
        StageToggles {
            text: true,
            audio: true,
            bandwidth: true,
            segment: true,
            validate: true,
            speakers: true,
            stats: true,
        }
    }
}

impl StageToggles {
    pub fn none() -> Self {
        StageToggles {
            text: false,
            audio: false,
            bandwidth: false,
            segment: false,
            validate: false,
            speakers: false,
            stats: false,
        }
    }

    pub fn only(stages: &[Stage]) -> Self {
        let mut t = Self::none();
        for &s in stages {
            *t.get_mut(s) = true;
        }
        t
    }

    pub fn enabled(&self, stage: Stage) -> bool {
        match stage {
            Stage::Text => self.text,
            Stage::Audio => self.audio,
            Stage::Bandwidth => self.bandwidth,
            Stage::Segment => self.segment,
            Stage::Validate => self.validate,
            Stage::Speakers => self.speakers,
            Stage::Stats => self.stats,
        }
    }

    fn get_mut(&mut self, stage: Stage) -> &mut bool {
        match stage {
            Stage::Text => &mut self.text,
            Stage::Audio => &mut self.audio,
            Stage::Bandwidth => &mut self.bandwidth,
            Stage::Segment => &mut self.segment,
            Stage::Validate => &mut self.validate,
            Stage::Speakers => &mut self.speakers,
            Stage::Stats => &mut self.stats,
        }
    }
}

/// Inputs and the output directory. Only `manifest` and `output` are
/// always needed; the rest are checked per enabled stage.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub manifest: PathBuf,
    pub output: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chapters: Option<PathBuf>,
    /// Base for relative chapter `audio_path`s.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audio_root: Option<PathBuf>,
    /// Base for relative chapter `book_text_path`s.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub book_text_root: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_text: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignments: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speaker_counts: Option<PathBuf>,
    /// Replaces the bundled abbreviation list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abbreviations: Option<PathBuf>,
    /// Replaces the bundled normalization rules.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rules: Option<PathBuf>,
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.manifest);
        join(&mut self.output);
        for p in [
            &mut self.chapters,
            &mut self.audio_root,
            &mut self.book_text_root,
            &mut self.predicted_text,
            &mut self.alignments,
            &mut self.hypotheses,
            &mut self.speaker_counts,
            &mut self.abbreviations,
            &mut self.rules,
        ]
        .into_iter()
        .flatten()
        {
            join(p);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AudioConfig {
    pub target_sample_rate_hz: u32,
    /// Frames this far below the loudest frame count as silence.
    pub trim_threshold_db: f64,
    pub max_edge_silence_s: f64,
    /// Command producing WAV on stdout for non-WAV inputs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoder: Option<String>,
    /// Command converting the resampled WAV into the stored format.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub encoder: Option<String>,
    pub encoded_extension: String,
}

impl Default for AudioConfig {
    fn default() -> Self {
        AudioConfig {
            target_sample_rate_hz: 44_100,
            trim_threshold_db: 50.0,
            max_edge_silence_s: 0.5,
            decoder: None,
            encoder: None,
            encoded_extension: "flac".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandwidthConfig {
    pub threshold_db: f64,
    pub analysis_s: f64,
    pub fft_size: usize,
}

impl Default for BandwidthConfig {
    fn default() -> Self {
        BandwidthConfig {
            threshold_db: curate_core::bandwidth::DEFAULT_THRESHOLD_DB,
            analysis_s: curate_core::bandwidth::DEFAULT_ANALYSIS_S,
            fft_size: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    pub min_pause_s: f64,
    pub max_duration_s: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            min_pause_s: 0.08,
            max_duration_s: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationConfig {
    /// Utterances at or above this CER are rejected.
    pub max_cer_pct: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            max_cer_pct: curate_core::text::DEFAULT_MAX_CER_PCT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub workers: usize,
    pub paths: Paths,
    pub stages: StageToggles,
    pub audio: AudioConfig,
    pub bandwidth: BandwidthConfig,
    pub segmentation: SegmentationConfig,
    pub validation: ValidationConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            workers: 4,
            paths: Paths::default(),
            stages: StageToggles::default(),
            audio: AudioConfig::default(),
            bandwidth: BandwidthConfig::default(),
            segmentation: SegmentationConfig::default(),
            validation: ValidationConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(src: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(src)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads `path` and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg = Self::from_toml(&src).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map_or(0, |s| line_of(&src, s.start)),
            message: e.message().to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.paths.resolve(base);
        Ok(cfg)
    }
}

fn line_of(src: &str, byte: usize) -> usize {
    src[..byte.min(src.len())].matches('\n').count() + 1
}

/// Every violated constraint, each naming its field. Empty when the config
/// is usable.
pub fn validate_config(cfg: &PipelineConfig) -> Vec<String> {
    let mut v = Vec::new();
    let mut check = |ok: bool, field: &str, rule: &str| {
        if !ok {
            v.push(format!("{field}: {rule}"));
        }
    };
    let finite_nonneg = |x: f64| x.is_finite() && x >= 0.0;
    let finite_pos = |x: f64| x.is_finite() && x > 0.0;

    check(cfg.workers > 0, "workers", "must be at least 1");
    check(
        !cfg.paths.manifest.as_os_str().is_empty(),
        "paths.manifest",
        "must be set",
    );
    check(!cfg.paths.output.as_os_str().is_empty(), "paths.output", "must be set");

    let a = &cfg.audio;
    check(
        a.target_sample_rate_hz > 0,
        "audio.target_sample_rate_hz",
        "must be positive",
    );
    check(
        finite_pos(a.trim_threshold_db),
        "audio.trim_threshold_db",
        "must be a positive finite dB value",
    );
    check(
        finite_nonneg(a.max_edge_silence_s),
        "audio.max_edge_silence_s",
        "must be finite and >= 0",
    );
    check(
        !a.encoded_extension.is_empty() && !a.encoded_extension.contains(['/', '.']),
        "audio.encoded_extension",
        "must be a bare extension",
    );

    let b = &cfg.bandwidth;
    check(
        b.threshold_db.is_finite() && b.threshold_db <= 0.0,
        "bandwidth.threshold_db",
        "must be finite and <= 0",
    );
    check(finite_pos(b.analysis_s), "bandwidth.analysis_s", "must be positive");
    check(
        b.fft_size >= 16 && b.fft_size.is_power_of_two(),
        "bandwidth.fft_size",
        "must be a power of two >= 16",
    );

    let s = &cfg.segmentation;
    check(
        finite_nonneg(s.min_pause_s),
        "segmentation.min_pause_s",
        "must be finite and >= 0",
    );
    check(
        finite_pos(s.max_duration_s),
        "segmentation.max_duration_s",
        "must be positive",
    );

    check(
        cfg.validation.max_cer_pct > 0.0 && !cfg.validation.max_cer_pct.is_nan(),
        "validation.max_cer_pct",
        "must be positive",
    );
    v
}
