//! The staged curation run.
//!
//! Stages execute in a fixed order, each over the previous stage's records.
//! Every stage writes its own manifest, a rejects manifest and a JSON
//! report under the output directory, prefixed with the stage ordinal
//! (`04_segment.jsonl`, `04_segment.rejects.jsonl`,
//! `04_segment.report.json`). Inputs are never modified.
//!
//! Work is spread over a bounded rayon pool, one task per utterance (per
//! chapter where audio is involved). Outputs are sorted by utterance id
//! before writing, so the worker count never changes the bytes produced.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use curate_core::audio::{mixdown, resample, trim_span, AudioBuffer, TrimParams};
use curate_core::bandwidth::{chapter_bandwidth, SpectrumParams, Window};
use curate_core::curation::{apply_speaker_counts, StatsReport};
use curate_core::segmentation::{
    apply_split, choose_split, find_candidate_pauses, split_seed, Abbreviations, AlignmentTrack,
};
use curate_core::text::{
    clean_formatting, edit_stats, normalize_spoken, passes_cer_gate, BookIndex, NormalizationRules,
};
use curate_core::{ChapterRecord, Seconds, TextSource, UtteranceRecord};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{validate_config, PipelineConfig, Stage, StageToggles};
use crate::error::{io_err, Error, Result};
use crate::external::{encode, load_audio};
use crate::formats::{read_alignments, read_hypotheses, read_predicted_text, read_speaker_counts};
use crate::jsonl::write_atomic;
use crate::manifest::{read_chapters, read_manifest, write_chapters, write_manifest, ManifestRow};
use crate::report;

/// Counts for one stage. `records_in - rejected + created = records_out`,
/// where `created` counts the extra records produced by splitting.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub records_in: usize,
    pub records_out: usize,
    pub created: usize,
    pub rejected: usize,
    pub reject_reasons: BTreeMap<String, usize>,
    pub notes: BTreeMap<String, usize>,
}

impl StageReport {
    pub fn is_balanced(&self) -> bool {
        self.records_in + self.created == self.records_out + self.rejected
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub reports: Vec<StageReport>,
    pub stats: Option<StatsReport>,
    pub final_manifest: Option<PathBuf>,
}

impl RunSummary {
    pub fn rejected(&self) -> usize {
        self.reports.iter().map(|r| r.rejected).sum()
    }
}

/// A record quarantined by a stage.
struct Reject {
    row: ManifestRow,
    reason: &'static str,
    detail: String,
}

impl Reject {
    fn new(row: ManifestRow, reason: &'static str, detail: impl ToString) -> Self {
        Reject {
            row,
            reason,
            detail: detail.to_string(),
        }
    }

    fn into_row(self, stage: Stage) -> ManifestRow {
        let mut row = self.row;
        row.extra.insert("reject_stage".into(), Value::from(stage.name()));
        row.extra.insert("reject_reason".into(), Value::from(self.reason));
        row.extra.insert("reject_detail".into(), Value::from(self.detail));
        row
    }
}

/// What one unit of work produced.
#[derive(Default)]
struct Output {
    kept: Vec<ManifestRow>,
    rejects: Vec<Reject>,
    notes: Vec<&'static str>,
}

impl Output {
    fn keep(row: ManifestRow) -> Self {
        Output {
            kept: vec![row],
            ..Default::default()
        }
    }

    fn reject(row: ManifestRow, reason: &'static str, detail: impl ToString) -> Self {
        Output {
            rejects: vec![Reject::new(row, reason, detail)],
            ..Default::default()
        }
    }

    fn note(mut self, note: &'static str) -> Self {
        self.notes.push(note);
        self
    }

    fn absorb(&mut self, other: Output) {
        self.kept.extend(other.kept);
        self.rejects.extend(other.rejects);
        self.notes.extend(other.notes);
    }
}

struct Inputs {
    chapters: Option<BTreeMap<String, ChapterRecord>>,
    audio_root: PathBuf,
    book_text_root: PathBuf,
    predicted: BTreeMap<String, String>,
    rules: NormalizationRules,
    abbreviations: Abbreviations,
}

fn parent_of(p: &Path) -> PathBuf {
    p.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn resolve(root: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        root.join(p)
    }
}

/// Which inputs each enabled stage needs, checked before any work starts.
fn preflight(cfg: &PipelineConfig, stages: &StageToggles) -> Result<()> {
    let p = &cfg.paths;
    let need = |stage: Stage, what: &str, path: &Option<PathBuf>| -> Result<()> {
        if !stages.enabled(stage) {
            return Ok(());
        }
        match path {
            Some(path) if path.exists() => Ok(()),
            Some(path) => Err(Error::MissingInput {
                stage: stage.name(),
                what: format!("{what} at {}", path.display()),
            }),
            None => Err(Error::MissingInput {
                stage: stage.name(),
                what: format!("paths.{what}"),
            }),
        }
    };
    need(Stage::Text, "chapters", &p.chapters)?;
    need(Stage::Audio, "chapters", &p.chapters)?;
    need(Stage::Bandwidth, "chapters", &p.chapters)?;
    need(Stage::Segment, "alignments", &p.alignments)?;
    need(Stage::Validate, "hypotheses", &p.hypotheses)?;
    need(Stage::Speakers, "speaker_counts", &p.speaker_counts)?;
    if !p.manifest.exists() {
        return Err(Error::MissingInput {
            stage: "input",
            what: format!("manifest at {}", p.manifest.display()),
        });
    }
    Ok(())
}

fn load_inputs(cfg: &PipelineConfig) -> Result<Inputs> {
    let p = &cfg.paths;
    let chapters = match &p.chapters {
        Some(path) if path.exists() => Some(
            read_chapters(path)?
                .into_iter()
                .map(|c| (c.chapter_id.clone(), c))
                .collect(),
        ),
        _ => None,
    };
    let chapters_dir = p.chapters.as_deref().map(parent_of).unwrap_or_default();
    let rules = match &p.rules {
        Some(path) => NormalizationRules::parse(&fs::read_to_string(path).map_err(io_err(path))?)?,
        None => NormalizationRules::default(),
    };
    let abbreviations = match &p.abbreviations {
        Some(path) => Abbreviations::parse(&fs::read_to_string(path).map_err(io_err(path))?),
        None => Abbreviations::default(),
    };
    let predicted = match &p.predicted_text {
        Some(path) => read_predicted_text(path)?,
        None => BTreeMap::new(),
    };
    Ok(Inputs {
        chapters,
        predicted,
        audio_root: p.audio_root.clone().unwrap_or_else(|| chapters_dir.clone()),
        book_text_root: p.book_text_root.clone().unwrap_or(chapters_dir),
        rules,
        abbreviations,
    })
}

/// Runs every enabled stage. `stages` overrides the config's toggles when
/// given.
pub fn run_pipeline(cfg: &PipelineConfig, stages: Option<&StageToggles>) -> Result<RunSummary> {
    let violations = validate_config(cfg);
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(violations));
    }
    let stages = stages.unwrap_or(&cfg.stages);
    preflight(cfg, stages)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .expect("thread pool");
    pool.install(|| run_stages(cfg, stages))
}

fn run_stages(cfg: &PipelineConfig, stages: &StageToggles) -> Result<RunSummary> {
    let out = &cfg.paths.output;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut inputs = load_inputs(cfg)?;
    let mut rows = read_manifest(&cfg.paths.manifest)?;
    rows.sort_by(|a, b| a.record.utterance_id.cmp(&b.record.utterance_id));

    let mut reports = Vec::new();
    let mut chapters_changed = false;
    for stage in Stage::ALL
        .into_iter()
        .filter(|&s| s != Stage::Stats && stages.enabled(s))
    {
        let records_in = rows.len();
        info!("{stage}: {records_in} records in");
        let result = match stage {
            Stage::Text => text_stage(rows, &inputs),
            Stage::Audio => {
                chapters_changed = true;
                audio_stage(rows, cfg, &mut inputs)?
            }
            Stage::Bandwidth => {
                chapters_changed = true;
                bandwidth_stage(rows, cfg, &mut inputs)
            }
            Stage::Segment => segment_stage(rows, cfg, &inputs)?,
            Stage::Validate => validate_stage(rows, cfg)?,
            Stage::Speakers => speakers_stage(rows, cfg)?,
            Stage::Stats => unreachable!(),
        };
        let (next, report) = finish_stage(stage, records_in, result, out)?;
        if stage == Stage::Audio || stage == Stage::Bandwidth {
            if let Some(ch) = &inputs.chapters {
                let ch: Vec<ChapterRecord> = ch.values().cloned().collect();
                write_chapters(&ch, &stage_path(out, stage, "chapters.jsonl"))?;
            }
        }
        info!(
            "{stage}: {} out, {} rejected, {} created",
            report.records_out, report.rejected, report.created
        );
        rows = next;
        reports.push(report);
    }

    let final_manifest = if reports.is_empty() {
        None
    } else {
        let path = out.join("manifest.jsonl");
        write_manifest(&rows, &path)?;
        if let (Some(ch), true) = (&inputs.chapters, chapters_changed) {
            let ch: Vec<ChapterRecord> = ch.values().cloned().collect();
            write_chapters(&ch, &out.join("chapters.jsonl"))?;
        }
        Some(path)
    };

    let stats = if stages.enabled(Stage::Stats) {
        let records: Vec<UtteranceRecord> = rows.iter().map(|r| r.record.clone()).collect();
        let stats = report::par_corpus_stats(&records);
        report::write_stats(&stats, out)?;
        info!("stats: {} utterances, {:.3} h", stats.utterances, stats.total_hours);
        Some(stats)
    } else {
        None
    };

    Ok(RunSummary {
        reports,
        stats,
        final_manifest,
    })
}

fn stage_path(out: &Path, stage: Stage, suffix: &str) -> PathBuf {
    out.join(format!("{:02}_{}.{suffix}", stage.ordinal(), stage.name()))
}

fn finish_stage(
    stage: Stage,
    records_in: usize,
    result: Output,
    out: &Path,
) -> Result<(Vec<ManifestRow>, StageReport)> {
    let Output {
        mut kept,
        rejects,
        notes,
    } = result;
    kept.sort_by(|a, b| a.record.utterance_id.cmp(&b.record.utterance_id));
    if let Some(w) = kept
        .windows(2)
        .find(|w| w[0].record.utterance_id == w[1].record.utterance_id)
    {
        return Err(curate_core::Error::Duplicate(w[0].record.utterance_id.clone()).into());
    }
    let mut report = StageReport {
        stage: stage.name().into(),
        records_in,
        records_out: kept.len(),
        rejected: rejects.len(),
        ..Default::default()
    };
    report.created = (report.records_out + report.rejected).saturating_sub(records_in);
    for r in &rejects {
        *report.reject_reasons.entry(r.reason.into()).or_default() += 1;
    }
    for n in notes {
        *report.notes.entry(n.into()).or_default() += 1;
    }
    let mut rejects: Vec<ManifestRow> = rejects.into_iter().map(|r| r.into_row(stage)).collect();
    rejects.sort_by(|a, b| a.record.utterance_id.cmp(&b.record.utterance_id));

    write_manifest(&kept, &stage_path(out, stage, "jsonl"))?;
    write_manifest(&rejects, &stage_path(out, stage, "rejects.jsonl"))?;
    let mut json = serde_json::to_vec_pretty(&report).expect("report serializes");
    json.push(b'\n');
    write_atomic(&stage_path(out, stage, "report.json"), &json)?;
    Ok((kept, report))
}

fn collect(parts: Vec<Output>) -> Output {
    let mut all = Output::default();
    for p in parts {
        all.absorb(p);
    }
    all
}

fn group_by_chapter(rows: Vec<ManifestRow>) -> BTreeMap<String, Vec<ManifestRow>> {
    let mut groups: BTreeMap<String, Vec<ManifestRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.record.chapter_id.clone()).or_default().push(r);
    }
    groups
}

fn reject_all(rows: Vec<ManifestRow>, reason: &'static str, detail: &str) -> Output {
    collect(rows.into_iter().map(|r| Output::reject(r, reason, detail)).collect())
}

// ---------------------------------------------------------------------------
// text: punctuation recovery and normalization
// ---------------------------------------------------------------------------

fn text_stage(rows: Vec<ManifestRow>, inputs: &Inputs) -> Output {
    let chapters = inputs.chapters.as_ref().expect("preflight checked chapters");
    let predicted = &inputs.predicted;
    let groups = group_by_chapter(rows);
    let parts: Vec<Output> = groups
        .into_par_iter()
        .map(|(chapter_id, rows)| {
            let Some(ch) = chapters.get(&chapter_id) else {
                return reject_all(rows, "unknown_chapter", &chapter_id);
            };
            let index = match &ch.book_text_path {
                Some(p) => {
                    let path = resolve(&inputs.book_text_root, p);
                    match fs::read_to_string(&path) {
                        Ok(text) => Some(BookIndex::new(&text)),
                        Err(e) => {
                            warn!("chapter {chapter_id}: cannot read {}: {e}", path.display());
                            None
                        }
                    }
                }
                None => None,
            };
            let parts: Vec<Output> = rows
                .into_par_iter()
                .map(|row| restore_text(row, index.as_ref(), predicted, &inputs.rules))
                .collect();
            collect(parts)
        })
        .collect();
    collect(parts)
}

fn restore_text(
    mut row: ManifestRow,
    index: Option<&BookIndex>,
    predicted: &BTreeMap<String, String>,
    rules: &NormalizationRules,
) -> Output {
    let rec = &mut row.record;
    let found = index.and_then(|ix| ix.find(&rec.raw_text));
    let mut notes = Vec::new();
    let punctuated = match &found {
        Some(m) => {
            if m.occurrences > 1 {
                notes.push("multiple_occurrences");
            }
            rec.text_source = Some(TextSource::BookMatch);
            notes.push("book_match");
            m.restored_text.clone()
        }
        None => {
            rec.text_source = Some(TextSource::PredictedPc);
            match predicted.get(&rec.utterance_id) {
                Some(t) => {
                    notes.push("predicted_pc");
                    t.clone()
                }
                None => {
                    notes.push("no_pc_source");
                    rec.raw_text.clone()
                }
            }
        }
    };
    let normalized = normalize_spoken(&clean_formatting(&punctuated, rules), rules);
    if !normalized.flagged.is_empty() {
        notes.push("flagged_tokens");
    }
    if normalized.text.is_empty() {
        return Output::reject(row, "empty_text", "normalized text is empty");
    }
    rec.text = normalized.text;
    let mut out = Output::keep(row);
    out.notes = notes;
    out
}

// ---------------------------------------------------------------------------
// audio: resampling and silence trimming
// ---------------------------------------------------------------------------

fn audio_stage(rows: Vec<ManifestRow>, cfg: &PipelineConfig, inputs: &mut Inputs) -> Result<Output> {
    let a = &cfg.audio;
    let audio_dir = cfg.paths.output.join("audio");
    fs::create_dir_all(&audio_dir).map_err(io_err(&audio_dir))?;
    let chapters = inputs.chapters.as_ref().expect("preflight checked chapters");
    let trim = TrimParams {
        threshold_db: a.trim_threshold_db,
        max_edge_silence_s: a.max_edge_silence_s,
        ..TrimParams::default()
    };
    let groups = group_by_chapter(rows);
    let results: Vec<(Option<ChapterRecord>, Output)> = groups
        .into_par_iter()
        .map(|(chapter_id, rows)| {
            let Some(ch) = chapters.get(&chapter_id) else {
                return (None, reject_all(rows, "unknown_chapter", &chapter_id));
            };
            let src = resolve(&inputs.audio_root, &ch.audio_path);
            let audio = match prepare_chapter_audio(&src, a.decoder.as_deref(), a.target_sample_rate_hz) {
                Ok(b) => b,
                Err(e) => {
                    warn!("chapter {chapter_id}: {e}");
                    return (None, reject_all(rows, "audio_unreadable", &e.to_string()));
                }
            };
            let stored = match store_chapter_audio(&audio, &audio_dir, &chapter_id, a) {
                Ok(name) => name,
                Err(e) => {
                    warn!("chapter {chapter_id}: {e}");
                    return (None, reject_all(rows, "audio_unwritable", &e.to_string()));
                }
            };
            let mut ch = ch.clone();
            ch.audio_path = format!("audio/{stored}");
            ch.sample_rate_hz = audio.sample_rate_hz();
            if ch.bandwidth_hz.is_some_and(|bw| bw > ch.nyquist_hz()) {
                ch.bandwidth_hz = None;
            }
            let parts: Vec<Output> = rows
                .into_par_iter()
                .map(|mut row| {
                    row.record.audio_path = ch.audio_path.clone();
                    trim_utterance(row, &audio, &trim)
                })
                .collect();
            (Some(ch), collect(parts))
        })
        .collect();

    let mut all = Output::default();
    let chapters = inputs.chapters.as_mut().expect("chapters");
    for (ch, out) in results {
        if let Some(ch) = ch {
            chapters.insert(ch.chapter_id.clone(), ch);
        }
        all.absorb(out);
    }
    inputs.audio_root = cfg.paths.output.clone();
    Ok(all)
}

fn prepare_chapter_audio(path: &Path, decoder: Option<&str>, target_hz: u32) -> Result<AudioBuffer> {
    let raw = load_audio(path, decoder)?;
    Ok(resample(&mixdown(&raw), target_hz)?)
}

/// Writes the resampled chapter under `dir`, through the encoder when one
/// is configured. Returns the stored file name.
fn store_chapter_audio(
    buf: &AudioBuffer,
    dir: &Path,
    chapter_id: &str,
    a: &crate::config::AudioConfig,
) -> Result<String> {
    let wav_name = format!("{chapter_id}.wav");
    let wav_path = dir.join(&wav_name);
    crate::wav::save_pcm(buf, &wav_path)?;
    match &a.encoder {
        Some(template) => {
            let name = format!("{chapter_id}.{}", a.encoded_extension);
            encode(template, &wav_path, &dir.join(&name))?;
            fs::remove_file(&wav_path).map_err(io_err(&wav_path))?;
            Ok(name)
        }
        None => Ok(wav_name),
    }
}

fn trim_utterance(mut row: ManifestRow, audio: &AudioBuffer, trim: &TrimParams) -> Output {
    let rate = audio.sample_rate_hz();
    let rec = &mut row.record;
    let start = rec.offset_s.to_samples(rate);
    let end = rec.end_s().to_samples(rate).min(audio.frames());
    if start >= end {
        let detail = format!(
            "span {}..{} outside {:.4} s of audio",
            rec.offset_s,
            rec.end_s(),
            audio.duration_s()
        );
        return Output::reject(row, "span_outside_audio", detail);
    }
    let clamped = end < rec.end_s().to_samples(rate);
    let Some(span) = trim_span(&audio.samples()[start..end], rate, trim) else {
        return Output::reject(row, "empty_after_trim", "no frame above the silence threshold");
    };
    let new_start = Seconds::from_samples(start + span.start, rate);
    let new_end = Seconds::from_samples(start + span.end, rate);
    if new_end <= new_start {
        return Output::reject(row, "empty_after_trim", "trimmed span rounds to zero length");
    }
    let changed = new_start != rec.offset_s || new_end - new_start != rec.duration_s;
    rec.offset_s = new_start;
    rec.duration_s = new_end - new_start;
    let mut out = Output::keep(row);
    if changed {
        out = out.note("trimmed");
    }
    if clamped {
        out = out.note("span_clamped");
    }
    out
}

// ---------------------------------------------------------------------------
// bandwidth: chapter-head estimate inherited by utterances
// ---------------------------------------------------------------------------

fn bandwidth_stage(rows: Vec<ManifestRow>, cfg: &PipelineConfig, inputs: &mut Inputs) -> Output {
    let b = &cfg.bandwidth;
    let params = SpectrumParams {
        fft_size: b.fft_size,
        hop: b.fft_size / 2,
        window: Window::Blackman,
    };
    let chapters = inputs.chapters.as_ref().expect("preflight checked chapters");
    let decoder = cfg.audio.decoder.as_deref();
    let groups = group_by_chapter(rows);
    let results: Vec<(Option<ChapterRecord>, Output)> = groups
        .into_par_iter()
        .map(|(chapter_id, rows)| {
            let Some(ch) = chapters.get(&chapter_id) else {
                return (None, reject_all(rows, "unknown_chapter", &chapter_id));
            };
            let path = resolve(&inputs.audio_root, &ch.audio_path);
            let est = load_audio(&path, decoder)
                .and_then(|buf| Ok(chapter_bandwidth(&buf, b.analysis_s, b.threshold_db, &params)?));
            let est = match est {
                Ok(e) => e,
                Err(e) => {
                    warn!("chapter {chapter_id}: {e}");
                    return (None, reject_all(rows, "bandwidth_failed", &e.to_string()));
                }
            };
            let mut ch = ch.clone();
            let bw = est.bandwidth_hz().min(ch.nyquist_hz());
            if est.degenerate || bw == 0 {
                ch.bandwidth_hz = None;
                return (Some(ch), reject_all(rows, "silent_chapter", "spectrum has no energy"));
            }
            ch.bandwidth_hz = Some(bw);
            let parts = rows
                .into_iter()
                .map(|mut r| {
                    r.record.bandwidth_hz = Some(bw);
                    Output::keep(r)
                })
                .collect();
            (Some(ch), collect(parts))
        })
        .collect();

    let mut all = Output::default();
    let chapters = inputs.chapters.as_mut().expect("chapters");
    for (ch, out) in results {
        if let Some(ch) = ch {
            chapters.insert(ch.chapter_id.clone(), ch);
        }
        all.absorb(out);
    }
    all
}

// ---------------------------------------------------------------------------
// segment: split at the longest sentence-final pause
// ---------------------------------------------------------------------------

fn segment_stage(rows: Vec<ManifestRow>, cfg: &PipelineConfig, inputs: &Inputs) -> Result<Output> {
    let alignments = read_alignments(cfg.paths.alignments.as_ref().expect("preflight"))?;
    let min_pause = Seconds::from_secs_f64(cfg.segmentation.min_pause_s);
    let max_duration = Seconds::from_secs_f64(cfg.segmentation.max_duration_s);
    let seed = cfg.seed;
    let parts: Vec<Output> = rows
        .into_par_iter()
        .map(|row| {
            let rec = &row.record;
            let Some(tokens) = alignments.get(&rec.utterance_id) else {
                return Output::reject(row, "missing_alignment", "no alignment for this utterance");
            };
            let track = match AlignmentTrack::new(tokens.clone()) {
                Ok(t) => t.rebased(rec.offset_s),
                Err(e) => return Output::reject(row, "invalid_alignment", e),
            };
            let pauses = match find_candidate_pauses(&track, &rec.text, min_pause, &inputs.abbreviations) {
                Ok(p) => p,
                Err(e) => return Output::reject(row, "token_mismatch", e),
            };
            let decision = choose_split(pauses, split_seed(&rec.utterance_id, seed));
            let children = match apply_split(rec, &decision) {
                Ok(c) => c,
                Err(e) => return Output::reject(row, "split_out_of_range", e),
            };
            let mut out = Output::default();
            if children.len() > 1 {
                out.notes.push("split");
            }
            for child in children {
                let child = ManifestRow {
                    record: child,
                    extra: row.extra.clone(),
                };
                if child.record.duration_s > max_duration {
                    let detail = format!("{} > {max_duration}", child.record.duration_s);
                    out.rejects.push(Reject::new(child, "over_max_duration", detail));
                } else {
                    out.kept.push(child);
                }
            }
            out
        })
        .collect();
    Ok(collect(parts))
}

// ---------------------------------------------------------------------------
// validate: WER/CER against ASR hypotheses
// ---------------------------------------------------------------------------

fn validate_stage(rows: Vec<ManifestRow>, cfg: &PipelineConfig) -> Result<Output> {
    let hyps = read_hypotheses(cfg.paths.hypotheses.as_ref().expect("preflight"))?;
    let max_cer = cfg.validation.max_cer_pct;
    let parts: Vec<Output> = rows
        .into_par_iter()
        .map(|mut row| {
            let Some(hyp) = hyps.get(&row.record.utterance_id) else {
                return Output::reject(row, "missing_hypothesis", "no ASR hypothesis");
            };
            let stats = match edit_stats(&row.record.text, hyp) {
                Ok(s) => s,
                Err(e) => return Output::reject(row, "empty_reference", e),
            };
            row.record.wer_pct = Some(stats.wer_pct);
            row.record.cer_pct = Some(stats.cer_pct);
            if passes_cer_gate(&stats, max_cer) {
                Output::keep(row)
            } else {
                let detail = format!("cer {:.2}% >= {max_cer}%", stats.cer_pct);
                Output::reject(row, "cer_gate", detail)
            }
        })
        .collect();
    Ok(collect(parts))
}

// ---------------------------------------------------------------------------
// speakers: diarization counts
// ---------------------------------------------------------------------------

fn speakers_stage(rows: Vec<ManifestRow>, cfg: &PipelineConfig) -> Result<Output> {
    let counts = read_speaker_counts(cfg.paths.speaker_counts.as_ref().expect("preflight"))?;
    let mut records: Vec<UtteranceRecord> = rows.iter().map(|r| r.record.clone()).collect();
    let missing = apply_speaker_counts(&mut records, &counts)?;
    if counts.is_empty() {
        warn!("speakers: count file is empty; records left untagged");
    }
    let mut out = Output::default();
    for (mut row, rec) in rows.into_iter().zip(records) {
        row.record = rec;
        out.kept.push(row);
    }
    out.notes.extend(missing.iter().map(|_| "missing_count"));
    Ok(out)
}
