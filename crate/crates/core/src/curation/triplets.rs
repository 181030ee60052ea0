//! (context audio, transcript, target audio) triplets for voice-cloning TTS.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::time::Seconds;
use crate::{Result, UtteranceRecord};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct TripletParams {
    /// Targets with CER above this are dropped (inclusive bound).
    pub max_cer_pct: f64,
    /// Pairs below this similarity are dropped (inclusive bound).
    pub min_speaker_sim: f64,
    /// Contexts with a duration in this range are used whole.
    pub context_min: Seconds,
    pub context_max: Seconds,
    /// Longer contexts are cropped to this length from their start.
    pub context_crop: Seconds,
}

impl Default for TripletParams {
    fn default() -> Self {
        TripletParams {
            max_cer_pct: 3.0,
            min_speaker_sim: 0.6,
            context_min: Seconds::from_ticks(45_000),
            context_max: Seconds::from_ticks(55_000),
            context_crop: Seconds::from_ticks(50_000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Triplet {
    pub context_utterance_id: String,
    pub transcript: String,
    pub target_utterance_id: String,
    /// Context audio is the first `context_duration_s` of the context
    /// utterance.
    pub context_duration_s: Seconds,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TripletReport {
    pub triplets: usize,
    pub targets_over_cer: usize,
    pub pairs_below_sim: usize,
    pub pairs_missing_sim: usize,
    pub targets_without_context: usize,
}

/// Speaker similarity keyed by (context id, target id).
pub type SimilarityMap = BTreeMap<(String, String), f64>;

/// For each target passing the CER gate, pairs it with the first
/// same-speaker context, in preference order, whose similarity passes the
/// gate. Contexts already near the crop length come first (closest to it,
/// then by id); longer ones that need cropping follow by id. Pairs without a
/// similarity score are skipped and counted.
pub fn build_triplets(
    records: &[UtteranceRecord],
    sims: &SimilarityMap,
    params: &TripletParams,
) -> Result<(Vec<Triplet>, TripletReport)> {
    let mut by_speaker: BTreeMap<&str, Vec<&UtteranceRecord>> = BTreeMap::new();
    for r in records {
        by_speaker.entry(r.speaker_id.as_str()).or_default().push(r);
    }
    let mut contexts: BTreeMap<&str, Vec<(&UtteranceRecord, Seconds)>> = BTreeMap::new();
    for (spk, rs) in &by_speaker {
        let mut whole: Vec<_> = rs
            .iter()
            .filter(|r| r.duration_s >= params.context_min && r.duration_s <= params.context_max)
            .map(|r| (*r, r.duration_s))
            .collect();
        whole.sort_by_key(|(r, d)| ((d.ticks() - params.context_crop.ticks()).abs(), r.utterance_id.as_str()));
        let mut cropped: Vec<_> = rs
            .iter()
            .filter(|r| r.duration_s > params.context_max)
            .map(|r| (*r, params.context_crop))
            .collect();
        cropped.sort_by_key(|(r, _)| r.utterance_id.as_str());
        whole.extend(cropped);
        contexts.insert(spk, whole);
    }

    let mut report = TripletReport::default();
    let mut out = Vec::new();
    for target in records {
        if target.require_cer()? > params.max_cer_pct {
            report.targets_over_cer += 1;
            continue;
        }
        let mut chosen = None;
        for &(ctx, dur) in &contexts[target.speaker_id.as_str()] {
            if ctx.utterance_id == target.utterance_id {
                continue;
            }
            let key = (ctx.utterance_id.clone(), target.utterance_id.clone());
            match sims.get(&key) {
                None => report.pairs_missing_sim += 1,
                Some(&s) if s < params.min_speaker_sim => report.pairs_below_sim += 1,
                Some(_) => {
                    chosen = Some((ctx, dur));
                    break;
                }
            }
        }
        match chosen {
            Some((ctx, dur)) => out.push(Triplet {
                context_utterance_id: ctx.utterance_id.clone(),
                transcript: target.text.clone(),
                target_utterance_id: target.utterance_id.clone(),
                context_duration_s: dur,
            }),
            None => report.targets_without_context += 1,
        }
    }
    report.triplets = out.len();
    Ok((out, report))
}
