use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result, SubsetSpec, UtteranceRecord};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Diarization output for one utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SpeakerCount {
    pub utterance_id: String,
    pub num_speakers: u32,
}

/// Stamps `num_speakers` onto matching records. Returns the ids of records
/// that had no count.
pub fn apply_speaker_counts(records: &mut [UtteranceRecord], counts: &[SpeakerCount]) -> Result<Vec<String>> {
    let mut by_id = BTreeMap::new();
    for c in counts {
        if by_id.insert(c.utterance_id.as_str(), c.num_speakers).is_some() {
            return Err(Error::Duplicate(c.utterance_id.clone()));
        }
    }
    let mut missing = Vec::new();
    for r in records.iter_mut() {
        match by_id.get(r.utterance_id.as_str()) {
            Some(&n) => r.num_speakers = Some(n),
            None => missing.push(r.utterance_id.clone()),
        }
    }
    Ok(missing)
}

/// Whether `rec` passes every active gate of `spec`. A gate that cannot
/// reject anything (0 Hz, infinite CER, no speaker limit) is inactive and
/// does not need its field.
pub fn passes_subset(rec: &UtteranceRecord, spec: &SubsetSpec) -> Result<bool> {
    if spec.min_bandwidth_hz > 0 && rec.require_bandwidth()? < spec.min_bandwidth_hz {
        return Ok(false);
    }
    if spec.max_cer_pct.is_finite() && rec.require_cer()? >= spec.max_cer_pct {
        return Ok(false);
    }
    if let Some(max) = spec.max_num_speakers {
        if rec.require_speakers()? > max {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Records passing every gate, in input order.
pub fn build_subset(records: &[UtteranceRecord], spec: &SubsetSpec) -> Result<Vec<UtteranceRecord>> {
    spec.validate()?;
    let mut out = Vec::new();
    for r in records {
        if passes_subset(r, spec)? {
            out.push(r.clone());
        }
    }
    Ok(out)
}
