//! Dev/test evaluation splits for seen and unseen speakers.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::rng::SplitMix64;
use crate::time::Seconds;
use crate::{Error, Gender, Result, UtteranceRecord};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SplitName {
    Train,
    DevSeen,
    TestSeen,
    DevUnseen,
    TestUnseen,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SplitPlan {
    pub split_name: SplitName,
    pub utterance_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitParams {
    pub speakers: usize,
    /// Speakers whose every utterance is held out of training.
    pub unseen_speakers: usize,
    pub per_split: usize,
    pub min_speaker_audio: Seconds,
    pub max_speaker_audio: Seconds,
    pub min_bandwidth_hz: u32,
    /// Minimum picks per duration tercile and per bandwidth tercile, per
    /// speaker and split.
    pub min_per_stratum: usize,
    /// Largest allowed |male - female| among selected speakers.
    pub max_gender_gap: usize,
}

impl Default for SplitParams {
    fn default() -> Self {
        SplitParams {
            speakers: 50,
            unseen_speakers: 0,
            per_split: 20,
            min_speaker_audio: Seconds::from_ticks(15 * 60 * 10_000),
            max_speaker_audio: Seconds::from_ticks(60 * 60 * 10_000),
            min_bandwidth_hz: 13_000,
            min_per_stratum: 5,
            max_gender_gap: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct EvalSplits {
    /// One plan per [`SplitName`], in enum order.
    pub plans: Vec<SplitPlan>,
    pub seen_speakers: Vec<String>,
    pub unseen_speakers: Vec<String>,
    /// Whether the gender gap bound could be met.
    pub gender_balanced: bool,
    /// Whether every speaker/split met the per-stratum minimum.
    pub strata_satisfied: bool,
}

impl EvalSplits {
    pub fn plan(&self, name: SplitName) -> &SplitPlan {
        self.plans
            .iter()
            .find(|p| p.split_name == name)
            .expect("all plans present")
    }
}

/// Clean enough for evaluation: full bandwidth, perfect ASR agreement, one
/// speaker. Records without those fields are not eligible.
pub fn eval_eligible(r: &UtteranceRecord, min_bandwidth_hz: u32) -> bool {
    r.bandwidth_hz.is_some_and(|b| b >= min_bandwidth_hz) && r.wer_pct == Some(0.0) && r.num_speakers == Some(1)
}

struct Candidate<'a> {
    id: &'a str,
    gender: Gender,
    eligible: Vec<&'a UtteranceRecord>,
}

/// Selects evaluation speakers and samples `per_split` dev and test
/// utterances from each; everything else from seen speakers stays in train.
///
/// A speaker qualifies with total audio in the configured range and at
/// least `2 * per_split` eligible utterances. Speakers are drawn
/// alternating male/female, then unknown, then the remaining gender. Within
/// a speaker, utterances are picked greedily, alternating dev/test, to cover
/// duration and bandwidth terciles.
pub fn sample_eval_splits(records: &[UtteranceRecord], params: &SplitParams, seed: u64) -> Result<EvalSplits> {
    let mut totals: BTreeMap<&str, Seconds> = BTreeMap::new();
    let mut genders: BTreeMap<&str, Gender> = BTreeMap::new();
    let mut eligible: BTreeMap<&str, Vec<&UtteranceRecord>> = BTreeMap::new();
    for r in records {
        let spk = r.speaker_id.as_str();
        let total = totals.entry(spk).or_default();
        *total = *total + r.duration_s;
        let g = genders.entry(spk).or_default();
        if *g == Gender::Unknown {
            *g = r.gender;
        }
        if eval_eligible(r, params.min_bandwidth_hz) {
            eligible.entry(spk).or_default().push(r);
        }
    }
    let mut pool: Vec<Candidate> = totals
        .iter()
        .filter(|(_, &t)| t >= params.min_speaker_audio && t <= params.max_speaker_audio)
        .filter_map(|(&id, _)| {
            let e = eligible.remove(id)?;
            (e.len() >= 2 * params.per_split).then(|| Candidate {
                id,
                gender: genders[id],
                eligible: e,
            })
        })
        .collect();
    let needed = params.speakers + params.unseen_speakers;
    if pool.len() < needed {
        return Err(Error::NotEnoughSpeakers {
            found: pool.len(),
            needed,
        });
    }

    let mut rng = SplitMix64::new(seed);
    rng.shuffle(&mut pool);
    let (order, gender_balanced) = gender_balanced_order(&pool, needed, params.max_gender_gap);
    let mut seen: Vec<&Candidate> = order[..params.speakers].iter().map(|&i| &pool[i]).collect();
    let mut unseen: Vec<&Candidate> = order[params.speakers..needed].iter().map(|&i| &pool[i]).collect();
    seen.sort_by_key(|c| c.id);
    unseen.sort_by_key(|c| c.id);

    let mut strata_satisfied = true;
    let mut picks: BTreeMap<SplitName, Vec<String>> = BTreeMap::new();
    let mut held_out: BTreeSet<&str> = BTreeSet::new();
    for (group, dev, test) in [
        (&seen, SplitName::DevSeen, SplitName::TestSeen),
        (&unseen, SplitName::DevUnseen, SplitName::TestUnseen),
    ] {
        for c in group.iter() {
            let mut spk_rng = SplitMix64::for_key(c.id, seed);
            let (d, t, ok) = stratified_picks(&c.eligible, params, &mut spk_rng);
            strata_satisfied &= ok;
            for id in d.iter().chain(&t) {
                held_out.insert(id);
            }
            picks.entry(dev).or_default().extend(d.into_iter().map(String::from));
            picks.entry(test).or_default().extend(t.into_iter().map(String::from));
        }
    }
    let unseen_ids: BTreeSet<&str> = unseen.iter().map(|c| c.id).collect();
    let train: Vec<String> = records
        .iter()
        .filter(|r| !held_out.contains(r.utterance_id.as_str()) && !unseen_ids.contains(r.speaker_id.as_str()))
        .map(|r| r.utterance_id.clone())
        .collect();
    picks.insert(SplitName::Train, train);

    let plans = [
        SplitName::Train,
        SplitName::DevSeen,
        SplitName::TestSeen,
        SplitName::DevUnseen,
        SplitName::TestUnseen,
    ]
    .into_iter()
    .map(|name| {
        let mut ids = picks.remove(&name).unwrap_or_default();
        if name != SplitName::Train {
            ids.sort();
        }
        SplitPlan {
            split_name: name,
            utterance_ids: ids,
        }
    })
    .collect();
    Ok(EvalSplits {
        plans,
        seen_speakers: seen.iter().map(|c| String::from(c.id)).collect(),
        unseen_speakers: unseen.iter().map(|c| String::from(c.id)).collect(),
        gender_balanced,
        strata_satisfied,
    })
}

/// Indices into `pool` (already shuffled) taking `n` speakers: male and
/// female alternately, then unknown, then whichever gender remains.
fn gender_balanced_order(pool: &[Candidate], n: usize, max_gap: usize) -> (Vec<usize>, bool) {
    let of = |g: Gender| -> Vec<usize> { (0..pool.len()).filter(|&i| pool[i].gender == g).collect() };
    let (male, female, unknown) = (of(Gender::Male), of(Gender::Female), of(Gender::Unknown));
    let mut out = Vec::with_capacity(n);
    let pairs = male.len().min(female.len());
    let (mut m, mut f) = (0, 0);
    while out.len() < n && m < pairs {
        out.push(male[m]);
        m += 1;
        if out.len() < n {
            out.push(female[f]);
            f += 1;
        }
    }
    let rest = unknown.iter().chain(&male[m..]).chain(&female[f..]);
    out.extend(rest.take(n - out.len()));
    let count = |g| out.iter().filter(|&&i| pool[i].gender == g).count();
    let balanced = count(Gender::Male).abs_diff(count(Gender::Female)) <= max_gap;
    (out, balanced)
}

/// Rank-based tercile (0, 1, 2) of each item under `key`.
fn terciles<K: Ord>(items: &[&UtteranceRecord], key: impl Fn(&UtteranceRecord) -> K) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.sort_by(|&a, &b| {
        key(items[a])
            .cmp(&key(items[b]))
            .then(items[a].utterance_id.cmp(&items[b].utterance_id))
    });
    let mut out = alloc::vec![0; items.len()];
    for (rank, &i) in idx.iter().enumerate() {
        out[i] = rank * 3 / items.len();
    }
    out
}

fn stratified_picks<'a>(
    items: &[&'a UtteranceRecord],
    params: &SplitParams,
    rng: &mut SplitMix64,
) -> (Vec<&'a str>, Vec<&'a str>, bool) {
    let dur = terciles(items, |r| r.duration_s);
    let bw = terciles(items, |r| r.bandwidth_hz);
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| items[i].utterance_id.as_str());
    rng.shuffle(&mut order);

    let floor = params.min_per_stratum;
    let even = params.per_split.div_ceil(3);
    // counts[split][dimension][tercile]
    let mut counts = [[[0usize; 3]; 2]; 2];
    let mut chosen: [Vec<&str>; 2] = [Vec::new(), Vec::new()];
    let mut used = alloc::vec![false; items.len()];
    for step in 0..2 * params.per_split {
        let s = step % 2;
        let c = &counts[s];
        let score = |i: usize| {
            let (d, b) = (c[0][dur[i]], c[1][bw[i]]);
            100 * (usize::from(d < floor) + usize::from(b < floor)) + usize::from(d < even) + usize::from(b < even)
        };
        // first maximal item in shuffled order
        let best = order
            .iter()
            .copied()
            .filter(|&i| !used[i])
            .fold(None::<usize>, |acc, i| match acc {
                Some(a) if score(a) >= score(i) => Some(a),
                _ => Some(i),
            });
        let Some(i) = best else { break };
        used[i] = true;
        counts[s][0][dur[i]] += 1;
        counts[s][1][bw[i]] += 1;
        chosen[s].push(items[i].utterance_id.as_str());
    }
    let ok = counts
        .iter()
        .all(|c| c.iter().all(|dim| dim.iter().all(|&n| n >= floor)));
    let [dev, test] = chosen;
    (dev, test, ok)
}
