//! Subset gates, diarization counts, training triplets, evaluation splits
//! and corpus statistics.

mod splits;
mod stats;
mod subset;
mod triplets;

pub use splits::{eval_eligible, sample_eval_splits, EvalSplits, SplitName, SplitParams, SplitPlan};
pub use stats::{corpus_stats, Histogram, StatsAccumulator, StatsReport};
pub use subset::{apply_speaker_counts, build_subset, passes_subset, SpeakerCount};
pub use triplets::{build_triplets, SimilarityMap, Triplet, TripletParams, TripletReport};
