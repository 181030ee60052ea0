use alloc::string::String;

/// Errors raised by the pure curation algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    Invariant { field: &'static str, reason: String },

    #[error("audio buffer too short: need {needed} samples, got {got}")]
    BufferTooShort { needed: usize, got: usize },

    #[error("audio must be mono, got {0} channels")]
    NotMono(u16),

    #[error("unsupported sample rate {0} Hz")]
    SampleRate(u32),

    #[error("record `{utterance_id}` lacks `{field}`; run the `{stage}` stage first")]
    MissingField {
        utterance_id: String,
        field: &'static str,
        stage: &'static str,
    },

    #[error("alignment has {alignment} tokens but transcript has {transcript}")]
    TokenMismatch { alignment: usize, transcript: usize },

    #[error("split point {split_s} s lies outside (0, {duration_s}) s")]
    SplitOutOfRange { split_s: f64, duration_s: f64 },

    #[error("empty reference")]
    EmptyReference,

    #[error("duplicate entry for `{0}`")]
    Duplicate(String),

    #[error("only {found} eligible speakers, {needed} required")]
    NotEnoughSpeakers { found: usize, needed: usize },

    #[error("speaker `{0}` appears in both the training and an unseen evaluation split")]
    SpeakerLeak(String),

    #[error("rules line {line}: {reason}")]
    Rules { line: usize, reason: String },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) fn invariant(field: &'static str, reason: impl Into<String>) -> Error {
    Error::Invariant {
        field,
        reason: reason.into(),
    }
}
