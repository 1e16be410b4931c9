//! Error type shared across the toolkit.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the library.
///
/// Every variant has a stable short name (see [`Error::name`]) so that
/// callers can report errors as `error[Name]: message` one-liners.
#[derive(Debug, Error)]
pub enum Error {
    /// The HTML input was empty (or contained only whitespace).
    #[error("input document is empty")]
    EmptyDocument,

    /// A table index was out of range for the parsed document.
    #[error("no table at index {index}: document contains {count} table(s)")]
    InvalidTableIndex { index: usize, count: usize },

    /// Title aggregation was asked to pick from an empty candidate list.
    #[error("candidate title list is empty")]
    EmptyCandidates,

    /// A corpus-level operation received no records.
    #[error("corpus contains no records")]
    EmptyCorpus,

    /// Too few records to produce a meaningful train/validation/test split.
    #[error("need at least {minimum} records to split, got {count}")]
    TooFewRecords { count: usize, minimum: usize },

    /// A token id was outside the extended vocabulary.
    #[error("token id {id} out of range for extended vocabulary of size {limit}")]
    InvalidId { id: usize, limit: usize },

    /// The encoder was given an empty source sequence.
    #[error("source token sequence is empty")]
    EmptySource,

    /// Attention was asked to normalize over zero unmasked positions.
    #[error("attention mask excludes every source position")]
    AllMasked,

    /// Tensor shapes disagreed.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A gradient became NaN or infinite; the optimization step was aborted.
    #[error("non-finite gradient encountered at step {step}")]
    NonFiniteGradient { step: usize },

    /// Every token was masked out of a decode step distribution.
    #[error("decode step distribution has no remaining probability mass")]
    DeadEnd,

    /// Title generation was asked to run on an empty linearized context.
    #[error("linearized context is empty; nothing to generate from")]
    EmptyInput,

    /// Prediction and reference lists had different lengths.
    #[error("system {system:?} has {predictions} predictions for {references} references")]
    LengthMismatch {
        system: String,
        predictions: usize,
        references: usize,
    },

    /// A checkpoint file was malformed.
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),

    /// A vocabulary file was malformed.
    #[error("invalid vocabulary: {0}")]
    Vocab(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Malformed JSON in a dataset file.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable short name for diagnostics and exit-line formatting.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyDocument => "EmptyDocument",
            Error::InvalidTableIndex { .. } => "InvalidTableIndex",
            Error::EmptyCandidates => "EmptyCandidates",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::TooFewRecords { .. } => "TooFewRecords",
            Error::InvalidId { .. } => "InvalidId",
            Error::EmptySource => "EmptySource",
            Error::AllMasked => "AllMasked",
            Error::Shape(_) => "Shape",
            Error::NonFiniteGradient { .. } => "NonFiniteGradient",
            Error::DeadEnd => "DeadEnd",
            Error::EmptyInput => "EmptyInput",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::Checkpoint(_) => "Checkpoint",
            Error::Vocab(_) => "Vocab",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
