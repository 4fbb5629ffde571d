//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid UTF-8 in {source_name} at line {line}")]
    InvalidUtf8 { source_name: String, line: usize },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("corpus contains no characters (only empty entries)")]
    NoCharacters,

    #[error("invalid pattern `{pattern}`: {message}")]
    InvalidPattern { pattern: String, message: String },

    #[error("no username/password pairs given")]
    EmptyPairs,

    #[error("malformed pair line {line}: expected two tab-separated columns")]
    MalformedPair { line: usize },

    #[error("model order must be at least 1")]
    OrderTooSmall,

    #[error("model order {order} exceeds the configured maximum {max}; raise the limit explicitly to override")]
    OrderTooLarge { order: usize, max: usize },

    #[error("malformed gram: {message}")]
    MalformedGram { message: String },

    #[error("string does not occur in the training counts; use plain scoring instead")]
    NotInTrainingCorpus,

    #[error("threshold must be a positive probability")]
    InvalidThreshold,

    #[error("discretization base must be greater than 1")]
    InvalidBase,

    #[error("enumeration limit {limit} exceeded after {emitted} candidates")]
    EnumerationTruncated { limit: usize, emitted: usize },

    #[error("model file error at line {line}: {message}")]
    ModelFormat { line: usize, message: String },

    #[error("character {0:?} is not in the charset")]
    ForeignCharacter(char),

    #[error("dictionary is empty")]
    EmptyDictionary,

    #[error("juxtaposition of {size} words exceeds the cap of {cap}")]
    JuxtaposeTooLarge { size: usize, cap: usize },

    #[error("attack plan is empty")]
    EmptyPlan,

    #[error("plan file error at line {line}: {message}")]
    PlanFormat { line: usize, message: String },

    #[error("markov step budget must be positive")]
    ZeroBudget,

    #[error("username step requires a paired username list")]
    MissingUsernames,
    #[error("username/password pairs do not match the evaluation corpus")]
    PairsDoNotMatchEval,

    #[error("holdout scoring requires the evaluation corpus to be the training corpus")]
    HoldoutMismatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
