use std::path::PathBuf;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("missing declared column `{0}`")]
    MissingColumn(String),

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("empty column name at position {0}")]
    EmptyColumnName(usize),

    #[error("ragged row at line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("feature matrix contains non-finite values")]
    NonFinite,

    #[error("empty table")]
    EmptyTable,

    #[error("target column `{column}` is not binary ({distinct} distinct values)")]
    TargetNotBinary { column: String, distinct: usize },

    #[error("protected column `{0}` is constant")]
    ProtectedConstant(String),

    #[error("class {class} has {count} members, fewer than the {folds} folds requested")]
    InsufficientClass {
        class: u8,
        count: usize,
        folds: usize,
    },

    #[error("fold count must be at least 2, got {0}")]
    TooFewFolds(usize),

    #[error("cannot draw from an empty index list")]
    EmptyIndexList,

    #[error("input width {found} does not match model width {expected}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("training data contains a single class")]
    SingleClass,

    #[error("no training rows")]
    EmptyData,

    #[error("degenerate subset: {n0} rows of class 0 and {n1} of class 1 (need 2 of each)")]
    DegenerateSubset { n0: usize, n1: usize },

    #[error("group `{group}` has {n0} rows of class 0 and {n1} of class 1 (need 2 of each)")]
    DegenerateGroup { group: String, n0: usize, n1: usize },

    #[error("missing ranking method {method} for group {group}")]
    MissingMethod { method: String, group: usize },

    #[error("duplicate ranking method {method} for group {group}")]
    DuplicateMethod { method: String, group: usize },

    #[error("rankings disagree on feature count ({expected} vs {found})")]
    MismatchedFeatures { expected: usize, found: usize },

    #[error("group {0} has no rows")]
    EmptyGroup(usize),

    #[error("unknown group label `{0}`")]
    UnknownGroup(String),

    #[error("invalid prediction batch: {0}")]
    InvalidBatch(String),

    #[error("cannot aggregate an empty list")]
    EmptyList,

    #[error("value {value} out of range 1..={max}")]
    OutOfRange { value: usize, max: usize },

    #[error("every prefix in the sweep was degenerate")]
    AllPrefixesDegenerate,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
