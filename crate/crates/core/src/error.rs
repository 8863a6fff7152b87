use thiserror::Error;

use crate::Symbol;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("position {pos} out of range 1..={len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("symbol {symbol} out of range 1..={sigma}")]
    SymbolOutOfRange { symbol: Symbol, sigma: u32 },
    #[error("symbol {symbol} has fewer than {k} occurrences")]
    OccurrenceNotFound { symbol: Symbol, k: usize },
    #[error("empty range {from}..{to}")]
    EmptyRange { from: usize, to: usize },
    #[error("index {index} out of range 0..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("value {value} out of range 1..={total}")]
    ValueOutOfRange { value: u64, total: u64 },
    #[error("update would make entry {index} negative")]
    NegativeResult { index: usize },
    #[error("empty window")]
    EmptyWindow,
    #[error("truncated gamma stream")]
    TruncatedStream,
    #[error("malformed chunk stream: {0}")]
    MalformedStream(&'static str),
    #[error("candidate {symbol} has relative frequency below the chunk minimum")]
    FrequencyBelowMinimum { symbol: Symbol },
    #[error("threshold {beta} is below the build threshold {alpha}")]
    ThresholdBelowBuildAlpha { beta: String, alpha: String },
    #[error("threshold {0} must lie in (0, 1)")]
    ThresholdOutOfRange(String),
    #[error("no sub-level fits the query range")]
    LevelUnavailable,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("snapshot format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
