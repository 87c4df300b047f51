use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("alphabet size must be at least 2, got {q}")]
    InvalidAlphabet { q: u32 },
    #[error("alphabet size {q} is not supported: {reason}")]
    UnsupportedAlphabet { q: u32, reason: &'static str },
    #[error("a state needs at least one count")]
    EmptyState,
    #[error("the message set must be non-empty")]
    NoMessages,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expected {expected} parts, found {found}")]
    PartCount { expected: usize, found: usize },
    #[error("partition does not sum to the state at capacity {level}")]
    PartitionSum { level: usize },
    #[error("outcome is unreachable: part {part} needs a negative count at capacity {level}")]
    NonIntegralOrNegativePartition { part: usize, level: usize },
    #[error("cannot translate a state with error budget 0")]
    ZeroBudget,
    #[error("argument out of domain: {0}")]
    Domain(&'static str),
    #[error("solver node budget of {limit} exceeded")]
    NodeLimit { limit: u64 },
    #[error("count at capacity {level} is too large to enumerate")]
    CountTooLarge { level: usize },
    #[error("state is not winning with {remaining} questions left")]
    NotWinning { remaining: usize },
    #[error("table index ({m}, {k}) out of range")]
    IndexOutOfRange { m: usize, k: usize },
    #[error("table entry ({m}, {k}) is not divisible as required")]
    NonExactDivision { m: usize, k: usize },
    #[error("table recurrence produced a negative entry at ({m}, {k})")]
    NegativeEntry { m: usize, k: usize },
    #[error("strategy root does not cover the initial state")]
    RootMismatch,
    #[error("no unique decoding: {messages} messages and {dummies} padding elements survive")]
    NoUniqueSurvivor { messages: u64, dummies: String },
    #[error("expected {expected} symbols, got {found}")]
    TranscriptLength { expected: usize, found: usize },
    #[error("message {theta} is outside 0..{messages}")]
    MessageOutOfRange { theta: u64, messages: u64 },
    #[error("symbol {symbol} is outside the alphabet 0..{q}")]
    SymbolOutOfRange { symbol: u32, q: u32 },
    #[error("policy and vote ledger disagree at capacity {level}")]
    LedgerMismatch { level: usize },
    #[error("invalid element assignment: {0}")]
    InvalidAssignment(String),
    #[error("exhaustive verification needs {needed} leaves, cap is {cap}")]
    BudgetExceeded { needed: String, cap: u64 },
    #[error("parse error: {0}")]
    Parse(String),
}
