use std::io;
use std::time::Duration;

use thiserror::Error;

use crate::trace::Violation;

fn join_violations(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("sequence `{sequence_id}` has no tokens")]
    EmptySequence { sequence_id: String },
    #[error("gold annotation has {found} labels, expected {expected}")]
    GoldLength { expected: usize, found: usize },
    #[error("label `{label}` at position {position} is not a BIO label")]
    InvalidBioLabel { position: usize, label: String },
    #[error("malformed trace `{sequence_id}`: {}", join_violations(.violations))]
    Invalid { sequence_id: String, violations: Vec<Violation> },
}

#[derive(Debug, Error)]
pub enum EditError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    /// Outputs that shrink would require revocations, which are rejected.
    #[error("emission shrinks from {from} to {to} labels at step {step}")]
    Shrinking { step: usize, from: usize, to: usize },
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("sequence `{sequence_id}` has no gold annotation")]
    MissingGold { sequence_id: String },
    #[error("sequence {index}: prediction has {found} labels, gold has {expected}")]
    LengthMismatch { index: usize, expected: usize, found: usize },
    #[error("{count} predictions but {golds} gold annotations")]
    CountMismatch { count: usize, golds: usize },
    #[error("sequence {index}: `{label}` is not a BIO label")]
    InvalidLabel { index: usize, label: String },
    #[error("no traces to evaluate")]
    EmptyCorpus,
    #[error("no delays requested")]
    NoDelays,
}

/// Failures of the newline-delimited JSON protocol.
#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("cannot start external endpoint `{endpoint}`: {source}")]
    Spawn { endpoint: String, source: io::Error },
    #[error("broken pipe: {0}")]
    BrokenPipe(io::Error),
    #[error("endpoint closed the connection")]
    Closed,
    #[error("malformed response line `{line}`: {reason}")]
    Malformed { line: String, reason: String },
    #[error("id mismatch: sent {expected}, received {found}")]
    IdMismatch { expected: u64, found: u64 },
    #[error("no response within {0:?}")]
    Timeout(Duration),
    #[error("label count mismatch: expected {expected}, received {found}")]
    LabelCountMismatch { expected: usize, found: usize },
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("step {step}: {source}")]
    Processor { step: usize, source: ExternalError },
    #[error("step {step}: continuation failed: {source}")]
    Continuation { step: usize, source: ExternalError },
    #[error(transparent)]
    External(#[from] ExternalError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("n-gram order must be at least 2, got {0}")]
    InvalidOrder(usize),
    #[error("invalid processor configuration: {0}")]
    Config(String),
    #[error("n-gram model is not readable: {0}")]
    Model(String),
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("empty corpus")]
    Empty,
    #[error("line {line}: field `{path}`: {reason}")]
    Schema { line: usize, path: String, reason: String },
    #[error("line {line}: {source}")]
    Trace { line: usize, source: TraceError },
    #[error("{candidates} candidates but {references} references")]
    Unaligned { candidates: usize, references: usize },
    #[error("no candidates to score")]
    NoCandidates,
    #[error("cannot write trace `{sequence_id}`: {source}")]
    InvalidTrace { sequence_id: String, source: TraceError },
}
