//! Evaluation and simulation of incremental sequence processors.
//!
//! Non-incremental labelers are run on every prefix of a sentence
//! (restart-incrementality) and the resulting partial outputs are scored with
//! edit overhead, correction time and relative correctness, optionally under
//! delayed commitment.

pub mod cli;
pub mod corpus;
pub mod editops;
pub mod error;
pub mod metrics;
pub mod simulator;
pub mod trace;

pub use error::{CorpusError, EditError, ExternalError, MetricsError, SimError, TraceError};
pub use trace::{
    validate_trace, Delay, GoldAnnotation, IncrementalTrace, LabelScheme, StepOutput, TaskKind, TokenSequence,
    Violation,
};
