//! Restart-incremental simulation: run a non-incremental labeler on every
//! prefix of a sentence, optionally padded with a predicted continuation, and
//! record the partial outputs as an [`IncrementalTrace`].

pub mod external;
pub mod ngram;
pub mod processors;

use std::sync::Arc;

pub use external::{Endpoint, ExternalContinuation, ExternalProcessor, ExternalSpec, LineClient};
pub use ngram::NGramModel;
pub use processors::{LookupTagger, WindowRule, WindowTagger};

use crate::error::{ExternalError, SimError};
use crate::trace::{IncrementalTrace, StepOutput, TaskKind, TokenSequence};

/// A labeler over complete inputs. Tagging returns one label per input token,
/// classification exactly one label.
pub trait Processor {
    fn label(&mut self, tokens: &[String], task: TaskKind) -> Result<Vec<String>, ExternalError>;
}

/// Source of hypothetical right context for a prefix.
pub trait ContinuationGenerator {
    fn continue_prefix(&mut self, prefix: &[String]) -> Result<Vec<String>, ExternalError>;
}

impl<P: Processor + ?Sized> Processor for Box<P> {
    fn label(&mut self, tokens: &[String], task: TaskKind) -> Result<Vec<String>, ExternalError> {
        (**self).label(tokens, task)
    }
}

impl<C: ContinuationGenerator + ?Sized> ContinuationGenerator for Box<C> {
    fn continue_prefix(&mut self, prefix: &[String]) -> Result<Vec<String>, ExternalError> {
        (**self).continue_prefix(prefix)
    }
}

/// Empty continuation: the processor sees only the prefix.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoContinuation;

impl ContinuationGenerator for NoContinuation {
    fn continue_prefix(&mut self, _prefix: &[String]) -> Result<Vec<String>, ExternalError> {
        Ok(Vec::new())
    }
}

/// Repeats the last prefix token once.
#[derive(Debug, Clone, Copy, Default)]
pub struct RepeatLast;

impl ContinuationGenerator for RepeatLast {
    fn continue_prefix(&mut self, prefix: &[String]) -> Result<Vec<String>, ExternalError> {
        Ok(prefix.last().cloned().into_iter().collect())
    }
}

#[derive(Debug, Clone)]
pub struct NGramContinuation {
    pub model: Arc<NGramModel>,
    pub max_len: usize,
}

impl ContinuationGenerator for NGramContinuation {
    fn continue_prefix(&mut self, prefix: &[String]) -> Result<Vec<String>, ExternalError> {
        Ok(self.model.continue_sequence(prefix, self.max_len))
    }
}

pub const DEFAULT_MAX_CONTINUATION: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessorSpec {
    Lookup(LookupTagger),
    Window(WindowTagger),
    External(ExternalSpec),
}

impl ProcessorSpec {
    pub fn instantiate(&self) -> Result<Box<dyn Processor + Send>, SimError> {
        Ok(match self {
            ProcessorSpec::Lookup(p) => Box::new(p.clone()),
            ProcessorSpec::Window(p) => Box::new(p.clone()),
            ProcessorSpec::External(spec) => Box::new(ExternalProcessor::connect(spec)?),
        })
    }

    /// True when a token's label never depends on later tokens.
    pub fn is_causal(&self) -> bool {
        match self {
            ProcessorSpec::Lookup(_) => true,
            ProcessorSpec::Window(w) => w.is_causal(),
            ProcessorSpec::External(_) => false,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ProcessorSpec::Lookup(p) => format!("lookup ({} entries)", p.labels.len()),
            ProcessorSpec::Window(w) => format!("window (left {}, right {}, {} rules)", w.left, w.right, w.rules.len()),
            ProcessorSpec::External(e) => format!("external ({})", external::describe(e)),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub enum ContinuationSpec {
    #[default]
    None,
    RepeatLast,
    NGram {
        model: Arc<NGramModel>,
        max_len: usize,
    },
    External(ExternalSpec),
}

impl ContinuationSpec {
    pub fn instantiate(&self) -> Result<Box<dyn ContinuationGenerator + Send>, SimError> {
        Ok(match self {
            ContinuationSpec::None => Box::new(NoContinuation),
            ContinuationSpec::RepeatLast => Box::new(RepeatLast),
            ContinuationSpec::NGram { model, max_len } => {
                Box::new(NGramContinuation { model: Arc::clone(model), max_len: *max_len })
            }
            ContinuationSpec::External(spec) => Box::new(ExternalContinuation::connect(spec)?),
        })
    }

    pub fn describe(&self) -> String {
        match self {
            ContinuationSpec::None => "none".into(),
            ContinuationSpec::RepeatLast => "repeat-last".into(),
            ContinuationSpec::NGram { model, max_len } => {
                format!("ngram (order {}, max length {max_len})", model.order())
            }
            ContinuationSpec::External(e) => format!("external ({})", external::describe(e)),
        }
    }
}

/// Labels of a full input, checked against the task's label count.
pub fn label_checked<P: Processor + ?Sized>(
    processor: &mut P,
    input: &[String],
    task: TaskKind,
) -> Result<Vec<String>, ExternalError> {
    let labels = processor.label(input, task)?;
    let expected = task.labels_at_step(input.len());
    if labels.len() != expected {
        return Err(ExternalError::LabelCountMismatch { expected, found: labels.len() });
    }
    Ok(labels)
}

/// Runs `processor` on each prefix `1..=n`. Before the last step the prefix
/// is extended with the continuation, whose labels are discarded; the last
/// step sees the bare sentence, so it equals the non-incremental output.
pub fn run_incremental<P, C>(
    tokens: &TokenSequence,
    task: TaskKind,
    processor: &mut P,
    continuation: &mut C,
) -> Result<IncrementalTrace, SimError>
where
    P: Processor + ?Sized,
    C: ContinuationGenerator + ?Sized,
{
    let n = tokens.len();
    let mut steps = Vec::with_capacity(n);
    for t in 1..=n {
        let prefix = tokens.prefix(t);
        let mut input = prefix.to_vec();
        if t < n {
            let extra =
                continuation.continue_prefix(prefix).map_err(|source| SimError::Continuation { step: t, source })?;
            input.extend(extra);
        }
        let mut labels =
            label_checked(processor, &input, task).map_err(|source| SimError::Processor { step: t, source })?;
        labels.truncate(task.labels_at_step(t));
        steps.push(StepOutput(labels));
    }
    Ok(IncrementalTrace::new(task, tokens.clone(), steps, None)?)
}

/// Owns an instantiated processor and continuation generator.
pub struct Simulator {
    processor: Box<dyn Processor + Send>,
    continuation: Box<dyn ContinuationGenerator + Send>,
}

impl Simulator {
    pub fn new(processor: &ProcessorSpec, continuation: &ContinuationSpec) -> Result<Self, SimError> {
        Ok(Self { processor: processor.instantiate()?, continuation: continuation.instantiate()? })
    }

    pub fn run(&mut self, tokens: &TokenSequence, task: TaskKind) -> Result<IncrementalTrace, SimError> {
        run_incremental(tokens, task, &mut self.processor, &mut self.continuation)
    }

    /// The processor's output on the bare full sentence.
    pub fn label_full(&mut self, tokens: &TokenSequence, task: TaskKind) -> Result<Vec<String>, SimError> {
        label_checked(&mut self.processor, tokens.tokens(), task)
            .map_err(|source| SimError::Processor { step: tokens.len(), source })
    }
}
